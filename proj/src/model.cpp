#include "pmtc/model.hpp"

#include "pmtc/errors.hpp"

#include <cmath>
#include <string>

namespace pmtc {

void validate(const CoupledData& data, Source source) {
    if (data.x.order() < 2) throw ShapeError("characteristics tensor needs at least one clustered mode plus time");
    if (source == Source::tensor_only) return;
    const auto p1 = static_cast<Eigen::Index>(data.x.dim(0));
    const auto t = static_cast<Eigen::Index>(data.periods());
    if (data.y.rows() != p1 || data.y.cols() != t) {
        throw ShapeError("outcome matrix is " + std::to_string(data.y.rows()) + "x" + std::to_string(data.y.cols()) +
                         ", expected " + std::to_string(p1) + "x" + std::to_string(t));
    }
}

DenseTensor project_modes(const DenseTensor& x, std::span<const Matrix> factors, std::size_t skip) {
    if (factors.size() + 1 != x.order()) throw ShapeError("project_modes: one factor per clustered mode required");
    DenseTensor out = x;
    for (std::size_t j = 0; j < factors.size(); ++j) {
        if (j == skip) continue;
        out = mode_product_transposed(out, j, factors[j]);
    }
    return out;
}

Matrix coupled_unfolding(const DenseTensor& projected, const Matrix& y, double omega, Source source) {
    auto view = projected.mode0_view();
    if (source == Source::tensor_only) return view;
    if (omega < 0.0 || !std::isfinite(omega)) throw std::invalid_argument("coupling weight must be finite and >= 0");
    Matrix out(view.rows(), view.cols() + y.cols());
    out.leftCols(view.cols()) = std::sqrt(omega) * view;
    out.rightCols(y.cols()) = y;
    return out;
}

}  // namespace pmtc
