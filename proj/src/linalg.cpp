#include "pmtc/linalg.hpp"

#include "pmtc/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace pmtc {

OrthonormalBasis::OrthonormalBasis(Matrix columns) : u_(std::move(columns)) {
    if (u_.cols() > u_.rows()) throw ShapeError("orthonormal basis needs cols <= rows");
    const Matrix gram = u_.transpose() * u_;
    const double dev = (gram - Matrix::Identity(u_.cols(), u_.cols())).cwiseAbs().maxCoeff();
    if (u_.cols() > 0 && !(dev <= kTolerance)) {
        throw std::invalid_argument("columns are not orthonormal (deviation " + std::to_string(dev) + ")");
    }
}

namespace {

void normalize_signs(Matrix& u) {
    for (Eigen::Index c = 0; c < u.cols(); ++c) {
        Eigen::Index arg = 0;
        double best = -1.0;
        for (Eigen::Index i = 0; i < u.rows(); ++i) {
            const double v = std::abs(u(i, c));
            if (v > best) {
                best = v;
                arg = i;
            }
        }
        if (u(arg, c) < 0.0) u.col(c) = -u.col(c);
    }
}

}  // namespace

TruncatedSvd truncated_svd(const Matrix& a, Eigen::Index r) {
    if (r < 1 || r > std::min(a.rows(), a.cols())) {
        throw ShapeError("lsvd rank " + std::to_string(r) + " exceeds matrix dimensions " +
                         std::to_string(a.rows()) + "x" + std::to_string(a.cols()));
    }
    if (!a.allFinite()) throw std::invalid_argument("lsvd: matrix has non-finite entries");

    Matrix u;
    Vector sv;
    if (a.cols() > 4 * a.rows()) {
        // Wide unfoldings: orthogonalize the column space first so the SVD
        // only sees a square factor.  A = Rᵀ Qᵀ with Aᵀ = Q R.
        Eigen::HouseholderQR<Matrix> qr(a.transpose());
        const Matrix rt = qr.matrixQR().topRows(a.rows()).triangularView<Eigen::Upper>().toDenseMatrix().transpose();
        Eigen::BDCSVD<Matrix> svd(rt, Eigen::ComputeThinU);
        u = svd.matrixU().leftCols(r);
        sv = svd.singularValues().head(r);
    } else {
        Eigen::BDCSVD<Matrix> svd(a, Eigen::ComputeThinU);
        u = svd.matrixU().leftCols(r);
        sv = svd.singularValues().head(r);
    }
    normalize_signs(u);
    return {OrthonormalBasis(std::move(u)), std::move(sv)};
}

OrthonormalBasis lsvd(const Matrix& a, Eigen::Index r) { return truncated_svd(a, r).basis; }

double subspace_distance(const OrthonormalBasis& u, const OrthonormalBasis& v) {
    if (u.rows() != v.rows() || u.cols() != v.cols()) {
        throw ShapeError("subspace_distance: bases must have identical shapes");
    }
    if (u.cols() == 0) return 0.0;
    // ‖(I − UUᵀ)V‖₂ stays accurate for small angles, unlike √(1 − σ_min²).
    const Matrix residual = v.matrix() - u.matrix() * (u.matrix().transpose() * v.matrix());
    Eigen::JacobiSVD<Matrix> svd(residual);
    return std::clamp(svd.singularValues()(0), 0.0, 1.0);
}

}  // namespace pmtc
