#include "pmtc/pchooi.hpp"

#include "pmtc/errors.hpp"

#include <algorithm>
#include <string>

namespace pmtc {

namespace {

std::vector<Matrix> basis_matrices(const std::vector<OrthonormalBasis>& bases) {
    std::vector<Matrix> out;
    out.reserve(bases.size());
    for (const auto& b : bases) out.push_back(b.matrix());
    return out;
}

Matrix mode_matrix(const CoupledData& data, const DenseTensor& projected, std::size_t mode,
                   const PchooiOptions& options) {
    if (mode == 0) return coupled_unfolding(projected, data.y, options.omega, options.source);
    return matricize(projected, mode);
}

}  // namespace

PchooiResult pchooi(const CoupledData& data, std::span<const Eigen::Index> ranks, const PchooiOptions& options) {
    validate(data, options.source);
    const std::size_t d = data.num_modes();
    if (ranks.size() != d) {
        throw ShapeError("pchooi: " + std::to_string(ranks.size()) + " ranks for " + std::to_string(d) + " modes");
    }
    for (std::size_t i = 0; i < d; ++i) {
        if (ranks[i] < 1 || static_cast<std::size_t>(ranks[i]) > data.x.dim(i)) {
            throw ShapeError("pchooi: rank " + std::to_string(ranks[i]) + " invalid for mode " + std::to_string(i + 1) +
                             " of size " + std::to_string(data.x.dim(i)));
        }
    }
    if (options.max_iter < 0) throw std::invalid_argument("pchooi: max_iter must be >= 0");

    PchooiResult result;
    result.bases.reserve(d);
    for (std::size_t i = 0; i < d; ++i) {
        result.bases.push_back(lsvd(mode_matrix(data, data.x, i, options), ranks[i]));
    }

    for (int k = 1; k <= options.max_iter; ++k) {
        const auto previous = result.bases;
        auto factors = basis_matrices(result.bases);
        for (std::size_t i = 0; i < d; ++i) {
            // Modes j < i already hold iteration-k bases, modes j > i iteration k-1.
            const DenseTensor projected = project_modes(data.x, factors, i);
            result.bases[i] = lsvd(mode_matrix(data, projected, i, options), ranks[i]);
            factors[i] = result.bases[i].matrix();
        }
        double change = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
            const double dist = subspace_distance(result.bases[i], previous[i]);
            change = std::max(change, dist * dist);
        }
        result.stop_values.push_back(change);
        result.iterations = k;
        if (change <= options.tol) {
            result.converged = true;
            break;
        }
    }

    if (options.compute_denoised) {
        DenseTensor x_hat = data.x;
        for (std::size_t i = 0; i < d; ++i) {
            const Matrix& u = result.bases[i].matrix();
            x_hat = mode_product(mode_product_transposed(x_hat, i, u), i, u);
        }
        result.x_hat = std::move(x_hat);
        if (options.source == Source::coupled) {
            const Matrix& u1 = result.bases[0].matrix();
            result.y_hat = u1 * (u1.transpose() * data.y);
        }
    }
    return result;
}

PchooiResult hooi(const DenseTensor& x, std::span<const Eigen::Index> ranks, PchooiOptions options) {
    options.source = Source::tensor_only;
    return pchooi(CoupledData{x, Matrix()}, ranks, options);
}

OrthonormalBasis outcome_svd(const Matrix& y, Eigen::Index rank) { return lsvd(y, rank); }

}  // namespace pmtc
