#include "pmtc/pmtsc.hpp"

#include "pmtc/errors.hpp"

#include <string>

namespace pmtc {

Matrix reduced_row_embedding(const Matrix& u, const Matrix& g) {
    if (g.cols() <= g.rows()) return u * g;
    // gᵀ = Q R  =>  u g = (u Rᵀ) Qᵀ, and Qᵀ has orthonormal rows.
    Eigen::HouseholderQR<Matrix> qr(g.transpose());
    const Matrix r = qr.matrixQR().topRows(g.rows()).triangularView<Eigen::Upper>();
    return u * r.transpose();
}

namespace {

std::vector<Matrix> basis_matrices(const std::vector<OrthonormalBasis>& bases) {
    std::vector<Matrix> out;
    for (const auto& b : bases) out.push_back(b.matrix());
    return out;
}

void check_bases(const CoupledData& data, const std::vector<OrthonormalBasis>& bases) {
    if (bases.size() != data.num_modes()) throw ShapeError("pmtsc: one basis per clustered mode required");
    for (std::size_t i = 0; i < bases.size(); ++i) {
        if (static_cast<std::size_t>(bases[i].rows()) != data.x.dim(i)) {
            throw ShapeError("pmtsc: basis " + std::to_string(i + 1) + " has wrong row count");
        }
    }
}

// G_i = Û_iᵀ·[mat_i(X ×_{j≠i} Û_jᵀ) (, Y)]
Matrix projected_coefficients(const CoupledData& data, const std::vector<Matrix>& factors, std::size_t mode,
                              double omega, Source source) {
    const DenseTensor projected = project_modes(data.x, factors, mode);
    const Matrix& u = factors[mode];
    if (mode == 0) return u.transpose() * coupled_unfolding(projected, data.y, omega, source);
    return u.transpose() * matricize(projected, mode);
}

}  // namespace

std::vector<Matrix> spectral_matrices(const CoupledData& data, const std::vector<OrthonormalBasis>& bases,
                                      double omega, Source source) {
    validate(data, source);
    check_bases(data, bases);
    const auto factors = basis_matrices(bases);
    std::vector<Matrix> out;
    for (std::size_t i = 0; i < factors.size(); ++i) {
        out.push_back(factors[i] * projected_coefficients(data, factors, i, omega, source));
    }
    return out;
}

SpectralInit pmtsc(const CoupledData& data, std::span<const int> num_clusters, const std::vector<OrthonormalBasis>& bases,
                   const PmtscOptions& options) {
    validate(data, options.source);
    check_bases(data, bases);
    if (num_clusters.size() != data.num_modes()) throw ShapeError("pmtsc: one cluster count per mode required");
    const auto factors = basis_matrices(bases);
    SpectralInit out;
    for (std::size_t i = 0; i < factors.size(); ++i) {
        const Matrix g = projected_coefficients(data, factors, i, options.omega, options.source);
        Matrix embedding = reduced_row_embedding(factors[i], g);
        KmeansOptions km = options.kmeans;
        km.seed = options.kmeans.seed + i;
        auto fit = kmeans_relaxed(embedding, num_clusters[i], km);
        out.memberships.push_back(std::move(fit.membership));
        out.kmeans_objectives.push_back(fit.objective);
        out.embeddings.push_back(std::move(embedding));
    }
    return out;
}

KmeansResult spectral_clustering(const Matrix& y, int num_clusters, const KmeansOptions& options) {
    const auto basis = lsvd(y, num_clusters);
    const Matrix& u = basis.matrix();
    return kmeans_relaxed(reduced_row_embedding(u, u.transpose() * y), num_clusters, options);
}

}  // namespace pmtc
