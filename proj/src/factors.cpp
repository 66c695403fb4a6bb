#include "pmtc/factors.hpp"

#include "pmtc/errors.hpp"

#include <string>

namespace pmtc {

namespace {

Matrix pooled_rows(const Matrix& y, const Membership& m1, GroupPooling pooling) {
    if (static_cast<std::size_t>(y.rows()) != m1.size()) {
        throw ShapeError("outcome rows (" + std::to_string(y.rows()) + ") do not match membership size (" +
                         std::to_string(m1.size()) + ")");
    }
    Matrix means = cluster_means(y, m1);
    if (pooling == GroupPooling::normalized) means = scale(m1).asDiagonal() * means;
    return means;
}

Matrix demeaned_rows(const Matrix& a) { return a.colwise() - a.rowwise().mean(); }

Matrix regress_on(const Matrix& response, const Matrix& f) {
    const Matrix gram = f * f.transpose();
    Eigen::SelfAdjointEigenSolver<Matrix> eig(gram, Eigen::EigenvaluesOnly);
    const double lo = eig.eigenvalues().minCoeff();
    const double hi = eig.eigenvalues().maxCoeff();
    if (!(lo > 0.0) || hi / lo >= 1e12) throw DegenerateError("factor Gram matrix FFᵀ is singular or ill-conditioned");
    // B̂ᵀ = (FFᵀ)⁻¹ F Rᵀ
    return gram.ldlt().solve(f * response.transpose()).transpose();
}

}  // namespace

FactorEstimate estimate_latent(const Matrix& y, const Membership& m1, int num_factors, GroupPooling pooling) {
    if (num_factors < 1 || num_factors > m1.num_clusters()) {
        throw std::invalid_argument("latent factor count " + std::to_string(num_factors) + " must be in 1.." +
                                    std::to_string(m1.num_clusters()));
    }
    const Matrix pooled = pooled_rows(y, m1, pooling);
    const Matrix second_moment = pooled * pooled.transpose() / static_cast<double>(y.cols());
    if (second_moment.cwiseAbs().maxCoeff() == 0.0) {
        throw DegenerateError("pooled outcome second moment is zero; latent loadings are undefined");
    }
    FactorEstimate out;
    out.kind = FactorKind::latent;
    out.u_b = lsvd(second_moment, num_factors).matrix();
    out.f_hat = out.u_b.transpose() * pooled;
    return out;
}

FactorEstimate estimate_observed(const Matrix& y, const Membership& m1, const Matrix& f, bool demean,
                                 GroupPooling pooling) {
    if (f.cols() != y.cols()) {
        throw ShapeError("factors span " + std::to_string(f.cols()) + " periods, outcomes " + std::to_string(y.cols()));
    }
    const Matrix pooled = pooled_rows(y, m1, pooling);
    FactorEstimate out;
    out.kind = FactorKind::observed;
    out.b = demean ? regress_on(demeaned_rows(pooled), demeaned_rows(f)) : regress_on(pooled, f);
    return out;
}

Matrix per_asset_loadings(const FactorEstimate& estimate, const Membership& m1) {
    const Matrix& rows = estimate.loadings();
    if (rows.rows() != m1.num_clusters()) throw ShapeError("loading rows do not match cluster count");
    Matrix out(static_cast<Eigen::Index>(m1.size()), rows.cols());
    for (std::size_t j = 0; j < m1.size(); ++j) out.row(static_cast<Eigen::Index>(j)) = rows.row(m1[j]);
    return out;
}

Matrix ungrouped_loadings(const Matrix& y, const Matrix& f, bool demean) {
    if (f.cols() != y.cols()) throw ShapeError("factor and outcome period counts differ");
    return demean ? regress_on(demeaned_rows(y), demeaned_rows(f)) : regress_on(y, f);
}

}  // namespace pmtc
