#include "oracles.hpp"
#include "pmtc/errors.hpp"
#include "pmtc/factors.hpp"

#include <gtest/gtest.h>

using namespace pmtc;

namespace {

struct Panel {
    Membership m;
    Matrix b, f, y;
};

Panel noiseless(std::uint64_t seed, std::size_t p = 30, int r = 4, int m = 2, Eigen::Index t = 25) {
    std::mt19937_64 rng(seed);
    Panel out{oracle::random_full_membership(p, r, rng), oracle::random_matrix(r, m, rng), oracle::random_matrix(m, t, rng), {}};
    out.y = one_hot(out.m) * out.b * out.f;
    return out;
}

}  // namespace

TEST(Observed, NoiselessReproducesLoadings) {
    const auto p = noiseless(1);
    const auto est = estimate_observed(p.y, p.m, p.f, false);
    EXPECT_LE((est.b - p.b).cwiseAbs().maxCoeff(), 1e-10);
    const auto scaled = estimate_observed(p.y, p.m, p.f, false, GroupPooling::normalized);
    EXPECT_LE((scaled.b - scale(p.m).asDiagonal() * p.b).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Observed, IdentityFactorsGiveGroupMeans) {
    std::mt19937_64 rng(2);
    const auto m = oracle::random_full_membership(12, 3, rng);
    const Matrix y = oracle::random_matrix(12, 4, rng);
    const auto est = estimate_observed(y, m, Matrix::Identity(4, 4), false);
    EXPECT_LE((est.b - cluster_means(y, m)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Observed, MatchesLeastSquaresOracle) {
    std::mt19937_64 rng(3);
    const auto m = oracle::random_full_membership(20, 3, rng);
    const Matrix y = oracle::random_matrix(20, 30, rng);
    const Matrix f = oracle::random_matrix(2, 30, rng);
    const auto est = estimate_observed(y, m, f, true);
    const Matrix g = cluster_means(y, m);
    Matrix design(30, 3);
    design << Vector::Ones(30), f.transpose();
    for (Eigen::Index a = 0; a < 3; ++a) {
        const Vector coef = design.colPivHouseholderQr().solve(Vector(g.row(a).transpose()));
        EXPECT_LE((est.b.row(a).transpose() - coef.tail(2)).cwiseAbs().maxCoeff(), 1e-10);
    }
}

TEST(Observed, DemeanIgnoresTimeConstants) {
    const auto p = noiseless(4);
    std::mt19937_64 rng(4);
    const Matrix noisy = p.y + oracle::random_matrix(30, 25, rng);
    Matrix shifted = noisy;
    shifted.colwise() += Vector::LinSpaced(30, -3.0, 7.0);
    const auto a = estimate_observed(noisy, p.m, p.f, true);
    const auto b = estimate_observed(shifted, p.m, p.f, true);
    EXPECT_LE((a.b - b.b).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Observed, SingularFactorsRejected) {
    const auto p = noiseless(5);
    Matrix f = p.f;
    f.row(1) = 2.0 * f.row(0);
    EXPECT_THROW(estimate_observed(p.y, p.m, f, false), DegenerateError);
    EXPECT_THROW(estimate_observed(p.y, p.m, Matrix(p.f.leftCols(10)), false), ShapeError);
}

TEST(Latent, NoiselessSpansScaledLoadings) {
    const auto p = noiseless(6);
    const auto est = estimate_latent(p.y, p.m, 2);
    EXPECT_EQ(est.f_hat.rows(), 2);
    EXPECT_EQ(est.f_hat.cols(), 25);
    EXPECT_LE((est.u_b.transpose() * est.u_b - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LE(subspace_distance(OrthonormalBasis(est.u_b), lsvd(p.b, 2)), 1e-10);
    const auto norm = estimate_latent(p.y, p.m, 2, GroupPooling::normalized);
    const Matrix lifted = normalized_basis(p.m).matrix() * norm.u_b;
    EXPECT_LE(subspace_distance(lsvd(lifted, 2), lsvd(Matrix(one_hot(p.m) * p.b), 2)), 1e-10);
}

TEST(Latent, Errors) {
    const auto p = noiseless(7);
    EXPECT_THROW(estimate_latent(Matrix::Zero(30, 25), p.m, 2), DegenerateError);
    EXPECT_THROW(estimate_latent(p.y, p.m, 5), std::invalid_argument);
    EXPECT_THROW(estimate_latent(p.y, Membership(std::vector<int>(30, 0), 2), 1), EmptyClusterError);
}

TEST(PerAsset, GatherByLabel) {
    std::mt19937_64 rng(8);
    const auto m = oracle::random_full_membership(15, 3, rng);
    FactorEstimate est;
    est.b = oracle::random_matrix(3, 2, rng);
    const Matrix rows = per_asset_loadings(est, m);
    for (std::size_t j = 0; j < 15; ++j) EXPECT_EQ(Matrix(rows.row(static_cast<Eigen::Index>(j))), Matrix(est.b.row(m[j])));
    const Membership one(std::vector<int>(5, 0), 1);
    FactorEstimate single;
    single.b = Matrix::Constant(1, 2, 3.0);
    EXPECT_EQ(per_asset_loadings(single, one), Matrix::Constant(5, 2, 3.0));
}

TEST(Grouping, BeatsAssetByAssetRegression) {
    double grouped = 0.0, ungrouped = 0.0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        auto p = noiseless(100 + seed, 60, 3, 2, 40);
        std::mt19937_64 rng(seed);
        const Matrix y = p.y + oracle::random_matrix(60, 40, rng);
        const Matrix truth = one_hot(p.m) * p.b;
        grouped += (per_asset_loadings(estimate_observed(y, p.m, p.f), p.m) - truth).rowwise().norm().maxCoeff();
        ungrouped += (ungrouped_loadings(y, p.f) - truth).rowwise().norm().maxCoeff();
    }
    EXPECT_LT(grouped, ungrouped);
}
