#include "oracles.hpp"
#include "pmtc/errors.hpp"
#include "pmtc/evaluate.hpp"
#include "pmtc/metrics.hpp"
#include "pmtc/simulate.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace pmtc;

namespace {

// Average 0-based rank of x[k] among xs, divided by n - 1.
double rank_oracle(const std::vector<double>& xs, std::size_t k) {
    double less = 0, equal = 0;
    for (double v : xs) {
        less += v < xs[k];
        equal += v == xs[k];
    }
    if (xs.size() == 1) return 0.5;
    return (less + (equal - 1) / 2.0) / static_cast<double>(xs.size() - 1);
}

SimDesign clean_design(std::uint64_t seed) {
    SimDesign d;
    d.dims = {40, 30};
    d.periods = 24;
    d.ranks = {3, 2};
    d.num_factors = 2;
    d.mu_b = {1.0, 0.0};
    d.mu_f = {0.03, 0.03};
    d.gamma_x = 0.3;
    d.gamma_y = 0.3;
    d.seed = seed;
    return d;
}

}  // namespace

TEST(RankNormalize, MatchesOracleWithTies) {
    std::mt19937_64 rng(1);
    std::uniform_int_distribution<int> small(0, 4);
    DenseTensor x({7, 3, 4});
    for (auto& v : x.data()) v = small(rng);
    const auto r = rank_normalize(x);
    for (std::size_t j = 0; j < 3; ++j) {
        for (std::size_t t = 0; t < 4; ++t) {
            std::vector<double> fiber;
            for (std::size_t i = 0; i < 7; ++i) fiber.push_back(x.at({i, j, t}));
            for (std::size_t i = 0; i < 7; ++i) EXPECT_DOUBLE_EQ(r.at({i, j, t}), rank_oracle(fiber, i));
        }
    }
}

TEST(RankNormalize, Properties) {
    std::mt19937_64 rng(2);
    const auto x = oracle::random_tensor({9, 2, 3}, rng);
    const auto r = rank_normalize(x);
    DenseTensor y = x;
    for (auto& v : y.data()) v = std::exp(3 * v) - 2;  // strictly increasing
    EXPECT_EQ(rank_normalize(y), r);
    for (double v : r.data()) {
        EXPECT_GE(v, 0.0);
        EXPECT_LE(v, 1.0);
    }
    const DenseTensor one({1, 2, 2}, {5, -1, 3, 3});
    const auto ro = rank_normalize(one);
    for (double v : ro.data()) EXPECT_EQ(v, 0.5);
}

TEST(Slices, PeriodsAndColumns) {
    std::mt19937_64 rng(4);
    CoupledData d{oracle::random_tensor({3, 2, 5}, rng), oracle::random_matrix(3, 5, rng)};
    const auto s = slice_periods(d, 1, 4);
    ASSERT_EQ(s.x.dims(), (std::vector<std::size_t>{3, 2, 3}));
    for (std::size_t i = 0; i < 3; ++i) {
        for (std::size_t j = 0; j < 2; ++j) {
            for (std::size_t t = 0; t < 3; ++t) EXPECT_EQ(s.x.at({i, j, t}), d.x.at({i, j, t + 1}));
        }
    }
    EXPECT_EQ(s.y, d.y.middleCols(1, 3));
    EXPECT_THROW(slice_periods(d, 2, 6), ShapeError);
    EXPECT_THROW(slice_columns(d.y, 3, 2), ShapeError);
}

TEST(FitPanel, HighSnrRecoversGroupsAndLoadings) {
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
        const auto sim = gen_pmtc(clean_design(seed));
        FitOptions o;
        o.clusters = {3, 2};
        const auto fit = fit_panel(sim.data, sim.truth.f, o);
        EXPECT_EQ(cer(fit.memberships[0], sim.truth.memberships[0]).rate, 0.0);
        EXPECT_EQ(cer(fit.memberships[1], sim.truth.memberships[1]).rate, 0.0);
        const auto perm = cer(fit.memberships[0], sim.truth.memberships[0]).permutation;
        for (int a = 0; a < 3; ++a) {
            EXPECT_LT((fit.loadings.b.row(perm[a]) - sim.truth.b.row(a)).norm(), 0.5 * sim.truth.b.row(a).norm() + 0.5);
        }
    }
}

TEST(FitPanel, OneGroupPoolsEveryAsset) {
    const auto sim = gen_pmtc(clean_design(5));
    FitOptions o;
    o.clusters = {1, 2};
    const auto fit = fit_panel(sim.data, sim.truth.f, o);
    EXPECT_EQ(fit.memberships[0].num_clusters(), 1);
    EXPECT_EQ(fit.memberships[0].cluster_sizes()[0], 40u);
    const Matrix pooled = Matrix::Ones(1, 40) / 40.0 * sim.data.y;
    EXPECT_TRUE(fit.loadings.b.isApprox(ungrouped_loadings(pooled, sim.truth.f), 1e-12));
}

TEST(FitPanel, Errors) {
    const auto sim = gen_pmtc(clean_design(6));
    FitOptions o;
    o.clusters = {3};
    EXPECT_THROW(fit_panel(sim.data, sim.truth.f, o), ShapeError);
    o.clusters = {3, 2};
    EXPECT_THROW(fit_panel(sim.data, std::nullopt, o), std::invalid_argument);
    o.factors = FactorKind::latent;
    o.num_factors = 2;
    EXPECT_NO_THROW(fit_panel(sim.data, std::nullopt, o));
}

TEST(EvaluateSplit, PerfectAndBenchmarkFits) {
    std::mt19937_64 rng(7);
    const Membership m({0, 1, 1, 0, 2}, 3);
    const Matrix b = oracle::random_matrix(3, 2, rng);
    const Matrix f = oracle::random_matrix(2, 10, rng);
    const Matrix y = one_hot(m) * b * f;
    const Vector market = oracle::random_matrix(10, 1, rng).col(0);
    FactorEstimate est;
    est.kind = FactorKind::observed;
    est.b = b;
    const auto w = evaluate_split(y, f, market, m, est, 6);
    EXPECT_NEAR(w.ins, 1.0, 1e-12);
    ASSERT_TRUE(w.oos.has_value());
    EXPECT_NEAR(*w.oos, 1.0, 1e-12);
    EXPECT_FALSE(evaluate_split(y, f, market, m, est, 10).oos.has_value());

    // Every fitted value equals the market return.
    Matrix f1 = market.transpose();
    FactorEstimate one;
    one.kind = FactorKind::observed;
    one.b = Matrix::Ones(3, 1);
    const Matrix noisy = oracle::random_matrix(5, 10, rng);
    const auto z = evaluate_split(noisy, f1, market, m, one, 5);
    EXPECT_NEAR(z.ins, 0.0, 1e-12);
    EXPECT_NEAR(*z.oos, 0.0, 1e-12);

    EXPECT_THROW(evaluate_split(y, f, market.head(9), m, est, 5), ShapeError);
    EXPECT_THROW(evaluate_split(y, f, market, m, est, 0), ShapeError);
}

TEST(EvaluateSplit, LatentFactorsFromCrossSections) {
    std::mt19937_64 rng(9);
    const Membership m({0, 1, 2, 0, 1, 2}, 3);
    const Matrix ub = lsvd(oracle::random_matrix(3, 2, rng), 2).matrix();
    const Matrix g = oracle::random_matrix(2, 8, rng);
    const Matrix y = one_hot(m) * ub * g;
    FactorEstimate est;
    est.kind = FactorKind::latent;
    est.u_b = ub;
    EXPECT_TRUE(window_factors(est, y, m, std::nullopt).isApprox(g, 1e-12));
    const Vector market = Vector::Zero(8);
    EXPECT_NEAR(evaluate_split(y, std::nullopt, market, m, est, 4).ins, 1.0, 1e-12);
}

TEST(EvaluateRolling, StationaryPanelHasOosNearIns) {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> n;
    const int p = 60, t = 120, r = 3, k = 2;
    std::vector<int> labels(p);
    for (int i = 0; i < p; ++i) labels[i] = i % r;
    const Membership m(labels, r);
    const Matrix b = oracle::random_matrix(r, k, rng) * 2.0;
    const Matrix f = oracle::random_matrix(k, t, rng);
    Matrix y = one_hot(m) * b * f;
    for (Eigen::Index i = 0; i < y.size(); ++i) y.data()[i] += 0.5 * n(rng);
    const Vector market = f.row(0).transpose();
    std::vector<std::string> dates;
    for (int s = 0; s < t; ++s) dates.push_back(std::to_string(2000 + s / 12));

    const auto windows = evaluate_rolling(y, f, market, m, FactorKind::observed, k, true, dates);
    ASSERT_EQ(windows.size(), 10u);
    EXPECT_FALSE(windows.back().oos.has_value());
    double ins = 0, oos = 0;
    for (std::size_t w = 0; w + 1 < windows.size(); ++w) {
        ins += windows[w].ins;
        oos += *windows[w].oos;
    }
    ins /= 9;
    oos /= 9;
    EXPECT_GT(ins, 0.5);
    EXPECT_NEAR(oos, ins, 0.05);
    EXPECT_LE(oos, ins + 0.01);

    dates.pop_back();
    EXPECT_THROW(evaluate_rolling(y, f, market, m, FactorKind::observed, k, true, dates), ShapeError);
}
