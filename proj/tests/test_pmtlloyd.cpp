#include "oracles.hpp"
#include "pmtc/errors.hpp"
#include "pmtc/pchooi.hpp"
#include "pmtc/pmtlloyd.hpp"
#include "pmtc/pmtsc.hpp"
#include "pmtc/simulate.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace pmtc;

namespace {

SimDesign design(std::uint64_t seed, double sigma) {
    SimDesign d;
    d.dims = {50, 40};
    d.periods = 15;
    d.ranks = {3, 4};
    d.num_factors = 2;
    d.mu_b = {1.0, 0.0};
    d.mu_f = {0.03, 0.03};
    d.sigma_x = d.sigma_y = sigma;
    d.seed = seed;
    return d;
}

Membership corrupt(const Membership& m, double fraction, std::mt19937_64& rng) {
    std::vector<int> g = m.labels();
    std::uniform_int_distribution<int> pick(0, m.num_clusters() - 1);
    const auto n = static_cast<std::size_t>(fraction * static_cast<double>(g.size()));
    for (std::size_t j = 0; j < n; ++j) g[j] = (g[j] + 1 + pick(rng) % (m.num_clusters() - 1)) % m.num_clusters();
    return {g, m.num_clusters()};
}

}  // namespace

TEST(Pmtlloyd, TruthIsAFixedPoint) {
    const auto sim = gen_pmtc(design(1, 0.0));
    const auto res = pmtlloyd(sim.data, sim.truth.memberships);
    EXPECT_EQ(res.trace.iterations_used, 1);
    EXPECT_TRUE(res.trace.converged);
    EXPECT_EQ(res.memberships, sim.truth.memberships);
}

TEST(Pmtlloyd, CentroidsEqualRescaledCentersWithoutNoise) {
    const auto sim = gen_pmtc(design(2, 0.0));
    const auto res = pmtlloyd(sim.data, sim.truth.memberships, {.max_iter = 1});
    const auto& c = res.trace.steps.at(1).centroids;
    const Matrix s0 = rescaled_core(sim.truth.core, sim.truth.memberships, 0);
    Matrix c0(s0.rows(), s0.cols() + sim.truth.s_y.cols());
    c0 << s0, sim.truth.s_y;
    EXPECT_LE((c[0] - c0).cwiseAbs().maxCoeff(), 1e-10 * c0.cwiseAbs().maxCoeff());
    const Matrix s1 = rescaled_core(sim.truth.core, sim.truth.memberships, 1);
    EXPECT_LE((c[1] - s1).cwiseAbs().maxCoeff(), 1e-10 * s1.cwiseAbs().maxCoeff());
}

TEST(Pmtlloyd, RecoversFromCorruptedStart) {
    std::mt19937_64 rng(3);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto sim = gen_pmtc(design(10 + seed, 0.0));
        std::vector<Membership> init;
        for (const auto& m : sim.truth.memberships) init.push_back(corrupt(m, 0.1, rng));
        const auto res = pmtlloyd(sim.data, init);
        EXPECT_LE(res.trace.iterations_used, recovery_iterations(50));
        for (std::size_t i = 0; i < 2; ++i) EXPECT_EQ(cer(res.memberships[i], sim.truth.memberships[i]).rate, 0.0);
    }
}

TEST(Pmtlloyd, ModeOneCriterionSplitsIntoBlocks) {
    const auto sim = gen_pmtc(design(4, 1.0));
    std::mt19937_64 rng(4);
    std::vector<Membership> init;
    for (const auto& m : sim.truth.memberships) init.push_back(corrupt(m, 0.2, rng));
    const double omega = 0.7;
    const auto res = pmtlloyd(sim.data, init, {.max_iter = 1, .omega = omega});
    const Matrix w1 = normalized_basis(init[1]).matrix();
    const Matrix gx = matricize(mode_product(sim.data.x, 1, Matrix(w1.transpose())), 0);
    const Matrix p0 = projector(init[0]);
    const Matrix cx = p0.transpose() * gx;
    const Matrix cy = p0.transpose() * sim.data.y;
    for (Eigen::Index j = 0; j < gx.rows(); ++j) {
        int best = -1;
        double best_d = 1e300;
        for (Eigen::Index a = 0; a < cx.rows(); ++a) {
            const double dist = omega * (gx.row(j) - cx.row(a)).squaredNorm() + (sim.data.y.row(j) - cy.row(a)).squaredNorm();
            if (dist < best_d) {
                best_d = dist;
                best = static_cast<int>(a);
            }
        }
        EXPECT_EQ(res.trace.steps[1].memberships[0][static_cast<std::size_t>(j)], best);
    }
}

TEST(Pmtlloyd, ObliqueUsesClusterMeansOnOtherModes) {
    const auto sim = gen_pmtc(design(5, 1.0));
    std::mt19937_64 rng(5);
    std::vector<Membership> init;
    for (const auto& m : sim.truth.memberships) init.push_back(corrupt(m, 0.2, rng));
    const auto res = pmtlloyd(sim.data, init, {.max_iter = 1, .projection = Projection::oblique});
    const Matrix p0 = projector(init[0]);
    const Matrix z = matricize(mode_product(sim.data.x, 0, Matrix(p0.transpose())), 1);
    const Matrix c = projector(init[1]).transpose() * z;
    EXPECT_EQ(res.trace.steps[1].memberships[1], nns(z, c));
}

TEST(Pmtlloyd, SimultaneousAndSequentialSchedules) {
    const auto sim = gen_pmtc(design(6, 1.0));
    std::mt19937_64 rng(6);
    std::vector<Membership> init;
    for (const auto& m : sim.truth.memberships) init.push_back(corrupt(m, 0.3, rng));
    const auto seq = pmtlloyd(sim.data, init, {.max_iter = 1, .schedule = UpdateSchedule::sequential});
    const auto& new0 = seq.trace.steps[1].memberships[0];
    const Matrix z = matricize(mode_product(sim.data.x, 0, Matrix(normalized_basis(new0).matrix().transpose())), 1);
    EXPECT_EQ(seq.trace.steps[1].memberships[1], nns(z, cluster_means(z, init[1])));
}

TEST(Pmtlloyd, LossRecordedAndMostlyDecreasing) {
    const auto sim = gen_pmtc(design(7, 1.0));
    const std::vector<int> r{3, 4};
    const std::vector<Eigen::Index> m{3, 4};
    const auto init = pmtsc(sim.data, r, pchooi(sim.data, m).bases);
    const auto res = pmtlloyd(sim.data, init.memberships);
    ASSERT_EQ(res.trace.steps.size(), static_cast<std::size_t>(res.trace.iterations_used) + 1);
    for (std::size_t k = 2; k < res.trace.steps.size(); ++k) {
        EXPECT_LE(res.trace.steps[k].loss, res.trace.steps[k - 1].loss * (1 + 1e-12));
    }
    EXPECT_NEAR(res.trace.steps.back().loss, coupled_loss(sim.data, res.memberships, 1.0, Source::coupled), 1e-9);
}

TEST(CoupledLoss, MatchesDirectResidual) {
    const auto sim = gen_pmtc(design(8, 1.0));
    const auto& ms = sim.truth.memberships;
    DenseTensor fit = sim.data.x;
    for (std::size_t i = 0; i < 2; ++i) fit = mode_product(fit, i, Matrix(one_hot(ms[i]) * projector(ms[i]).transpose()));
    double rx = 0.0;
    for (std::size_t k = 0; k < fit.size(); ++k) rx += std::pow(sim.data.x.data()[k] - fit.data()[k], 2);
    const Matrix y_fit = one_hot(ms[0]) * cluster_means(sim.data.y, ms[0]);
    const double ry = (sim.data.y - y_fit).squaredNorm();
    EXPECT_NEAR(coupled_loss(sim.data, ms, 2.0, Source::coupled), 2.0 * rx + ry, 1e-8 * (rx + ry));
    EXPECT_NEAR(coupled_loss(sim.data, ms, 1.0, Source::tensor_only), rx, 1e-8 * rx);
}

TEST(Pmtlloyd, RepairsEmptyInitialClusters) {
    const auto sim = gen_pmtc(design(9, 0.0));
    auto init = sim.truth.memberships;
    std::vector<int> g = init[0].labels();
    for (auto& v : g) v = v == 2 ? 1 : v;
    init[0] = Membership(g, 3);
    const auto res = pmtlloyd(sim.data, init);
    EXPECT_FALSE(res.trace.steps[0].memberships[0].has_empty_cluster());
    for (const auto& m : res.memberships) EXPECT_FALSE(m.has_empty_cluster());
}

TEST(FillEmptyClusters, FarthestDonor) {
    const Membership m({0, 0, 0, 1}, 3);
    Vector d(4);
    d << 0.1, 5.0, 0.2, 9.0;  // entity 3 is alone in its cluster
    EXPECT_EQ(fill_empty_clusters(m, d).labels(), (std::vector<int>{0, 2, 0, 1}));
}

TEST(Pmtlloyd, Errors) {
    const auto sim = gen_pmtc(design(10, 1.0));
    EXPECT_THROW(pmtlloyd(sim.data, sim.truth.memberships, {.max_iter = 0}), std::invalid_argument);
    EXPECT_THROW(pmtlloyd(sim.data, {sim.truth.memberships[0]}), ShapeError);
    EXPECT_THROW(pmtlloyd(sim.data, {sim.truth.memberships[1], sim.truth.memberships[0]}), ShapeError);
}

TEST(RecoveryIterations, TwiceCeilLog) {
    EXPECT_EQ(recovery_iterations(100), 10);
    EXPECT_EQ(recovery_iterations(200), 12);
    EXPECT_EQ(recovery_iterations(50), 8);
}
