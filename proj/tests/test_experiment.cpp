#include "pmtc/experiment.hpp"
#include "pmtc/factors.hpp"
#include "pmtc/metrics.hpp"
#include "pmtc/pchooi.hpp"
#include "pmtc/pmtsc.hpp"

#include <gtest/gtest.h>

#include <cstring>
#include <map>
#include <set>

using namespace pmtc;

namespace {

SimDesign small_design(double gamma_y) {
    SimDesign d;
    d.dims = {30, 25};
    d.periods = 15;
    d.ranks = {3, 2};
    d.num_factors = 2;
    d.mu_b = {1.0, 0.0};
    d.mu_f = {0.03, 0.03};
    d.gamma_x = -0.3;
    d.gamma_y = gamma_y;
    return d;
}

ExperimentSpec small_spec(int reps) {
    ExperimentSpec spec;
    spec.scenarios = {{"gy", "gamma_y", {{-0.2, small_design(-0.2)}, {0.1, small_design(0.1)}}}};
    spec.methods = parse_methods("Y:SC,X:HSC+HLloyd,X+Y:PMTSC,X+Y:PMTSC+PMTLloyd,PCHOOI,HOOI,SVD-Y,No-clustering");
    spec.replications = reps;
    spec.seed = 11;
    spec.settings.kmeans_restarts = 3;
    return spec;
}

bool same(const std::vector<ResultRow>& a, const std::vector<ResultRow>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].experiment_id != b[i].experiment_id || a[i].method != b[i].method ||
            a[i].replication != b[i].replication || a[i].mode != b[i].mode || a[i].metric != b[i].metric ||
            std::memcmp(&a[i].value, &b[i].value, sizeof(double)) != 0) {
            return false;
        }
    }
    return true;
}

}  // namespace

TEST(Methods, NamesRoundTrip) {
    for (const char* name : {"Y:SC", "X:HSC", "X:HSC+HLloyd", "X:HSC+PMTLloyd", "X+Y:PMTSC", "X+Y:PMTSC+HLloyd",
                             "X+Y:PMTSC+PMTLloyd", "PCHOOI", "HOOI", "SVD-Y", "No-clustering"}) {
        EXPECT_EQ(method_name(parse_method(name)), name);
    }
}

TEST(Methods, UnknownNameThrows) {
    EXPECT_THROW(parse_method("X+Y:Lloyd"), std::invalid_argument);
    EXPECT_THROW(parse_methods("Y:SC, bogus"), std::invalid_argument);
    EXPECT_THROW(parse_methods(" , "), std::invalid_argument);
    EXPECT_EQ(parse_methods(" Y:SC , HOOI ").size(), 2u);
}

TEST(Methods, IncompatibleDesignsRejected) {
    EXPECT_THROW(check_methods(BlockDesign{}, {Method::y_sc}), std::invalid_argument);
    EXPECT_THROW(check_methods(TuckerDesign{}, {Method::xy_pmtsc}), std::invalid_argument);
    EXPECT_NO_THROW(check_methods(BlockDesign{}, {Method::x_hsc_hlloyd, Method::hooi}));
    EXPECT_NO_THROW(check_methods(TuckerDesign{}, {Method::pchooi, Method::hooi, Method::svd_y}));
}

TEST(Experiment, ExperimentIdFormat) {
    Scenario s{"fig2-left", "gamma_y", {}};
    EXPECT_EQ(experiment_id(s, {-0.45, SimDesign{}}), "fig2-left@gamma_y=-0.45");
    EXPECT_EQ(experiment_id(s, {0.1, SimDesign{}}), "fig2-left@gamma_y=0.1");
}

TEST(Experiment, SingleReplicationIsDeterministic) {
    const auto spec = small_spec(1);
    const auto a = run_experiment(spec, 1);
    const auto b = run_experiment(spec, 1);
    ASSERT_FALSE(a.empty());
    EXPECT_TRUE(same(a, b));
}

TEST(Experiment, ThreadCountDoesNotChangeRows) {
    const auto spec = small_spec(3);
    const auto one = run_experiment(spec, 1);
    EXPECT_TRUE(same(one, run_experiment(spec, 2)));
    EXPECT_TRUE(same(one, run_experiment(spec, 5)));
}

TEST(Experiment, RowsOrderedByPointReplicationMethod) {
    const auto spec = small_spec(2);
    const auto rows = run_experiment(spec, 2);
    std::vector<std::string> expected_methods;
    for (Method m : spec.methods) expected_methods.emplace_back(method_name(m));
    std::size_t i = 0;
    for (const auto& point : spec.scenarios[0].points) {
        const auto id = experiment_id(spec.scenarios[0], point);
        for (int rep = 0; rep < 2; ++rep) {
            std::size_t method_index = 0;
            for (; i < rows.size() && rows[i].experiment_id == id && rows[i].replication == rep; ++i) {
                while (method_index < expected_methods.size() && rows[i].method != expected_methods[method_index]) {
                    ++method_index;
                }
                ASSERT_LT(method_index, expected_methods.size());
            }
        }
    }
    EXPECT_EQ(i, rows.size());
}

TEST(Experiment, ReplicationMatchesDirectComputation) {
    const auto spec = small_spec(1);
    const auto& point = spec.scenarios[0].points[1];
    const auto rows = run_replication("id", point, {Method::y_sc, Method::svd_y}, 4, 100, spec.settings);

    auto d = std::get<SimDesign>(point.design);
    d.seed = 104;
    const auto sim = gen_pmtc(d);
    KmeansOptions k;
    k.restarts = spec.settings.kmeans_restarts;
    k.seed = 104;
    const auto sc = spectral_clustering(sim.data.y, 3, k);
    const auto u = outcome_svd(sim.data.y, 3);

    std::map<std::pair<std::string, std::string>, double> got;
    for (const auto& r : rows) {
        EXPECT_EQ(r.replication, 4);
        got[{r.method, r.metric}] = r.value;
    }
    EXPECT_EQ(got.at({"Y:SC", "cer"}), cer(sc.membership, sim.truth.memberships[0]).rate);
    EXPECT_EQ(got.at({"SVD-Y", "subspace_distance"}), subspace_distance(u, sim.truth.bases[0]));
    const auto est = estimate_observed(sim.data.y, sc.membership, sim.truth.f);
    const Matrix truth_beta = one_hot(sim.truth.memberships[0]) * sim.truth.b;
    EXPECT_NEAR(got.at({"Y:SC", "loading_error_observed"}),
                (per_asset_loadings(est, sc.membership) - truth_beta).norm(), 1e-12);
}

TEST(Experiment, MetricCoverage) {
    const auto rows = run_experiment(small_spec(1), 1);
    std::set<std::tuple<std::string, std::string, int>> seen;
    for (const auto& r : rows) seen.insert({r.method, r.metric, r.mode});
    for (const char* m : {"X:HSC+HLloyd", "X+Y:PMTSC", "X+Y:PMTSC+PMTLloyd"}) {
        for (int mode : {1, 2}) {
            EXPECT_TRUE(seen.count({m, "cer", mode})) << m;
            EXPECT_TRUE(seen.count({m, "misclustering_loss", mode})) << m;
        }
        EXPECT_TRUE(seen.count({m, "loading_error_observed", 1})) << m;
        EXPECT_TRUE(seen.count({m, "loading_error_latent", 1})) << m;
        EXPECT_TRUE(seen.count({m, "group_loading_error", 1})) << m;
    }
    EXPECT_TRUE(seen.count({"Y:SC", "cer", 1}));
    EXPECT_FALSE(seen.count({"Y:SC", "cer", 2}));
    EXPECT_TRUE(seen.count({"X+Y:PMTSC+PMTLloyd", "iterations", 0}));
    EXPECT_TRUE(seen.count({"PCHOOI", "subspace_distance", 2}));
    EXPECT_TRUE(seen.count({"No-clustering", "loading_error_observed", 1}));
    EXPECT_TRUE(seen.count({"No-clustering", "loading_error_latent", 1}));
    for (const auto& r : rows) {
        if (r.metric == "cer") {
            EXPECT_GE(r.value, 0.0);
            EXPECT_LE(r.value, 1.0);
        }
    }
}

TEST(Experiment, SummaryEqualsAverageOfRows) {
    const auto spec = small_spec(3);
    const auto rows = run_experiment(spec, 1);
    const auto table = summarize(spec, rows, {"p.csv", "gy", "cer", 1});
    ASSERT_EQ(table.x.size(), 2u);
    // Methods without a mode-1 CER drop out.
    EXPECT_EQ(table.methods, (std::vector<std::string>{"Y:SC", "X:HSC+HLloyd", "X+Y:PMTSC", "X+Y:PMTSC+PMTLloyd"}));
    for (std::size_t p = 0; p < 2; ++p) {
        const auto id = experiment_id(spec.scenarios[0], spec.scenarios[0].points[p]);
        for (std::size_t m = 0; m < table.methods.size(); ++m) {
            double sum = 0;
            int n = 0;
            for (const auto& r : rows) {
                if (r.experiment_id == id && r.method == table.methods[m] && r.metric == "cer" && r.mode == 1) {
                    sum += r.value;
                    ++n;
                }
            }
            ASSERT_EQ(n, 3);
            ASSERT_TRUE(table.means[p][m].has_value());
            EXPECT_DOUBLE_EQ(*table.means[p][m], sum / n);
        }
    }
    EXPECT_THROW(summarize(spec, rows, {"q.csv", "nope", "cer", 1}), std::invalid_argument);
}

TEST(Experiment, BlockAndTuckerDesignsRun) {
    ExperimentSpec spec;
    BlockDesign block;
    block.dim = 20;
    block.clusters = 2;
    block.signal_sd = 3.0;
    TuckerDesign tucker;
    tucker.dims = {20, 18};
    tucker.periods = 12;
    tucker.ranks = {3, 3};
    spec.scenarios = {{"block", "signal_sd", {{3.0, block}}}};
    spec.methods = parse_methods("X:HSC,X:HSC+HLloyd,X:HSC+PMTLloyd,HOOI");
    spec.replications = 2;
    const auto rows = run_experiment(spec, 2);
    int cer_rows = 0;
    for (const auto& r : rows) cer_rows += r.metric == "cer";
    EXPECT_EQ(cer_rows, 2 * 3 * 3);

    spec.scenarios = {{"tucker", "log_c_y", {{2.0, tucker}}}};
    spec.methods = parse_methods("PCHOOI,HOOI,SVD-Y");
    const auto t = run_experiment(spec, 1);
    // PCHOOI and HOOI: two distances and an iteration count each; SVD-Y: one.
    EXPECT_EQ(t.size(), 2u * (3 + 3 + 1));
}

TEST(Experiment, InvalidReplicationsThrow) {
    auto spec = small_spec(0);
    EXPECT_THROW(run_experiment(spec, 1), std::invalid_argument);
}
