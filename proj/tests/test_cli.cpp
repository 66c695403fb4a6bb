#include "cli.hpp"
#include "pmtc/io.hpp"
#include "pmtc/metrics.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;
using namespace pmtc;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run pmtc_cli(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("pmtc_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }
    std::string at(const std::string& name) const { return (dir_ / name).string(); }

    fs::path dir_;
};

const std::vector<std::string> kSmall{"--override", "p=30", "--override", "T=16", "--override", "r=3",
                                      "--override", "m=2"};

}  // namespace

TEST_F(CliTest, Fig2SmokeEmitsFourPanels) {
    auto args = std::vector<std::string>{"simulate", "--preset", "fig2", "--reps", "2", "--threads", "2", "--out", at("o")};
    args.insert(args.end(), kSmall.begin(), kSmall.end());
    const auto r = pmtc_cli(args);
    ASSERT_EQ(r.code, 0) << r.err;
    for (const char* f : {"fig2-cer1-gy.csv", "fig2-cer1-gx.csv", "fig2-cer2-gy.csv", "fig2-cer2-gx.csv"}) {
        const auto t = read_csv(dir_ / "o" / f);
        // Y:SC clusters mode 1 only.
        EXPECT_EQ(t.header.size(), std::string(f).find("cer1") != std::string::npos ? 7u : 6u) << f;
        EXPECT_FALSE(t.rows.empty());
    }
    EXPECT_TRUE(fs::exists(dir_ / "o" / "results.csv"));
    EXPECT_NE(r.out.find("X+Y:PMTSC+PMTLloyd"), std::string::npos);
    EXPECT_EQ(r.out.find("pmtc simulate:"), std::string::npos);  // diagnostics stay on stderr
    EXPECT_NE(r.err.find("pmtc simulate:"), std::string::npos);

    const auto manifest = slurp(dir_ / "o" / "manifest.json");
    for (const char* k : {"\"config_hash\"", "\"version\"", "\"seed\"", "\"design.p\": \"30\""}) {
        EXPECT_NE(manifest.find(k), std::string::npos) << k;
    }
}

TEST_F(CliTest, PanelMeansMatchResultRows) {
    auto args = std::vector<std::string>{"simulate", "--preset", "fig2", "--reps", "2", "--threads", "1", "--out", at("o"),
                                         "--override", "scenario.gy.values=-0.2,0"};
    args.insert(args.end(), kSmall.begin(), kSmall.end());
    ASSERT_EQ(pmtc_cli(args).code, 0);
    const auto rows = read_results_csv(dir_ / "o" / "results.csv");
    const auto panel = read_csv(dir_ / "o" / "fig2-cer1-gy.csv");
    ASSERT_EQ(panel.rows.size(), 2u);
    for (const auto& prow : panel.rows) {
        for (std::size_t c = 1; c < panel.header.size(); ++c) {
            double sum = 0;
            int n = 0;
            for (const auto& r : rows) {
                if (r.experiment_id == "gy@gamma_y=" + prow[0] && r.method == panel.header[c] && r.metric == "cer" &&
                    r.mode == 1) {
                    sum += r.value;
                    ++n;
                }
            }
            ASSERT_EQ(n, 2);
            EXPECT_DOUBLE_EQ(parse_double(prow[c]), sum / n);
        }
    }
}

TEST_F(CliTest, ManifestRerunIsByteIdentical) {
    auto args = std::vector<std::string>{"simulate", "--preset", "fig2", "--reps", "2", "--threads", "1", "--out", at("a"),
                                         "--override", "scenario.gx.values=-0.5", "--override", "scenario.gy.values=0"};
    args.insert(args.end(), kSmall.begin(), kSmall.end());
    ASSERT_EQ(pmtc_cli(args).code, 0);
    ASSERT_EQ(pmtc_cli({"simulate", "--config", at("a/manifest.json"), "--threads", "3", "--out", at("b")}).code, 0);
    for (const auto& entry : fs::directory_iterator(dir_ / "a")) {
        if (entry.path().extension() != ".csv") continue;
        EXPECT_EQ(slurp(entry.path()), slurp(dir_ / "b" / entry.path().filename())) << entry.path();
    }
}

TEST_F(CliTest, FigA1ImbalancedHasLloydColumns) {
    const auto r = pmtc_cli({"simulate", "--preset", "figA1", "--reps", "1", "--out", at("o"), "--override",
                             "scenario.imbalanced15.p=30", "--override", "scenario.imbalanced15.values=0.3",
                             "--override", "scenario.imbalanced25.p=30", "--override",
                             "scenario.imbalanced25.values=0.3", "--override", "scenario.balanced80.p=30",
                             "--override", "scenario.balanced80.values=0.5", "--override",
                             "scenario.balanced100.p=30", "--override", "scenario.balanced100.values=0.5"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto t = read_csv(dir_ / "o" / "figA1-cer-imbalanced15.csv");
    EXPECT_EQ(t.header, (std::vector<std::string>{"signal_sd", "X:HSC", "X:HSC+HLloyd", "X:HSC+PMTLloyd"}));
}

TEST_F(CliTest, ExitCodes) {
    EXPECT_EQ(pmtc_cli({"simulate", "--preset", "fig2", "--override", "design.zeta=1", "--out", at("x")}).code, 2);
    EXPECT_EQ(pmtc_cli({"simulate", "--preset", "fig9"}).code, 2);
    EXPECT_EQ(pmtc_cli({"simulate"}).code, 2);
    EXPECT_EQ(pmtc_cli({"simulate", "--no-such-flag"}).code, 2);
    EXPECT_EQ(pmtc_cli({}).code, 2);
    EXPECT_EQ(pmtc_cli({"simulate", "--preset", "fig2", "--override", "p=3", "--out", at("x")}).code, 3);
    EXPECT_EQ(pmtc_cli({"fit", "--tensor", at("none.pmtc"), "--returns", at("none.csv"), "--ranks", "2,2",
                        "--factors-latent", "1"})
                  .code,
              5);
    EXPECT_EQ(pmtc_cli({"presets"}).code, 0);
    EXPECT_EQ(pmtc_cli({"--help"}).code, 0);
    const auto s = pmtc_cli({"schema"});
    EXPECT_EQ(s.code, 0);
    EXPECT_NE(s.out.find("gamma_y"), std::string::npos);
}

TEST_F(CliTest, GenerateFitEvalPipeline) {
    auto g = pmtc_cli({"generate", "--out", at("g"), "--seed", "3", "--override", "p=40", "--override", "T=30",
                       "--override", "r=3", "--override", "m=2", "--override", "gamma_x=0.3", "--override",
                       "gamma_y=0.3"});
    ASSERT_EQ(g.code, 0) << g.err;
    auto f = pmtc_cli({"fit", "--tensor", at("g/tensor.pmtc"), "--returns", at("g/returns.csv"), "--factors",
                       at("g/factors.csv"), "--factors-observed", "--ranks", "3,3", "--split-index", "20", "--out",
                       at("f")});
    ASSERT_EQ(f.code, 0) << f.err;
    for (int i = 1; i <= 2; ++i) {
        const auto name = "_mode" + std::to_string(i) + ".csv";
        const auto est = read_membership_csv(dir_ / "f" / ("memberships" + name));
        const auto truth = read_membership_csv(dir_ / "g" / ("truth" + name));
        EXPECT_EQ(cer(est, truth).rate, 0.0);
    }
    EXPECT_EQ(read_loadings_csv(dir_ / "f" / "loadings.csv").rows(), 3);
    EXPECT_EQ(read_matrix_csv(dir_ / "f" / "asset_loadings.csv").rows(), 40);

    auto e = pmtc_cli({"eval", "--fit", at("f"), "--returns", at("g/returns.csv"), "--factors", at("g/factors.csv"),
                       "--market", at("g/market.csv"), "--out", at("e")});
    ASSERT_EQ(e.code, 0) << e.err;
    const auto r2 = read_csv(dir_ / "e" / "r2.csv");
    ASSERT_EQ(r2.rows.size(), 1u);
    EXPECT_EQ(r2.rows[0][0], "split@20");
    EXPECT_GT(parse_double(r2.rows[0][2]), 50.0);

    // Returns of the wrong height.
    EXPECT_EQ(pmtc_cli({"fit", "--tensor", at("g/tensor.pmtc"), "--returns", at("g/factors.csv"), "--factors-latent",
                        "1", "--ranks", "3,3", "--out", at("bad")})
                  .code,
              4);
    EXPECT_EQ(pmtc_cli({"fit", "--tensor", at("g/tensor.pmtc"), "--returns", at("g/returns.csv"), "--factors-latent",
                        "1", "--ranks", "3", "--out", at("bad")})
                  .code,
              4);
    EXPECT_EQ(pmtc_cli({"fit", "--tensor", at("g/tensor.pmtc"), "--returns", at("g/returns.csv"), "--ranks", "3,3"}).code,
              2);
}

TEST_F(CliTest, OneGroupFit) {
    ASSERT_EQ(pmtc_cli({"generate", "--out", at("g"), "--override", "p=20", "--override", "T=12", "--override", "r=2",
                        "--override", "m=1"})
                  .code,
              0);
    const auto f = pmtc_cli({"fit", "--tensor", at("g/tensor.pmtc"), "--returns", at("g/returns.csv"), "--factors",
                             at("g/factors.csv"), "--factors-observed", "--ranks", "1,2", "--rank-normalize", "--out",
                             at("f")});
    ASSERT_EQ(f.code, 0) << f.err;
    const auto m = read_membership_csv(dir_ / "f" / "memberships_mode1.csv");
    EXPECT_EQ(m.num_clusters(), 1);
    EXPECT_EQ(read_loadings_csv(dir_ / "f" / "loadings.csv").rows(), 1);
}

TEST_F(CliTest, RollingEval) {
    ASSERT_EQ(pmtc_cli({"generate", "--out", at("g"), "--override", "p=30", "--override", "T=36", "--override", "r=2",
                        "--override", "m=2", "--override", "gamma_x=0.3", "--override", "gamma_y=0.3"})
                  .code,
              0);
    ASSERT_EQ(pmtc_cli({"fit", "--tensor", at("g/tensor.pmtc"), "--returns", at("g/returns.csv"), "--factors-latent",
                        "2", "--ranks", "2,2", "--out", at("f")})
                  .code,
              0);
    {
        std::ofstream d(at("dates.csv"));
        d << "year\n";
        for (int t = 0; t < 36; ++t) d << 2000 + t / 12 << "\n";
    }
    const auto e = pmtc_cli({"eval", "--fit", at("f"), "--returns", at("g/returns.csv"), "--market", at("g/market.csv"),
                             "--split", "rolling", "--dates", at("dates.csv")});
    ASSERT_EQ(e.code, 0) << e.err;
    EXPECT_NE(e.out.find("average"), std::string::npos);
    EXPECT_NE(e.out.find("2001"), std::string::npos);
    EXPECT_EQ(pmtc_cli({"eval", "--fit", at("f"), "--returns", at("g/returns.csv"), "--market", at("g/market.csv"),
                        "--split", "rolling"})
                  .code,
              2);
}
