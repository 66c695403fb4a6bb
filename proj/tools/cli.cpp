#include "cli.hpp"

#include "pmtc/config.hpp"
#include "pmtc/errors.hpp"
#include "pmtc/evaluate.hpp"
#include "pmtc/io.hpp"
#include "pmtc/metrics.hpp"
#include "pmtc/simulate.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <thread>

#ifndef PMTC_VERSION
#define PMTC_VERSION "unknown"
#endif

namespace pmtc::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct SimulateArgs {
    std::string config;
    std::string preset;
    std::string out = "pmtc-out";
    std::optional<std::uint64_t> seed;
    std::optional<int> reps;
    std::optional<std::string> methods;
    int threads = 0;
    std::vector<std::string> overrides;
};

struct FitArgs {
    std::string tensor;
    std::string returns;
    std::string factors;
    std::string ranks;
    std::string out = "pmtc-fit";
    double omega = 1.0;
    bool observed = false;
    std::optional<int> latent;
    std::string demean = "on";
    bool rank_normalize = false;
    std::optional<std::size_t> split_index;
    std::uint64_t seed = 0;
    std::optional<int> lloyd_iters;
    int kmeans_restarts = 10;
    std::string schedule = "simultaneous";
};

struct EvalArgs {
    std::string fit;
    std::string returns;
    std::string factors;
    std::string market;
    std::string split = "index";
    std::optional<std::size_t> split_index;
    std::string dates;
    std::string out;
};

std::string hash_hex(std::uint64_t h) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "fnv1a64:%016llx", static_cast<unsigned long long>(h));
    return buf;
}

json config_json(const ConfigMap& config) {
    json j = json::object();
    for (const auto& [k, v] : config) j[k] = v;
    return j;
}

void write_json(const fs::path& path, const json& j) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << j.dump(2) << '\n';
    if (!out) throw IoError("write to " + path.string() + " failed");
}

json read_json(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string() + " for reading");
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw IoError(path.string() + ": " + e.what());
    }
}

void make_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
}

std::vector<int> parse_ranks(const std::string& text) {
    std::vector<int> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            const int r = std::stoi(item, &used);
            if (used != item.size() || r < 1) throw std::invalid_argument("");
            out.push_back(r);
        } catch (const std::exception&) {
            throw ConfigError("--ranks expects positive integers like 5,5; got '" + text + "'");
        }
    }
    if (out.empty()) throw ConfigError("--ranks is empty");
    return out;
}

Vector read_series(const fs::path& path) {
    const Matrix m = read_matrix_csv(path);
    if (m.cols() == 1) return m.col(0);
    if (m.rows() == 1) return m.row(0).transpose();
    throw ShapeError(path.string() + ": expected a single row or column, got " + std::to_string(m.rows()) + "x" +
                     std::to_string(m.cols()));
}

std::string fixed(double v, int digits) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(digits) << v;
    return s.str();
}

void print_table(std::ostream& out, const std::vector<std::string>& header,
                 const std::vector<std::vector<std::string>>& rows) {
    std::vector<std::size_t> width(header.size());
    for (std::size_t c = 0; c < header.size(); ++c) width[c] = header[c].size();
    for (const auto& r : rows) {
        for (std::size_t c = 0; c < r.size() && c < width.size(); ++c) width[c] = std::max(width[c], r[c].size());
    }
    const auto line = [&](const std::vector<std::string>& r) {
        for (std::size_t c = 0; c < r.size(); ++c) {
            out << (c ? "  " : "") << std::setw(static_cast<int>(width[c])) << r[c];
        }
        out << '\n';
    };
    line(header);
    for (const auto& r : rows) line(r);
}

// simulate

ConfigMap assemble_config(const SimulateArgs& a) {
    ConfigMap config;
    if (!a.preset.empty()) config = preset(a.preset);
    if (!a.config.empty()) {
        for (const auto& [k, v] : parse_config_file(a.config)) config[k] = v;
    }
    config = resolve_presets(config);
    for (const auto& o : a.overrides) apply_override(config, o);
    if (a.seed) config["run.seed"] = std::to_string(*a.seed);
    if (a.reps) config["run.replications"] = std::to_string(*a.reps);
    if (a.methods) config["run.methods"] = *a.methods;
    return config;
}

// Generating replication 0 of every grid point surfaces infeasible designs
// before any fitting starts.
void preflight(const ExperimentSpec& spec) {
    for (const auto& scenario : spec.scenarios) {
        for (const auto& point : scenario.points) {
            std::visit(
                [&](auto d) {
                    d.seed = spec.seed;
                    if constexpr (std::is_same_v<decltype(d), SimDesign>) {
                        gen_pmtc(d);
                    } else if constexpr (std::is_same_v<decltype(d), TuckerDesign>) {
                        gen_tucker(d);
                    } else {
                        gen_tensor_block(d);
                    }
                },
                point.design);
        }
    }
}

int cmd_simulate(const SimulateArgs& a, std::ostream& out, std::ostream& err) {
    if (a.preset.empty() && a.config.empty()) throw ConfigError("simulate needs --preset or --config");
    const auto config = assemble_config(a);
    const auto plan = build_plan(config);
    preflight(plan.spec);

    const int threads = a.threads > 0 ? a.threads : std::max(1, static_cast<int>(std::thread::hardware_concurrency()));
    std::size_t points = 0;
    for (const auto& s : plan.spec.scenarios) points += s.points.size();
    err << "pmtc simulate: " << points << " grid points x " << plan.spec.replications << " replications on " << threads
        << " thread(s)\n";
    const auto start = std::chrono::steady_clock::now();
    const auto rows = run_experiment(plan.spec, threads);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    err << "pmtc simulate: " << rows.size() << " result rows in " << fixed(seconds, 1) << " s\n";

    const fs::path dir(a.out);
    make_dir(dir);
    std::vector<std::string> outputs{"results.csv"};
    write_results_csv(dir / "results.csv", rows);
    for (const auto& panel : plan.panels) {
        const auto table = summarize(plan.spec, rows, panel);
        write_panel_csv(dir / panel.file, table, plan.x_names.at(panel.scenario));
        outputs.push_back(panel.file);

        out << panel.file << "  (" << panel.metric << ", mode " << panel.mode << ")\n";
        std::vector<std::string> header{plan.x_names.at(panel.scenario)};
        header.insert(header.end(), table.methods.begin(), table.methods.end());
        std::vector<std::vector<std::string>> body;
        for (std::size_t p = 0; p < table.x.size(); ++p) {
            std::vector<std::string> r{format_double(table.x[p])};
            for (const auto& v : table.means[p]) r.push_back(v ? fixed(*v, 4) : "-");
            body.push_back(std::move(r));
        }
        print_table(out, header, body);
        out << '\n';
    }
    if (plan.panels.empty()) {
        std::map<std::tuple<std::string, std::string, std::string, int>, std::pair<double, int>> acc;
        std::vector<std::tuple<std::string, std::string, std::string, int>> order;
        for (const auto& r : rows) {
            const auto key = std::make_tuple(r.experiment_id, r.method, r.metric, r.mode);
            auto [it, fresh] = acc.try_emplace(key, 0.0, 0);
            if (fresh) order.push_back(key);
            it->second.first += r.value;
            ++it->second.second;
        }
        std::vector<std::vector<std::string>> body;
        for (const auto& key : order) {
            const auto& [sum, n] = acc.at(key);
            body.push_back({std::get<0>(key), std::get<1>(key), std::get<2>(key), std::to_string(std::get<3>(key)),
                            fixed(sum / n, 4)});
        }
        print_table(out, {"experiment", "method", "metric", "mode", "mean"}, body);
    }

    json manifest{{"tool", "pmtc"},
                  {"version", PMTC_VERSION},
                  {"command", "simulate"},
                  {"seed", plan.spec.seed},
                  {"replications", plan.spec.replications},
                  {"threads", threads},
                  {"config_hash", hash_hex(fnv1a64(canonical_text(config)))},
                  {"config", config_json(config)},
                  {"outputs", outputs}};
    write_json(dir / "manifest.json", manifest);
    err << "pmtc simulate: wrote " << outputs.size() << " CSV file(s) and manifest.json to " << dir.string() << '\n';
    return ok;
}

// generate

int cmd_generate(const SimulateArgs& a, std::ostream& out, std::ostream& err) {
    ConfigMap config;
    if (!a.preset.empty()) config = preset(a.preset);
    if (!a.config.empty()) {
        for (const auto& [k, v] : parse_config_file(a.config)) config[k] = v;
    }
    config = resolve_presets(config);
    for (const auto& o : a.overrides) apply_override(config, o);
    if (a.seed) config["run.seed"] = std::to_string(*a.seed);
    // Only the design and seed matter here.
    ConfigMap used;
    for (const auto& [k, v] : config) {
        if (k.rfind("design.", 0) == 0 || k == "run.seed") used[k] = v;
    }
    const Design design = build_design(used);
    const std::uint64_t seed = used.count("run.seed") ? std::stoull(used.at("run.seed")) : 0;

    const auto sim = std::visit(
        [seed](auto d) {
            d.seed = seed;
            if constexpr (std::is_same_v<decltype(d), SimDesign>) {
                return gen_pmtc(d);
            } else if constexpr (std::is_same_v<decltype(d), TuckerDesign>) {
                return gen_tucker(d);
            } else {
                return gen_tensor_block(d);
            }
        },
        design);

    const fs::path dir(a.out);
    make_dir(dir);
    std::vector<std::string> outputs{"tensor.pmtc"};
    write_tensor(dir / "tensor.pmtc", sim.data.x);
    if (sim.data.y.size() > 0) {
        write_matrix_csv(dir / "returns.csv", sim.data.y);
        outputs.push_back("returns.csv");
    }
    if (sim.truth.f.size() > 0) {
        write_matrix_csv(dir / "factors.csv", sim.truth.f);
        write_matrix_csv(dir / "market.csv", sim.truth.f.row(0).transpose());
        write_loadings_csv(dir / "truth_loadings.csv", sim.truth.b);
        outputs.insert(outputs.end(), {"factors.csv", "market.csv", "truth_loadings.csv"});
    }
    for (std::size_t i = 0; i < sim.truth.memberships.size(); ++i) {
        const auto name = "truth_mode" + std::to_string(i + 1) + ".csv";
        write_membership_csv(dir / name, sim.truth.memberships[i]);
        outputs.push_back(name);
    }
    write_json(dir / "manifest.json", {{"tool", "pmtc"},
                                       {"version", PMTC_VERSION},
                                       {"command", "generate"},
                                       {"seed", seed},
                                       {"attempts", sim.attempts},
                                       {"config_hash", hash_hex(fnv1a64(canonical_text(used)))},
                                       {"config", config_json(used)},
                                       {"outputs", outputs}});

    std::ostringstream dims;
    for (std::size_t k = 0; k < sim.data.x.order(); ++k) dims << (k ? "x" : "") << sim.data.x.dim(k);
    out << "tensor " << dims.str();
    if (sim.data.y.size() > 0) out << ", returns " << sim.data.y.rows() << "x" << sim.data.y.cols();
    out << ", seed " << seed << '\n';
    err << "pmtc generate: wrote " << outputs.size() << " file(s) to " << dir.string() << '\n';
    return ok;
}

// fit

int cmd_fit(const FitArgs& a, std::ostream& out, std::ostream& err) {
    if (a.observed == a.latent.has_value()) {
        throw ConfigError("choose exactly one of --factors-observed and --factors-latent M");
    }
    if (a.demean != "on" && a.demean != "off") throw ConfigError("--demean takes on or off");
    if (a.observed && a.factors.empty()) throw ConfigError("--factors-observed needs --factors FILE");
    if (!(a.omega >= 0.0)) throw ConfigError("--omega must be >= 0");

    CoupledData data{read_tensor(a.tensor), read_matrix_csv(a.returns)};
    std::optional<Matrix> f;
    if (!a.factors.empty()) f = read_matrix_csv(a.factors);
    if (data.x.order() < 2) throw ShapeError("tensor needs at least one clustered mode and a time mode");
    const auto t_total = data.periods();
    if (static_cast<std::size_t>(data.y.rows()) != data.x.dim(0) || static_cast<std::size_t>(data.y.cols()) != t_total) {
        throw ShapeError("returns are " + std::to_string(data.y.rows()) + "x" + std::to_string(data.y.cols()) +
                         " but the tensor needs " + std::to_string(data.x.dim(0)) + "x" + std::to_string(t_total));
    }
    if (f && static_cast<std::size_t>(f->cols()) != t_total) {
        throw ShapeError("factors span " + std::to_string(f->cols()) + " periods, returns " + std::to_string(t_total));
    }
    FitOptions opts;
    opts.clusters = parse_ranks(a.ranks);
    if (opts.clusters.size() != data.num_modes()) {
        throw ShapeError("--ranks has " + std::to_string(opts.clusters.size()) + " entries for " +
                         std::to_string(data.num_modes()) + " clustered modes");
    }
    const std::size_t train = a.split_index.value_or(t_total);
    if (train < 1 || train > t_total) throw ShapeError("--split-index must be in 1.." + std::to_string(t_total));

    if (a.rank_normalize) data.x = rank_normalize(data.x);
    if (train < t_total) {
        data = slice_periods(data, 0, train);
        if (f) f = slice_columns(*f, 0, train);
    }
    opts.omega = a.omega;
    opts.factors = a.observed ? FactorKind::observed : FactorKind::latent;
    opts.num_factors = a.latent.value_or(0);
    opts.demean = a.demean == "on";
    opts.kmeans.seed = a.seed;
    opts.kmeans.restarts = a.kmeans_restarts;
    opts.lloyd_iters = a.lloyd_iters;
    opts.schedule = a.schedule == "sequential" ? UpdateSchedule::sequential : UpdateSchedule::simultaneous;

    err << "pmtc fit: " << data.x.dim(0) << " entities, " << train << " training periods\n";
    const auto result = fit_panel(data, f, opts);

    const fs::path dir(a.out);
    make_dir(dir);
    for (std::size_t i = 0; i < result.memberships.size(); ++i) {
        write_membership_csv(dir / ("memberships_mode" + std::to_string(i + 1) + ".csv"), result.memberships[i]);
    }
    write_loadings_csv(dir / "loadings.csv", result.loadings.loadings());
    write_asset_loadings_csv(dir / "asset_loadings.csv", per_asset_loadings(result.loadings, result.memberships[0]),
                             result.memberships[0]);
    write_trace_csv(dir / "trace.csv", result.trace);

    const double final_loss = result.trace.steps.empty() ? 0.0 : result.trace.steps.back().loss;
    json summary{{"ranks", opts.clusters},
                 {"omega", opts.omega},
                 {"factors", a.observed ? "observed" : "latent"},
                 {"num_factors", result.loadings.loadings().cols()},
                 {"demean", opts.demean},
                 {"rank_normalize", a.rank_normalize},
                 {"train_periods", train},
                 {"total_periods", t_total},
                 {"seed", a.seed},
                 {"lloyd_iterations", result.trace.iterations_used},
                 {"lloyd_converged", result.trace.converged},
                 {"pchooi_iterations", result.pchooi_iterations},
                 {"pchooi_converged", result.pchooi_converged},
                 {"final_loss", final_loss}};
    write_json(dir / "fit.json", summary);
    ConfigMap flags{{"tensor", a.tensor},       {"returns", a.returns}, {"factors", a.factors},
                    {"ranks", a.ranks},         {"omega", format_double(a.omega)},
                    {"latent", a.latent ? std::to_string(*a.latent) : ""},
                    {"demean", a.demean},       {"rank_normalize", a.rank_normalize ? "true" : "false"},
                    {"split_index", std::to_string(train)}, {"seed", std::to_string(a.seed)},
                    {"lloyd_iters", a.lloyd_iters ? std::to_string(*a.lloyd_iters) : "auto"},
                    {"kmeans_restarts", std::to_string(a.kmeans_restarts)}, {"schedule", a.schedule}};
    write_json(dir / "manifest.json", {{"tool", "pmtc"},
                                       {"version", PMTC_VERSION},
                                       {"command", "fit"},
                                       {"seed", a.seed},
                                       {"config_hash", hash_hex(fnv1a64(canonical_text(flags)))},
                                       {"config", config_json(flags)}});

    std::vector<std::vector<std::string>> body;
    for (std::size_t i = 0; i < result.memberships.size(); ++i) {
        std::string sizes;
        for (auto s : result.memberships[i].cluster_sizes()) sizes += (sizes.empty() ? "" : " ") + std::to_string(s);
        body.push_back({std::to_string(i + 1), std::to_string(result.memberships[i].num_clusters()), sizes});
    }
    print_table(out, {"mode", "clusters", "sizes"}, body);
    out << "lloyd iterations " << result.trace.iterations_used << (result.trace.converged ? " (converged)" : "")
        << ", loss " << fixed(final_loss, 4) << '\n';
    err << "pmtc fit: wrote memberships, loadings and fit.json to " << dir.string() << '\n';
    return ok;
}

// eval

int cmd_eval(const EvalArgs& a, std::ostream& out, std::ostream& err) {
    if (a.split != "index" && a.split != "rolling") throw ConfigError("--split takes index or rolling");
    const fs::path dir(a.fit);
    const json summary = read_json(dir / "fit.json");
    const bool observed = summary.at("factors").get<std::string>() == "observed";
    const int num_factors = summary.at("num_factors").get<int>();
    const bool demean = summary.at("demean").get<bool>();

    const Matrix y = read_matrix_csv(a.returns);
    const Membership m1 = read_membership_csv(dir / "memberships_mode1.csv");
    std::optional<Matrix> f;
    if (!a.factors.empty()) f = read_matrix_csv(a.factors);
    if (observed && !f) throw ConfigError("the fit used observed factors; pass --factors FILE");
    Vector market;
    if (!a.market.empty()) {
        market = read_series(a.market);
    } else if (f) {
        err << "pmtc eval: no --market given; using the first factor row as the market excess return\n";
        market = f->row(0).transpose();
    } else {
        throw ConfigError("pass --market FILE (or --factors, whose first row is then used)");
    }

    FactorEstimate est;
    est.kind = observed ? FactorKind::observed : FactorKind::latent;
    (observed ? est.b : est.u_b) = read_loadings_csv(dir / "loadings.csv");
    if (est.loadings().rows() != m1.num_clusters()) throw ShapeError("loadings rows differ from the cluster count");
    if (observed && f && f->rows() != est.b.cols()) {
        throw ShapeError("factor file has " + std::to_string(f->rows()) + " factors, loadings " +
                         std::to_string(est.b.cols()));
    }

    std::vector<R2Window> windows;
    if (a.split == "index") {
        const auto split = a.split_index.value_or(summary.at("train_periods").get<std::size_t>());
        windows.push_back(evaluate_split(y, f, market, m1, est, split));
    } else {
        if (a.dates.empty()) throw ConfigError("--split rolling needs --dates FILE");
        windows = evaluate_rolling(y, f, market, m1, est.kind, num_factors, demean, read_labels(a.dates));
    }

    std::vector<std::vector<std::string>> body;
    CsvTable csv{{"window", "ins_r2_pct", "oos_r2_pct"}, {}};
    double oos_sum = 0.0, ins_sum = 0.0;
    int oos_n = 0;
    for (const auto& w : windows) {
        const auto ins = format_double(100.0 * w.ins);
        const auto oos = w.oos ? format_double(100.0 * *w.oos) : "";
        csv.rows.push_back({w.label, ins, oos});
        body.push_back({w.label, fixed(100.0 * w.ins, 2), w.oos ? fixed(100.0 * *w.oos, 2) : "-"});
        ins_sum += w.ins;
        if (w.oos) {
            oos_sum += *w.oos;
            ++oos_n;
        }
    }
    if (a.split == "rolling") {
        body.push_back({"average", fixed(100.0 * ins_sum / static_cast<double>(windows.size()), 2),
                        oos_n ? fixed(100.0 * oos_sum / oos_n, 2) : "-"});
    }
    print_table(out, {"window", "INS R2 %", "OOS R2 %"}, body);
    if (!a.out.empty()) {
        make_dir(a.out);
        write_csv(fs::path(a.out) / "r2.csv", csv);
        err << "pmtc eval: wrote " << (fs::path(a.out) / "r2.csv").string() << '\n';
    }
    return ok;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Panel coupled matrix-tensor clustering: simulation, fitting and evaluation", "pmtc"};
    app.require_subcommand(1);
    app.set_version_flag("--version", PMTC_VERSION);

    SimulateArgs sim;
    auto* simulate = app.add_subcommand("simulate", "Run a Monte Carlo experiment and write result CSVs");
    auto* generate = app.add_subcommand("generate", "Write one simulated panel to disk");
    for (auto* sub : {simulate, generate}) {
        sub->add_option("--config", sim.config, "INI or JSON config (a run manifest also works)")->check(CLI::ExistingFile);
        sub->add_option("--preset", sim.preset, "named preset: fig1, fig2, fig3, figA1 ... figA8");
        sub->add_option("--out", sim.out, "output directory");
        sub->add_option("--seed", sim.seed, "base seed (run.seed)");
        sub->add_option("--override", sim.overrides, "key=value, repeatable; bare keys resolve to design/run/algorithm")
            ->allow_extra_args(false);
    }
    simulate->add_option("--threads", sim.threads, "worker threads (default: all cores)")->check(CLI::NonNegativeNumber);
    simulate->add_option("--reps", sim.reps, "replications per grid point (run.replications)")
        ->check(CLI::PositiveNumber);
    simulate->add_option("--methods", sim.methods, "comma-separated method names (run.methods)");

    FitArgs fit;
    auto* fitc = app.add_subcommand("fit", "Cluster a coupled panel and estimate group loadings");
    fitc->add_option("--tensor", fit.tensor, "characteristics tensor (.pmtc binary)")->required();
    fitc->add_option("--returns", fit.returns, "outcome panel CSV, entities x periods")->required();
    fitc->add_option("--factors", fit.factors, "observed factors CSV, factors x periods");
    fitc->add_option("--ranks", fit.ranks, "clusters per mode, e.g. 5,5")->required();
    fitc->add_option("--omega", fit.omega, "weight of the tensor in coupled steps");
    fitc->add_flag("--factors-observed", fit.observed, "regress on the --factors panel");
    fitc->add_option("--factors-latent", fit.latent, "estimate M latent factors")->check(CLI::PositiveNumber);
    fitc->add_option("--demean", fit.demean, "demean before observed-factor regression")
        ->check(CLI::IsMember({"on", "off"}));
    fitc->add_flag("--rank-normalize", fit.rank_normalize, "cross-sectional ranks in [0,1] per characteristic");
    fitc->add_option("--split-index", fit.split_index, "train on the first N periods")->check(CLI::PositiveNumber);
    fitc->add_option("--seed", fit.seed, "k-means seed");
    fitc->add_option("--lloyd-iters", fit.lloyd_iters, "Lloyd iterations (default 2*ceil(ln max p))")
        ->check(CLI::PositiveNumber);
    fitc->add_option("--kmeans-restarts", fit.kmeans_restarts, "k-means++ restarts")->check(CLI::PositiveNumber);
    fitc->add_option("--schedule", fit.schedule, "Lloyd schedule")->check(CLI::IsMember({"simultaneous", "sequential"}));
    fitc->add_option("--out", fit.out, "output directory");

    EvalArgs ev;
    auto* evalc = app.add_subcommand("eval", "Total R2 of a fit, in and out of sample");
    evalc->add_option("--fit", ev.fit, "directory written by pmtc fit")->required();
    evalc->add_option("--returns", ev.returns, "outcome panel CSV")->required();
    evalc->add_option("--factors", ev.factors, "observed factors CSV");
    evalc->add_option("--market", ev.market, "market excess return series CSV");
    evalc->add_option("--split", ev.split, "index or rolling")->check(CLI::IsMember({"index", "rolling"}));
    evalc->add_option("--split-index", ev.split_index, "first out-of-sample period (default: fit's training length)");
    evalc->add_option("--dates", ev.dates, "one label per period; rolling windows follow label runs");
    evalc->add_option("--out", ev.out, "directory for r2.csv");

    auto* schema = app.add_subcommand("schema", "Print the accepted config keys");
    auto* presets = app.add_subcommand("presets", "List preset names");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? ok : invalid_config;
    }

    try {
        if (simulate->parsed()) return cmd_simulate(sim, out, err);
        if (generate->parsed()) return cmd_generate(sim, out, err);
        if (fitc->parsed()) return cmd_fit(fit, out, err);
        if (evalc->parsed()) return cmd_eval(ev, out, err);
        if (schema->parsed()) {
            out << schema_text();
            return ok;
        }
        if (presets->parsed()) {
            for (const auto& p : preset_names()) out << p << '\n';
            return ok;
        }
    } catch (const DesignError& e) {
        err << "error: infeasible design: " << e.what() << '\n';
        return infeasible_design;
    } catch (const ShapeError& e) {
        err << "error: shape mismatch: " << e.what() << '\n';
        return shape_mismatch;
    } catch (const IoError& e) {
        err << "error: " << e.what() << '\n';
        return unreadable_file;
    } catch (const std::invalid_argument& e) {
        err << "error: invalid configuration: " << e.what() << '\n';
        return invalid_config;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return internal_error;
    }
    return internal_error;
}

}  // namespace pmtc::cli
