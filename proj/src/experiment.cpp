#include "pmtc/experiment.hpp"

#include "pmtc/errors.hpp"
#include "pmtc/factors.hpp"
#include "pmtc/pchooi.hpp"
#include "pmtc/pmtsc.hpp"

#include <array>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <map>
#include <stdexcept>
#include <thread>
#include <utility>

namespace pmtc {

namespace {

constexpr std::array<std::pair<Method, std::string_view>, 11> kMethodNames{{
    {Method::y_sc, "Y:SC"},
    {Method::x_hsc, "X:HSC"},
    {Method::x_hsc_hlloyd, "X:HSC+HLloyd"},
    {Method::x_hsc_pmtlloyd, "X:HSC+PMTLloyd"},
    {Method::xy_pmtsc, "X+Y:PMTSC"},
    {Method::xy_pmtsc_hlloyd, "X+Y:PMTSC+HLloyd"},
    {Method::xy_pmtsc_pmtlloyd, "X+Y:PMTSC+PMTLloyd"},
    {Method::pchooi, "PCHOOI"},
    {Method::hooi, "HOOI"},
    {Method::svd_y, "SVD-Y"},
    {Method::no_clustering, "No-clustering"},
}};

bool uses_outcome(Method m) {
    switch (m) {
        case Method::y_sc:
        case Method::xy_pmtsc:
        case Method::xy_pmtsc_hlloyd:
        case Method::xy_pmtsc_pmtlloyd:
        case Method::pchooi:
        case Method::svd_y:
        case Method::no_clustering:
            return true;
        default:
            return false;
    }
}

bool clusters(Method m) { return m != Method::pchooi && m != Method::hooi && m != Method::svd_y && m != Method::no_clustering; }

SimulatedPanel generate(Design design, std::uint64_t seed) {
    return std::visit(
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
        std::move(design));
}

std::vector<int> cluster_counts(const Design& design) {
    return std::visit(
        [](const auto& d) -> std::vector<int> {
            using D = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<D, BlockDesign>) {
                return std::vector<int>(d.order, d.clusters);
            } else {
                return d.ranks;
            }
        },
        design);
}

// Lazily computed pieces shared by the methods of one replication.
class Replication {
public:
    Replication(const Design& design, const SimulatedPanel& sim, const AlgorithmSettings& settings, std::uint64_t seed)
        : design_(design), sim_(sim), settings_(settings), seed_(seed), r_(cluster_counts(design)),
          ranks_(r_.begin(), r_.end()) {}

    const SimulatedPanel& sim() const { return sim_; }
    const std::vector<int>& clusters() const { return r_; }
    bool is_pmtc() const { return std::holds_alternative<SimDesign>(design_); }
    int num_factors() const { return is_pmtc() ? std::get<SimDesign>(design_).num_factors : 0; }

    KmeansOptions kmeans() const {
        KmeansOptions k;
        k.kappa = settings_.kappa;
        k.restarts = settings_.kmeans_restarts;
        k.seed = seed_;
        return k;
    }

    const PchooiResult& subspaces(Source source) {
        auto& slot = source == Source::coupled ? coupled_ : tensor_only_;
        if (!slot) {
            PchooiOptions opts;
            opts.max_iter = settings_.pchooi_max_iter;
            opts.tol = settings_.pchooi_tol;
            opts.omega = settings_.omega;
            opts.source = source;
            opts.compute_denoised = false;
            slot = pchooi(sim_.data, ranks_, opts);
        }
        return *slot;
    }

    const SpectralInit& spectral(Source source) {
        auto& slot = source == Source::coupled ? pmtsc_ : hsc_;
        if (!slot) {
            PmtscOptions opts;
            opts.kmeans = kmeans();
            opts.omega = settings_.omega;
            opts.source = source;
            slot = pmtsc(sim_.data, r_, subspaces(source).bases, opts);
        }
        return *slot;
    }

    LloydResult lloyd(Source source, Projection projection) {
        LloydOptions opts;
        opts.max_iter = settings_.lloyd_iters;
        opts.projection = projection;
        opts.schedule = settings_.schedule;
        opts.omega = settings_.omega;
        opts.source = source;
        opts.record_trace = false;
        return pmtlloyd(sim_.data, spectral(source).memberships, opts);
    }

private:
    const Design& design_;
    const SimulatedPanel& sim_;
    const AlgorithmSettings& settings_;
    std::uint64_t seed_;
    std::vector<int> r_;
    std::vector<Eigen::Index> ranks_;
    std::optional<PchooiResult> coupled_, tensor_only_;
    std::optional<SpectralInit> pmtsc_, hsc_;
};

class RowSink {
public:
    RowSink(std::vector<ResultRow>& rows, const std::string& id, std::string_view method, int replication)
        : rows_(rows), id_(id), method_(method), replication_(replication) {}
    void add(int mode, std::string_view metric, double value) {
        rows_.push_back({id_, std::string(method_), replication_, mode, std::string(metric), value});
    }

private:
    std::vector<ResultRow>& rows_;
    const std::string& id_;
    std::string_view method_;
    int replication_;
};

Matrix true_asset_loadings(const GroundTruth& truth) { return one_hot(truth.memberships[0]) * truth.b; }

double latent_distance(const Matrix& asset_loadings, const GroundTruth& truth, int m) {
    return subspace_distance(lsvd(asset_loadings, m), lsvd(true_asset_loadings(truth), m));
}

void loading_rows(Replication& rep, const Membership& m1, const std::vector<int>& permutation, RowSink& out,
                  const AlgorithmSettings& settings) {
    const auto& truth = rep.sim().truth;
    const auto& y = rep.sim().data.y;
    try {
        const auto est = estimate_observed(y, m1, truth.f, settings.demean);
        out.add(1, "loading_error_observed", (per_asset_loadings(est, m1) - true_asset_loadings(truth)).norm());
        Matrix aligned(est.b.rows(), est.b.cols());
        for (std::size_t a = 0; a < permutation.size(); ++a) {
            aligned.row(static_cast<Eigen::Index>(a)) = est.b.row(permutation[a]);
        }
        out.add(1, "group_loading_error", (aligned - truth.b).norm());
    } catch (const DegenerateError&) {
    }
    const int m = rep.num_factors();
    if (m <= m1.num_clusters()) {
        try {
            const auto est = estimate_latent(y, m1, m);
            out.add(1, "loading_error_latent", latent_distance(per_asset_loadings(est, m1), truth, m));
        } catch (const DegenerateError&) {
        }
    }
}

void clustering_rows(Replication& rep, const std::vector<Membership>& init, const std::vector<Membership>& final,
                     std::optional<int> iterations, RowSink& out, const AlgorithmSettings& settings) {
    const auto& truth = rep.sim().truth;
    std::vector<int> final_perm0;
    for (std::size_t i = 0; i < final.size(); ++i) {
        const auto res = cer(final[i], truth.memberships[i]);
        out.add(static_cast<int>(i) + 1, "cer", res.rate);
        ClusterCenters centers{rescaled_core(truth.core, truth.memberships, i), std::nullopt};
        if (i == 0 && rep.is_pmtc()) centers.outcome_rows = truth.s_y;
        // The label permutation is fixed by the initializer.
        const auto perm0 = cer(init[i], truth.memberships[i]).permutation;
        out.add(static_cast<int>(i) + 1, "misclustering_loss", misclustering_loss(final[i], truth.memberships[i], centers, perm0));
        if (i == 0) final_perm0 = res.permutation;
    }
    if (iterations) out.add(0, "iterations", *iterations);
    if (rep.is_pmtc()) loading_rows(rep, final[0], final_perm0, out, settings);
}

void subspace_rows(const std::vector<OrthonormalBasis>& bases, const GroundTruth& truth, RowSink& out) {
    for (std::size_t i = 0; i < bases.size(); ++i) {
        out.add(static_cast<int>(i) + 1, "subspace_distance", subspace_distance(bases[i], truth.bases[i]));
    }
}

void run_method(Method method, Replication& rep, RowSink& out, const AlgorithmSettings& settings) {
    const auto& sim = rep.sim();
    switch (method) {
        case Method::y_sc: {
            KmeansResult res = spectral_clustering(sim.data.y, rep.clusters()[0], rep.kmeans());
            std::vector<Membership> m{res.membership};
            clustering_rows(rep, m, m, std::nullopt, out, settings);
            return;
        }
        case Method::x_hsc:
        case Method::xy_pmtsc: {
            const auto source = method == Method::x_hsc ? Source::tensor_only : Source::coupled;
            const auto& init = rep.spectral(source).memberships;
            clustering_rows(rep, init, init, std::nullopt, out, settings);
            return;
        }
        case Method::x_hsc_hlloyd:
        case Method::x_hsc_pmtlloyd:
        case Method::xy_pmtsc_hlloyd:
        case Method::xy_pmtsc_pmtlloyd: {
            const bool coupled = method == Method::xy_pmtsc_hlloyd || method == Method::xy_pmtsc_pmtlloyd;
            const bool oblique = method == Method::x_hsc_hlloyd || method == Method::xy_pmtsc_hlloyd;
            const auto source = coupled ? Source::coupled : Source::tensor_only;
            const auto res = rep.lloyd(source, oblique ? Projection::oblique : Projection::orthogonal);
            clustering_rows(rep, rep.spectral(source).memberships, res.memberships, res.trace.iterations_used, out,
                            settings);
            return;
        }
        case Method::pchooi:
        case Method::hooi: {
            const auto& res = rep.subspaces(method == Method::pchooi ? Source::coupled : Source::tensor_only);
            subspace_rows(res.bases, sim.truth, out);
            out.add(0, "iterations", res.iterations);
            return;
        }
        case Method::svd_y: {
            const std::vector<OrthonormalBasis> u{outcome_svd(sim.data.y, rep.clusters()[0])};
            subspace_rows(u, sim.truth, out);
            return;
        }
        case Method::no_clustering: {
            const auto& truth = sim.truth;
            try {
                out.add(1, "loading_error_observed",
                        (ungrouped_loadings(sim.data.y, truth.f, settings.demean) - true_asset_loadings(truth)).norm());
            } catch (const DegenerateError&) {
            }
            const int m = rep.num_factors();
            if (m <= sim.data.y.cols()) out.add(1, "loading_error_latent", latent_distance(sim.data.y, truth, m));
            return;
        }
    }
}

std::string format_value(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

}  // namespace

std::string_view method_name(Method method) {
    for (const auto& [m, name] : kMethodNames) {
        if (m == method) return name;
    }
    throw std::invalid_argument("unknown method enumerator");
}

Method parse_method(std::string_view name) {
    for (const auto& [m, n] : kMethodNames) {
        if (n == name) return m;
    }
    std::string known;
    for (const auto& entry : kMethodNames) known += (known.empty() ? "" : ", ") + std::string(entry.second);
    throw std::invalid_argument("unknown method '" + std::string(name) + "' (known: " + known + ")");
}

std::vector<Method> parse_methods(std::string_view list) {
    std::vector<Method> out;
    std::size_t start = 0;
    while (start <= list.size()) {
        const auto end = std::min(list.find(',', start), list.size());
        auto item = list.substr(start, end - start);
        while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
        while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
        if (!item.empty()) out.push_back(parse_method(item));
        start = end + 1;
    }
    if (out.empty()) throw std::invalid_argument("no methods given");
    return out;
}

std::string experiment_id(const Scenario& scenario, const GridPoint& point) {
    return scenario.id + "@" + scenario.parameter + "=" + format_value(point.x);
}

void check_methods(const Design& design, const std::vector<Method>& methods) {
    for (Method m : methods) {
        const std::string name(method_name(m));
        if (std::holds_alternative<BlockDesign>(design) && uses_outcome(m)) {
            throw std::invalid_argument("method " + name + " needs an outcome panel; the block model has none");
        }
        if (std::holds_alternative<TuckerDesign>(design) && (clusters(m) || m == Method::no_clustering)) {
            throw std::invalid_argument("method " + name + " needs cluster ground truth; Tucker designs have none");
        }
        if (m == Method::no_clustering && !std::holds_alternative<SimDesign>(design)) {
            throw std::invalid_argument("method " + name + " needs factor ground truth");
        }
    }
}

std::vector<ResultRow> run_replication(const std::string& id, const GridPoint& point, const std::vector<Method>& methods,
                                       int replication, std::uint64_t seed, const AlgorithmSettings& settings) {
    const std::uint64_t rep_seed = seed + static_cast<std::uint64_t>(replication);
    const SimulatedPanel sim = generate(point.design, rep_seed);
    Replication rep(point.design, sim, settings, rep_seed);
    std::vector<ResultRow> rows;
    for (Method m : methods) {
        RowSink sink(rows, id, method_name(m), replication);
        run_method(m, rep, sink, settings);
    }
    return rows;
}

std::vector<ResultRow> run_experiment(const ExperimentSpec& spec, int threads) {
    if (spec.replications < 1) throw std::invalid_argument("replications must be >= 1");
    struct Job {
        std::string id;
        const GridPoint* point;
        int replication;
    };
    std::vector<Job> jobs;
    for (const auto& scenario : spec.scenarios) {
        for (const auto& point : scenario.points) {
            check_methods(point.design, spec.methods);
            const auto id = experiment_id(scenario, point);
            for (int r = 0; r < spec.replications; ++r) jobs.push_back({id, &point, r});
        }
    }

    std::vector<std::vector<ResultRow>> results(jobs.size());
    std::vector<std::exception_ptr> errors(jobs.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t j = next++; j < jobs.size(); j = next++) {
            try {
                results[j] = run_replication(jobs[j].id, *jobs[j].point, spec.methods, jobs[j].replication, spec.seed,
                                             spec.settings);
            } catch (...) {
                errors[j] = std::current_exception();
            }
        }
    };
    const auto n = static_cast<std::size_t>(std::max(1, threads));
    std::vector<std::thread> pool;
    for (std::size_t t = 1; t < std::min(n, jobs.size()); ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    std::vector<ResultRow> rows;
    for (std::size_t j = 0; j < jobs.size(); ++j) {
        if (errors[j]) std::rethrow_exception(errors[j]);
        for (auto& row : results[j]) rows.push_back(std::move(row));
    }
    return rows;
}

PanelTable summarize(const ExperimentSpec& spec, const std::vector<ResultRow>& rows, const Panel& panel) {
    const Scenario* scenario = nullptr;
    for (const auto& s : spec.scenarios) {
        if (s.id == panel.scenario) scenario = &s;
    }
    if (!scenario) throw std::invalid_argument("panel refers to unknown scenario " + panel.scenario);

    std::map<std::pair<std::string, std::string>, std::pair<double, int>> acc;
    for (const auto& row : rows) {
        if (row.metric != panel.metric || row.mode != panel.mode) continue;
        auto& [sum, count] = acc[{row.experiment_id, row.method}];
        sum += row.value;
        ++count;
    }

    PanelTable table;
    std::vector<Method> present;
    for (Method m : spec.methods) {
        for (const auto& point : scenario->points) {
            if (acc.count({experiment_id(*scenario, point), std::string(method_name(m))})) {
                present.push_back(m);
                break;
            }
        }
    }
    for (Method m : present) table.methods.emplace_back(method_name(m));
    for (const auto& point : scenario->points) {
        table.x.push_back(point.x);
        std::vector<std::optional<double>> row;
        for (Method m : present) {
            const auto it = acc.find({experiment_id(*scenario, point), std::string(method_name(m))});
            if (it == acc.end()) {
                row.emplace_back();
            } else {
                row.emplace_back(it->second.first / it->second.second);
            }
        }
        table.means.push_back(std::move(row));
    }
    return table;
}

}  // namespace pmtc
