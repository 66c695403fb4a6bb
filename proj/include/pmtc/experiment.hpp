#pragma once

#include "pmtc/pmtlloyd.hpp"
#include "pmtc/simulate.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace pmtc {

enum class Method {
    y_sc,               // "Y:SC"
    x_hsc,              // "X:HSC"
    x_hsc_hlloyd,       // "X:HSC+HLloyd"
    x_hsc_pmtlloyd,     // "X:HSC+PMTLloyd"
    xy_pmtsc,           // "X+Y:PMTSC"
    xy_pmtsc_hlloyd,    // "X+Y:PMTSC+HLloyd"
    xy_pmtsc_pmtlloyd,  // "X+Y:PMTSC+PMTLloyd"
    pchooi,             // "PCHOOI"
    hooi,               // "HOOI"
    svd_y,              // "SVD-Y"
    no_clustering,      // "No-clustering": asset-by-asset loadings
};

std::string_view method_name(Method method);
// Throws std::invalid_argument for names outside the list above.
Method parse_method(std::string_view name);
std::vector<Method> parse_methods(std::string_view comma_separated);

using Design = std::variant<SimDesign, TuckerDesign, BlockDesign>;

struct AlgorithmSettings {
    int kmeans_restarts = 10;
    double kappa = 0.0;  // <= 0: 1 + log r
    std::optional<int> lloyd_iters;
    UpdateSchedule schedule = UpdateSchedule::simultaneous;
    double omega = 1.0;
    int pchooi_max_iter = 50;
    double pchooi_tol = 1e-6;
    bool demean = true;
};

struct GridPoint {
    double x;
    Design design;  // seed is overwritten per replication
};

struct Scenario {
    std::string id;
    std::string parameter;
    std::vector<GridPoint> points;
};

struct ExperimentSpec {
    std::vector<Scenario> scenarios;
    std::vector<Method> methods;
    int replications = 100;
    std::uint64_t seed = 0;
    AlgorithmSettings settings;
};

// One metric value.  mode is 1-based; 0 marks values not tied to a mode.
struct ResultRow {
    std::string experiment_id;
    std::string method;
    int replication;
    int mode;
    std::string metric;
    double value;
};

// "scenario@parameter=value"
std::string experiment_id(const Scenario& scenario, const GridPoint& point);

// Throws std::invalid_argument if a method cannot run on a design (outcome
// methods on the block model, clustering methods on Tucker designs, ...).
void check_methods(const Design& design, const std::vector<Method>& methods);

// All metrics of every method for one replication.  The design seed is
// seed + replication, shared by every grid point and method.
std::vector<ResultRow> run_replication(const std::string& id, const GridPoint& point, const std::vector<Method>& methods,
                                       int replication, std::uint64_t seed, const AlgorithmSettings& settings);

// Rows come back in (scenario, point, replication, method) order whatever
// the thread count.
std::vector<ResultRow> run_experiment(const ExperimentSpec& spec, int threads);

// A figure panel: mean of (metric, mode) against the swept value, one
// column per method.
struct Panel {
    std::string file;
    std::string scenario;
    std::string metric;
    int mode;
};

struct PanelTable {
    std::vector<std::string> methods;
    std::vector<double> x;
    std::vector<std::vector<std::optional<double>>> means;  // [point][method]
};

PanelTable summarize(const ExperimentSpec& spec, const std::vector<ResultRow>& rows, const Panel& panel);

}  // namespace pmtc
