#include "pmtc/config.hpp"

#include "pmtc/io.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include "json.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace pmtc {

namespace {

enum class Kind { integer, uinteger, real, reals, integers, boolean, choice, methods, text, grid, iterations };

struct Key {
    std::string_view name;
    Kind kind;
    std::string_view choices;  // '|'-separated for Kind::choice
    std::string_view help;
};

constexpr Key kRunKeys[] = {
    {"preset", Kind::text, "", "start from a named preset; keys in the file override it"},
    {"replications", Kind::integer, "", "replications per grid point (>= 1)"},
    {"seed", Kind::uinteger, "", "base seed; replication k uses seed + k"},
    {"methods", Kind::methods, "", "comma-separated method names"},
    {"description", Kind::text, "", "free text, copied to the manifest"},
};

constexpr Key kDesignKeys[] = {
    {"model", Kind::choice, "pmtc|tucker|block", "data-generating model"},
    {"p", Kind::integers, "", "dimension of each clustered mode (one value repeats)"},
    {"d", Kind::integer, "", "number of clustered modes"},
    {"T", Kind::integer, "", "number of periods (pmtc, tucker)"},
    {"r", Kind::integers, "", "clusters (pmtc, block) or ranks (tucker) per mode"},
    {"m", Kind::integer, "", "number of factors (pmtc)"},
    {"sigma_x", Kind::real, "", "tensor noise scale (pmtc, tucker)"},
    {"sigma_y", Kind::real, "", "outcome noise scale (pmtc, tucker)"},
    {"sigma_s", Kind::real, "", "core entry sd (pmtc)"},
    {"sigma_b", Kind::real, "", "loading sd (pmtc)"},
    {"sigma_f", Kind::real, "", "factor sd (pmtc)"},
    {"mu_b", Kind::reals, "", "loading means, one per factor (pmtc)"},
    {"mu_f", Kind::reals, "", "factor means, one per factor (pmtc)"},
    {"c_x", Kind::real, "", "tensor SNR constant (pmtc)"},
    {"c_y", Kind::real, "", "outcome SNR constant (pmtc)"},
    {"gamma_x", Kind::real, "", "tensor SNR exponent (pmtc)"},
    {"gamma_y", Kind::real, "", "outcome SNR exponent (pmtc)"},
    {"normalize_snr", Kind::boolean, "", "rescale core and loadings to the SNR targets (pmtc)"},
    {"log_c_x", Kind::real, "", "log of the core singular value constant (tucker)"},
    {"log_c_y", Kind::real, "", "log of the outcome singular value constant (tucker)"},
    {"balance", Kind::reals, "", "cluster probabilities, used for every mode (pmtc, block)"},
    {"noise", Kind::choice, "gaussian|rademacher", "noise law"},
    {"sigma", Kind::real, "", "noise sd (block)"},
    {"signal_sd", Kind::real, "", "core entry sd (block)"},
};

constexpr Key kAlgorithmKeys[] = {
    {"kmeans_restarts", Kind::integer, "", "k-means++ restarts"},
    {"kappa", Kind::real, "", "k-means relaxation factor; <= 0 selects 1 + log r"},
    {"lloyd_iters", Kind::iterations, "", "Lloyd iterations, or auto for 2*ceil(ln max p)"},
    {"schedule", Kind::choice, "simultaneous|sequential", "Lloyd update schedule"},
    {"omega", Kind::real, "", "weight of the tensor block in coupled steps"},
    {"pchooi_max_iter", Kind::integer, "", "PCHOOI iteration cap"},
    {"pchooi_tol", Kind::real, "", "PCHOOI projector-change tolerance"},
    {"demean", Kind::boolean, "", "demean outcomes and factors before observed-factor regressions"},
};

constexpr Key kScenarioKeys[] = {
    {"parameter", Kind::text, "", "design key swept along the x axis"},
    {"values", Kind::grid, "", "x values: a list, or start:stop:step (inclusive)"},
};

constexpr Key kPanelKeys[] = {
    {"scenario", Kind::text, "", "scenario whose grid forms the x axis"},
    {"metric", Kind::choice,
     "cer|misclustering_loss|iterations|loading_error_observed|loading_error_latent|group_loading_error|subspace_distance",
     "metric averaged over replications"},
    {"mode", Kind::integer, "", "1-based mode; 0 for per-method values"},
    {"file", Kind::text, "", "output file name (default <panel>.csv)"},
};

constexpr std::string_view kSweepable[] = {"p",       "d",       "T",       "r",       "m",       "sigma_x",
                                           "sigma_y", "sigma_s", "sigma_b", "sigma_f", "c_x",     "c_y",
                                           "gamma_x", "gamma_y", "log_c_x", "log_c_y", "sigma",   "signal_sd"};

const std::set<std::string_view> kPmtcKeys{"model",   "p",       "d",       "T",       "r",        "m",      "sigma_x",
                                           "sigma_y", "sigma_s", "sigma_b", "sigma_f", "mu_b",     "mu_f",   "c_x",
                                           "c_y",     "gamma_x", "gamma_y", "normalize_snr", "balance", "noise"};
const std::set<std::string_view> kTuckerKeys{"model", "p", "d", "T", "r", "sigma_x", "sigma_y", "log_c_x", "log_c_y", "noise"};
const std::set<std::string_view> kBlockKeys{"model", "p", "d", "r", "sigma", "signal_sd", "balance", "noise"};

template <std::size_t N>
const Key* find_key(const Key (&table)[N], std::string_view name) {
    for (const auto& k : table) {
        if (k.name == name) return &k;
    }
    return nullptr;
}

std::string trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return std::string(s);
}

std::vector<std::string> split_list(std::string_view s) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto end = s.find(',', start);
        out.push_back(trim(s.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start)));
        if (end == std::string_view::npos) break;
        start = end + 1;
    }
    return out;
}

double to_real(const std::string& key, std::string_view v) {
    try {
        const double x = parse_double(trim(v));
        if (!std::isfinite(x)) throw std::invalid_argument("non-finite");
        return x;
    } catch (const std::invalid_argument&) {
        throw ConfigError(key + ": expected a finite number, got '" + std::string(v) + "'");
    }
}

long long to_integer(const std::string& key, std::string_view v) {
    const auto t = trim(v);
    long long x = 0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), x);
    if (t.empty() || ec != std::errc{} || ptr != t.data() + t.size()) {
        throw ConfigError(key + ": expected an integer, got '" + std::string(v) + "'");
    }
    return x;
}

std::uint64_t to_uinteger(const std::string& key, std::string_view v) {
    const auto t = trim(v);
    std::uint64_t x = 0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), x);
    if (t.empty() || ec != std::errc{} || ptr != t.data() + t.size()) {
        throw ConfigError(key + ": expected a non-negative integer, got '" + std::string(v) + "'");
    }
    return x;
}

bool to_bool(const std::string& key, std::string_view v) {
    const auto t = trim(v);
    if (t == "true" || t == "on" || t == "yes" || t == "1") return true;
    if (t == "false" || t == "off" || t == "no" || t == "0") return false;
    throw ConfigError(key + ": expected true/false or on/off, got '" + std::string(v) + "'");
}

std::vector<double> to_reals(const std::string& key, std::string_view v) {
    std::vector<double> out;
    for (const auto& item : split_list(v)) out.push_back(to_real(key, item));
    return out;
}

std::vector<int> to_integers(const std::string& key, std::string_view v) {
    std::vector<int> out;
    for (const auto& item : split_list(v)) {
        const auto x = to_integer(key, item);
        if (x < 1 || x > 1'000'000) throw ConfigError(key + ": values must be in 1..1000000");
        out.push_back(static_cast<int>(x));
    }
    return out;
}

double tidy(double v) { return std::round(v * 1e10) / 1e10; }

std::vector<double> to_grid(const std::string& key, std::string_view v) {
    const auto t = trim(v);
    if (t.find(':') == std::string::npos) return to_reals(key, t);
    const auto first = t.find(':');
    const auto second = t.find(':', first + 1);
    if (second == std::string::npos || t.find(':', second + 1) != std::string::npos) {
        throw ConfigError(key + ": ranges are start:stop:step");
    }
    const double a = to_real(key, t.substr(0, first));
    const double b = to_real(key, t.substr(first + 1, second - first - 1));
    const double step = to_real(key, t.substr(second + 1));
    if (!(step > 0.0) || b < a) throw ConfigError(key + ": ranges need stop >= start and step > 0");
    const auto n = static_cast<std::size_t>(std::floor((b - a) / step + 1e-9)) + 1;
    if (n > 10'000) throw ConfigError(key + ": range has too many points");
    std::vector<double> out;
    for (std::size_t k = 0; k < n; ++k) out.push_back(tidy(a + static_cast<double>(k) * step));
    return out;
}

void check_value(const std::string& key, const Key& spec, const std::string& value) {
    switch (spec.kind) {
        case Kind::integer:
            if (to_integer(key, value) < 0) throw ConfigError(key + ": must be >= 0");
            break;
        case Kind::uinteger:
            to_uinteger(key, value);
            break;
        case Kind::real:
            to_real(key, value);
            break;
        case Kind::reals:
            to_reals(key, value);
            break;
        case Kind::integers:
            to_integers(key, value);
            break;
        case Kind::boolean:
            to_bool(key, value);
            break;
        case Kind::choice: {
            bool ok = false;
            std::string_view rest = spec.choices;
            while (!rest.empty()) {
                const auto bar = rest.find('|');
                ok = ok || rest.substr(0, bar) == trim(value);
                rest = bar == std::string_view::npos ? std::string_view{} : rest.substr(bar + 1);
            }
            if (!ok) throw ConfigError(key + ": '" + value + "' is not one of " + std::string(spec.choices));
            break;
        }
        case Kind::methods:
            try {
                parse_methods(value);
            } catch (const std::invalid_argument& e) {
                throw ConfigError(key + ": " + e.what());
            }
            break;
        case Kind::text:
            break;
        case Kind::grid:
            to_grid(key, value);
            break;
        case Kind::iterations:
            if (trim(value) != "auto" && to_integer(key, value) < 1) throw ConfigError(key + ": must be auto or >= 1");
            break;
    }
}

struct SplitKey {
    std::string section;  // run, design, algorithm, scenario, panel
    std::string name;     // scenario or panel name
    std::string key;
};

SplitKey split_key(const std::string& full) {
    const auto dot = full.find('.');
    if (dot == std::string::npos) throw ConfigError("key '" + full + "' is outside a section");
    SplitKey s{full.substr(0, dot), "", full.substr(dot + 1)};
    if (s.section == "scenario" || s.section == "panel") {
        const auto dot2 = s.key.find('.');
        if (dot2 == std::string::npos || dot2 == 0) {
            throw ConfigError("key '" + full + "' needs the form " + s.section + ".<name>.<key>");
        }
        s.name = s.key.substr(0, dot2);
        s.key = s.key.substr(dot2 + 1);
    }
    if (s.key.empty() || s.key.find('.') != std::string::npos) throw ConfigError("malformed key '" + full + "'");
    return s;
}

using Kv = std::map<std::string, std::string>;

std::string get(const Kv& kv, const std::string& key, const std::string& fallback) {
    const auto it = kv.find(key);
    return it == kv.end() ? fallback : it->second;
}

template <typename T>
std::vector<T> expand(const std::string& key, std::vector<T> v, std::size_t n) {
    if (v.size() == 1) return std::vector<T>(n, v.front());
    if (v.size() != n) {
        throw ConfigError("design." + key + ": " + std::to_string(v.size()) + " values for " + std::to_string(n) +
                          " modes");
    }
    return v;
}

double real_or(const Kv& kv, const std::string& key, double fallback) {
    const auto it = kv.find(key);
    return it == kv.end() ? fallback : to_real("design." + key, it->second);
}

NoiseLaw noise_of(const Kv& kv) { return get(kv, "noise", "gaussian") == "rademacher" ? NoiseLaw::rademacher : NoiseLaw::gaussian; }

std::size_t mode_count(const Kv& kv, std::size_t fallback) {
    if (kv.count("d")) {
        const auto d = to_integer("design.d", kv.at("d"));
        if (d < 1 || d > 8) throw ConfigError("design.d must be in 1..8");
        return static_cast<std::size_t>(d);
    }
    for (const char* k : {"p", "r"}) {
        if (kv.count(k)) {
            const auto n = split_list(kv.at(k)).size();
            if (n > 1) return n;
        }
    }
    return fallback;
}

Design design_from(const Kv& kv) {
    const auto model = get(kv, "model", "pmtc");
    const auto& allowed = model == "pmtc" ? kPmtcKeys : model == "tucker" ? kTuckerKeys : kBlockKeys;
    for (const auto& [k, v] : kv) {
        if (!allowed.count(k)) throw ConfigError("design." + k + " does not apply to model " + model);
    }
    const auto ints = [&](const std::string& k, const std::string& fallback) {
        return to_integers("design." + k, get(kv, k, fallback));
    };
    if (model == "pmtc") {
        SimDesign d;
        const auto n = mode_count(kv, 2);
        d.dims.clear();
        for (int p : expand("p", ints("p", "200"), n)) d.dims.push_back(static_cast<std::size_t>(p));
        d.periods = static_cast<std::size_t>(ints("T", "120").at(0));
        d.ranks = expand("r", ints("r", "5"), n);
        d.num_factors = ints("m", "5").at(0);
        d.sigma_x = real_or(kv, "sigma_x", 1.0);
        d.sigma_y = real_or(kv, "sigma_y", 1.0);
        d.sigma_s = real_or(kv, "sigma_s", 1.0);
        d.sigma_b = real_or(kv, "sigma_b", 1.0);
        d.sigma_f = real_or(kv, "sigma_f", 1.0);
        const auto m = static_cast<std::size_t>(d.num_factors);
        if (kv.count("mu_b")) {
            d.mu_b = to_reals("design.mu_b", kv.at("mu_b"));
        } else {
            d.mu_b.assign(m, 0.0);
            std::fill_n(d.mu_b.begin(), std::min<std::size_t>(3, m), 1.0);
        }
        d.mu_f = kv.count("mu_f") ? to_reals("design.mu_f", kv.at("mu_f")) : std::vector<double>(m, 0.03);
        d.c_x = real_or(kv, "c_x", 1.0);
        d.c_y = real_or(kv, "c_y", 1.0);
        d.gamma_x = real_or(kv, "gamma_x", -0.5);
        d.gamma_y = real_or(kv, "gamma_y", -0.1);
        d.normalize_snr = to_bool("design.normalize_snr", get(kv, "normalize_snr", "true"));
        if (kv.count("balance")) d.balance.assign(n, to_reals("design.balance", kv.at("balance")));
        d.noise = noise_of(kv);
        return d;
    }
    if (model == "tucker") {
        TuckerDesign d;
        const auto n = mode_count(kv, 2);
        d.dims.clear();
        for (int p : expand("p", ints("p", "50"), n)) d.dims.push_back(static_cast<std::size_t>(p));
        d.periods = static_cast<std::size_t>(ints("T", "40").at(0));
        d.ranks = expand("r", ints("r", "5"), n);
        d.sigma_x = real_or(kv, "sigma_x", 1.0);
        d.sigma_y = real_or(kv, "sigma_y", 1.0);
        d.log_c_x = real_or(kv, "log_c_x", 1.0);
        d.log_c_y = real_or(kv, "log_c_y", 2.0);
        d.noise = noise_of(kv);
        return d;
    }
    BlockDesign d;
    d.order = mode_count(kv, 3);
    const auto p = expand("p", ints("p", "100"), d.order);
    const auto r = expand("r", ints("r", "2"), d.order);
    if (std::adjacent_find(p.begin(), p.end(), std::not_equal_to<>()) != p.end() ||
        std::adjacent_find(r.begin(), r.end(), std::not_equal_to<>()) != r.end()) {
        throw ConfigError("block model: every mode shares one p and one r");
    }
    d.dim = static_cast<std::size_t>(p.front());
    d.clusters = r.front();
    d.sigma = real_or(kv, "sigma", 1.0);
    d.signal_sd = real_or(kv, "signal_sd", 1.0);
    if (kv.count("balance")) d.balance = to_reals("design.balance", kv.at("balance"));
    d.noise = noise_of(kv);
    return d;
}

Kv section(const ConfigMap& config, const std::string& prefix) {
    Kv out;
    for (const auto& [k, v] : config) {
        if (k.rfind(prefix, 0) == 0) out[k.substr(prefix.size())] = v;
    }
    return out;
}

std::vector<std::string> names_in(const ConfigMap& config, const std::string& section) {
    std::vector<std::string> names;
    for (const auto& [k, v] : config) {
        if (k.rfind(section + ".", 0) != 0) continue;
        const auto s = split_key(k);
        if (names.empty() || names.back() != s.name) names.push_back(s.name);
    }
    return names;
}

std::string default_methods(const std::string& model) {
    if (model == "tucker") return "PCHOOI,HOOI,SVD-Y";
    if (model == "block") return "X:HSC,X:HSC+HLloyd,X:HSC+PMTLloyd";
    return "Y:SC,X:HSC+HLloyd,X:HSC+PMTLloyd,X+Y:PMTSC,X+Y:PMTSC+HLloyd,X+Y:PMTSC+PMTLloyd";
}

void flatten_json(const nlohmann::json& j, const std::string& prefix, ConfigMap& out) {
    if (j.is_object()) {
        for (const auto& [k, v] : j.items()) flatten_json(v, prefix.empty() ? k : prefix + "." + k, out);
        return;
    }
    if (prefix.empty()) throw ConfigError("JSON config must be an object");
    if (j.is_array()) {
        std::string joined;
        for (const auto& item : j) {
            if (item.is_structured()) throw ConfigError(prefix + ": nested arrays are not allowed");
            if (!joined.empty()) joined += ",";
            joined += item.is_string() ? item.get<std::string>() : item.dump();
        }
        out[prefix] = joined;
    } else if (j.is_string()) {
        out[prefix] = j.get<std::string>();
    } else if (j.is_number_float()) {
        out[prefix] = format_double(j.get<double>());
    } else if (j.is_null()) {
        throw ConfigError(prefix + ": null values are not allowed");
    } else {
        out[prefix] = j.dump();
    }
}

// Preset building blocks.

void add_scenario(ConfigMap& c, const std::string& name, const std::string& parameter, const std::string& values,
                  const Kv& fixed = {}) {
    c["scenario." + name + ".parameter"] = parameter;
    c["scenario." + name + ".values"] = values;
    for (const auto& [k, v] : fixed) c["scenario." + name + "." + k] = v;
}

void add_panel(ConfigMap& c, const std::string& name, const std::string& scenario, const std::string& metric, int mode) {
    c["panel." + name + ".scenario"] = scenario;
    c["panel." + name + ".metric"] = metric;
    c["panel." + name + ".mode"] = std::to_string(mode);
}

ConfigMap base(const std::string& preset, const std::string& model) {
    return {{"run.preset", preset}, {"run.replications", "100"}, {"run.seed", "0"}, {"design.model", model}};
}

constexpr const char* kLoadingMethods =
    "Y:SC,X:HSC+HLloyd,X:HSC+PMTLloyd,X+Y:PMTSC,X+Y:PMTSC+HLloyd,X+Y:PMTSC+PMTLloyd,No-clustering";

// Two gamma sweeps over the pmtc design with CER or loading panels.
ConfigMap gamma_preset(const std::string& name, bool loadings, const std::string& gy_fixed, const std::string& gy_values,
                       const std::string& gx_fixed, const std::string& gx_values) {
    auto c = base(name, "pmtc");
    c["run.methods"] = loadings ? kLoadingMethods : default_methods("pmtc");
    add_scenario(c, "gy", "gamma_y", gy_values, {{"gamma_x", gy_fixed}});
    add_scenario(c, "gx", "gamma_x", gx_values, {{"gamma_y", gx_fixed}});
    for (const char* s : {"gy", "gx"}) {
        if (loadings) {
            add_panel(c, name + "-observed-" + s, s, "loading_error_observed", 1);
            add_panel(c, name + "-latent-" + s, s, "loading_error_latent", 1);
        } else {
            add_panel(c, name + "-cer1-" + s, s, "cer", 1);
            add_panel(c, name + "-cer2-" + s, s, "cer", 2);
        }
    }
    return c;
}

}  // namespace

std::vector<std::string> preset_names() {
    return {"fig1", "fig2", "fig3", "figA1", "figA2", "figA3", "figA4", "figA5", "figA6", "figA7", "figA8"};
}

ConfigMap preset(std::string_view name) {
    const std::string n(name);
    if (n == "fig1") {
        auto c = base(n, "tucker");
        c["run.methods"] = "PCHOOI,SVD-Y,HOOI";
        c["design.p"] = "50";
        c["design.T"] = "40";
        c["design.r"] = "5";
        add_scenario(c, "cy", "log_c_y", "1:3:0.25", {{"log_c_x", "1"}});
        add_scenario(c, "cx", "log_c_x", "0:2:0.25", {{"log_c_y", "2"}});
        for (const char* s : {"cy", "cx"}) {
            add_panel(c, n + "-u1-" + s, s, "subspace_distance", 1);
            add_panel(c, n + "-u2-" + s, s, "subspace_distance", 2);
        }
        return c;
    }
    if (n == "figA2") {
        auto c = base(n, "tucker");
        c["run.methods"] = "PCHOOI,SVD-Y,HOOI";
        c["design.p"] = "50";
        c["design.T"] = "40";
        c["design.log_c_x"] = "0";
        c["design.log_c_y"] = "1";
        add_scenario(c, "r", "r", "2:13:1");
        add_panel(c, n + "-u1", "r", "subspace_distance", 1);
        add_panel(c, n + "-u2", "r", "subspace_distance", 2);
        return c;
    }
    if (n == "fig2" || n == "fig3") {
        return gamma_preset(n, n == "fig3", "-0.5", "-0.45:0.1:0.05", "-0.1", "-0.7:-0.3:0.05");
    }
    if (n == "figA3" || n == "figA4") {
        return gamma_preset(n, n == "figA4", "-0.55", "-0.45,-0.3,-0.15,0,0.15,0.3,0.5,0.75,1", "-0.2",
                            "-0.7:-0.04:0.066");
    }
    if (n == "figA5" || n == "figA6") {
        auto c = gamma_preset(n, n == "figA6", "-0.5", "-0.4:0.1:0.05", "-0.1", "-0.7:0.4:0.1");
        c["design.balance"] = "0.1,0.1,0.15,0.2,0.45";
        return c;
    }
    if (n == "figA7" || n == "figA8") {
        auto c = gamma_preset(n, n == "figA8", "-0.5", "-0.45:0.1:0.05", "-0.1", "-0.7:-0.3:0.05");
        c["design.p"] = "100";
        c["design.T"] = "60";
        return c;
    }
    if (n == "figA1") {
        auto c = base(n, "block");
        c["run.methods"] = default_methods("block");
        c["design.d"] = "3";
        c["design.sigma"] = "1";
        add_scenario(c, "balanced80", "signal_sd", "0.04:0.1:0.005", {{"p", "80"}, {"r", "5"}});
        add_scenario(c, "balanced100", "signal_sd", "0.04:0.1:0.005", {{"p", "100"}, {"r", "5"}});
        add_scenario(c, "imbalanced15", "signal_sd", "0.02:0.16:0.01",
                     {{"p", "100"}, {"r", "2"}, {"balance", "0.15,0.85"}});
        add_scenario(c, "imbalanced25", "signal_sd", "0.02:0.16:0.01",
                     {{"p", "100"}, {"r", "2"}, {"balance", "0.25,0.75"}});
        for (const char* s : {"balanced80", "balanced100", "imbalanced15", "imbalanced25"}) {
            add_panel(c, n + "-cer-" + std::string(s), s, "cer", 1);
        }
        return c;
    }
    std::string known;
    for (const auto& p : preset_names()) known += (known.empty() ? "" : ", ") + p;
    throw ConfigError("unknown preset '" + n + "' (known: " + known + ")");
}

ConfigMap parse_config_text(std::string_view text) {
    const auto first = text.find_first_not_of(" \t\r\n");
    ConfigMap out;
    if (first != std::string_view::npos && text[first] == '{') {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(text);
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError(std::string("invalid JSON config: ") + e.what());
        }
        if (j.is_object() && j.contains("config") && j.contains("config_hash")) j = j.at("config");
        flatten_json(j, "", out);
        return out;
    }
    boost::property_tree::ptree tree;
    std::istringstream in{std::string(text)};
    try {
        boost::property_tree::ini_parser::read_ini(in, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ConfigError(std::string("invalid INI config: ") + e.what());
    }
    for (const auto& [section, body] : tree) {
        if (body.empty()) throw ConfigError("key '" + section + "' is outside a section");
        for (const auto& [key, value] : body) {
            if (!value.empty()) throw ConfigError("nested value under " + section + "." + key);
            out[section + "." + key] = trim(value.data());
        }
    }
    return out;
}

ConfigMap parse_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

void apply_override(ConfigMap& config, std::string_view assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string_view::npos || eq == 0) {
        throw ConfigError("override '" + std::string(assignment) + "' is not key=value");
    }
    auto key = trim(assignment.substr(0, eq));
    const auto value = trim(assignment.substr(eq + 1));
    if (key.find('.') == std::string::npos) {
        if (find_key(kDesignKeys, key)) {
            key = "design." + key;
        } else if (find_key(kRunKeys, key)) {
            key = "run." + key;
        } else if (find_key(kAlgorithmKeys, key)) {
            key = "algorithm." + key;
        } else {
            throw ConfigError("unknown override key '" + key + "'");
        }
    }
    config[key] = value;
}

ConfigMap resolve_presets(const ConfigMap& config) {
    const auto it = config.find("run.preset");
    if (it == config.end()) return config;
    auto out = preset(it->second);
    for (const auto& [k, v] : config) out[k] = v;
    return out;
}

void validate_config(const ConfigMap& config) {
    std::set<std::string> scenarios;
    for (const auto& [full, value] : config) {
        const auto s = split_key(full);
        const Key* spec = nullptr;
        if (s.section == "run") {
            spec = find_key(kRunKeys, s.key);
        } else if (s.section == "design") {
            spec = find_key(kDesignKeys, s.key);
        } else if (s.section == "algorithm") {
            spec = find_key(kAlgorithmKeys, s.key);
        } else if (s.section == "scenario") {
            spec = find_key(kScenarioKeys, s.key);
            if (!spec) spec = find_key(kDesignKeys, s.key);
            scenarios.insert(s.name);
        } else if (s.section == "panel") {
            spec = find_key(kPanelKeys, s.key);
        } else {
            throw ConfigError("unknown section '" + s.section + "' (key " + full + ")");
        }
        if (!spec) throw ConfigError("unknown key '" + full + "'");
        check_value(full, *spec, value);
    }
    if (config.count("run.replications") && to_integer("run.replications", config.at("run.replications")) < 1) {
        throw ConfigError("run.replications must be >= 1");
    }
    for (const auto& name : scenarios) {
        const auto prefix = "scenario." + name + ".";
        for (const char* k : {"parameter", "values"}) {
            if (!config.count(prefix + k)) throw ConfigError("scenario " + name + " lacks '" + k + "'");
        }
        const auto& parameter = config.at(prefix + "parameter");
        if (std::find(std::begin(kSweepable), std::end(kSweepable), parameter) == std::end(kSweepable)) {
            throw ConfigError("scenario " + name + ": '" + parameter + "' is not a numeric design key");
        }
    }
    for (const auto& name : names_in(config, "panel")) {
        const auto prefix = "panel." + name + ".";
        for (const char* k : {"scenario", "metric", "mode"}) {
            if (!config.count(prefix + k)) throw ConfigError("panel " + name + " lacks '" + k + "'");
        }
        if (!scenarios.count(config.at(prefix + "scenario"))) {
            throw ConfigError("panel " + name + " refers to unknown scenario '" + config.at(prefix + "scenario") + "'");
        }
    }
}

Design build_design(const ConfigMap& config) {
    validate_config(config);
    return design_from(section(config, "design."));
}

ExperimentPlan build_plan(const ConfigMap& config) {
    validate_config(config);
    const Kv design = section(config, "design.");
    const Kv run = section(config, "run.");
    const Kv algo = section(config, "algorithm.");

    ExperimentPlan plan;
    auto& spec = plan.spec;
    spec.methods = parse_methods(get(run, "methods", default_methods(get(design, "model", "pmtc"))));
    spec.replications = static_cast<int>(to_integer("run.replications", get(run, "replications", "100")));
    spec.seed = to_uinteger("run.seed", get(run, "seed", "0"));

    auto& st = spec.settings;
    st.kmeans_restarts = static_cast<int>(to_integer("algorithm.kmeans_restarts", get(algo, "kmeans_restarts", "10")));
    if (st.kmeans_restarts < 1) throw ConfigError("algorithm.kmeans_restarts must be >= 1");
    st.kappa = to_real("algorithm.kappa", get(algo, "kappa", "0"));
    const auto iters = get(algo, "lloyd_iters", "auto");
    if (iters != "auto") st.lloyd_iters = static_cast<int>(to_integer("algorithm.lloyd_iters", iters));
    st.schedule = get(algo, "schedule", "simultaneous") == "sequential" ? UpdateSchedule::sequential
                                                                          : UpdateSchedule::simultaneous;
    st.omega = to_real("algorithm.omega", get(algo, "omega", "1"));
    if (!(st.omega >= 0.0)) throw ConfigError("algorithm.omega must be >= 0");
    st.pchooi_max_iter = static_cast<int>(to_integer("algorithm.pchooi_max_iter", get(algo, "pchooi_max_iter", "50")));
    st.pchooi_tol = to_real("algorithm.pchooi_tol", get(algo, "pchooi_tol", "1e-6"));
    st.demean = to_bool("algorithm.demean", get(algo, "demean", "true"));

    const auto scenario_names = names_in(config, "scenario");
    if (scenario_names.empty()) {
        spec.scenarios.push_back({"base", "point", {{0.0, design_from(design)}}});
        plan.x_names["base"] = "point";
    }
    for (const auto& name : scenario_names) {
        Kv kv = design;
        const auto own = section(config, "scenario." + name + ".");
        for (const auto& [k, v] : own) {
            if (k != "parameter" && k != "values") kv[k] = v;
        }
        Scenario scenario{name, own.at("parameter"), {}};
        for (double x : to_grid("scenario." + name + ".values", own.at("values"))) {
            kv[scenario.parameter] = format_double(x);
            try {
                scenario.points.push_back({x, design_from(kv)});
            } catch (const ConfigError& e) {
                throw ConfigError("scenario " + name + " at " + scenario.parameter + "=" + format_double(x) + ": " +
                                  e.what());
            }
        }
        plan.x_names[name] = scenario.parameter;
        spec.scenarios.push_back(std::move(scenario));
    }
    for (const auto& scenario : spec.scenarios) {
        for (const auto& point : scenario.points) {
            try {
                check_methods(point.design, spec.methods);
            } catch (const std::invalid_argument& e) {
                throw ConfigError(e.what());
            }
        }
    }

    for (const auto& name : names_in(config, "panel")) {
        const auto own = section(config, "panel." + name + ".");
        plan.panels.push_back({get(own, "file", name + ".csv"), own.at("scenario"), own.at("metric"),
                               static_cast<int>(to_integer("panel." + name + ".mode", own.at("mode")))});
    }
    return plan;
}

std::string canonical_text(const ConfigMap& config) {
    std::string out;
    for (const auto& [k, v] : config) out += k + "=" + v + "\n";
    return out;
}

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string schema_text() {
    std::string out;
    const auto emit = [&](const std::string& header, const auto& table) {
        out += "[" + header + "]\n";
        for (const Key& k : table) {
            std::string line = "  " + std::string(k.name);
            line.resize(std::max<std::size_t>(line.size() + 1, 20), ' ');
            out += line + std::string(k.help);
            if (k.kind == Kind::choice) out += " {" + std::string(k.choices) + "}";
            out += "\n";
        }
    };
    emit("run", kRunKeys);
    emit("design", kDesignKeys);
    emit("algorithm", kAlgorithmKeys);
    emit("scenario.<name>", kScenarioKeys);
    out += "  (any design key)   fixed value for this scenario\n";
    emit("panel.<name>", kPanelKeys);
    return out;
}

}  // namespace pmtc
