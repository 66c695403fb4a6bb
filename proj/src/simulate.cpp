#include "pmtc/simulate.hpp"

#include "pmtc/random.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <random>
#include <string>

namespace pmtc {

namespace {

constexpr int kMaxAttempts = 100;

enum Stream : std::uint64_t { kLabels = 1, kCore, kLoadings, kFactors, kTensorNoise, kOutcomeNoise, kBases };

struct Redraw {};

void fill_noise(std::span<double> out, double sigma, NoiseLaw law, std::mt19937_64& rng) {
    if (sigma == 0.0) {
        std::fill(out.begin(), out.end(), 0.0);
        return;
    }
    if (law == NoiseLaw::gaussian) {
        std::normal_distribution<double> normal(0.0, sigma);
        for (auto& v : out) v = normal(rng);
    } else {
        std::bernoulli_distribution coin(0.5);
        for (auto& v : out) v = coin(rng) ? sigma : -sigma;
    }
}

Matrix gaussian_matrix(Eigen::Index rows, Eigen::Index cols, double sd, std::mt19937_64& rng) {
    Matrix m(rows, cols);
    std::normal_distribution<double> normal(0.0, sd);
    for (Eigen::Index c = 0; c < cols; ++c) {
        for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = normal(rng);
    }
    return m;
}

DenseTensor gaussian_tensor(std::vector<std::size_t> dims, double sd, std::mt19937_64& rng) {
    DenseTensor t(std::move(dims));
    std::normal_distribution<double> normal(0.0, sd);
    for (auto& v : t.data()) v = normal(rng);
    return t;
}

Membership draw_labels(std::size_t p, int r, const std::vector<double>& weights, std::mt19937_64& rng) {
    std::vector<double> w = weights.empty() ? std::vector<double>(static_cast<std::size_t>(r), 1.0) : weights;
    std::discrete_distribution<int> draw(w.begin(), w.end());
    std::vector<int> labels(p);
    for (auto& g : labels) g = draw(rng);
    Membership m(std::move(labels), r);
    if (m.has_empty_cluster()) throw Redraw{};
    return m;
}

void check_balance(const std::vector<double>& w, int r, const std::string& what) {
    if (w.empty()) return;
    if (w.size() != static_cast<std::size_t>(r)) {
        throw DesignError(what + ": balance has " + std::to_string(w.size()) + " weights for " + std::to_string(r) +
                          " clusters");
    }
    double total = 0.0;
    for (double v : w) {
        if (!(v > 0.0) || !std::isfinite(v)) throw DesignError(what + ": balance weights must be positive");
        total += v;
    }
    if (std::abs(total - 1.0) > 1e-9) throw DesignError(what + ": balance weights must sum to 1");
}

// X = S ×_i M_i + E
DenseTensor expand_blocks(const DenseTensor& core, const std::vector<Membership>& memberships) {
    DenseTensor x = core;
    for (std::size_t i = 0; i < memberships.size(); ++i) x = mode_product(x, i, one_hot(memberships[i]));
    return x;
}

void add_noise(DenseTensor& x, double sigma, NoiseLaw law, std::mt19937_64& rng) {
    std::vector<double> noise(x.size());
    fill_noise(noise, sigma, law, rng);
    auto data = x.data();
    for (std::size_t k = 0; k < data.size(); ++k) data[k] += noise[k];
}

void add_noise(Matrix& y, double sigma, NoiseLaw law, std::mt19937_64& rng) {
    fill_noise(std::span<double>(y.data(), static_cast<std::size_t>(y.size())), sigma, law, rng);
}

template <typename Build>
SimulatedPanel with_redraws(std::uint64_t seed, Build build) {
    for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
        try {
            SimulatedPanel panel = build(seed, static_cast<std::uint64_t>(attempt));
            panel.attempts = attempt + 1;
            return panel;
        } catch (const Redraw&) {
        }
    }
    throw DesignError("design produced degenerate draws (empty cluster or coincident centers) in " +
                      std::to_string(kMaxAttempts) + " attempts");
}

double min_sigma_min(const DenseTensor& core, std::size_t modes) {
    double lo = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < modes; ++i) {
        Eigen::JacobiSVD<Matrix> svd(matricize(core, i));
        lo = std::min(lo, svd.singularValues().minCoeff());
    }
    return lo;
}

}  // namespace

double target_snr_x(const SimDesign& design) {
    const double p_bar = static_cast<double>(*std::max_element(design.dims.begin(), design.dims.end()));
    const double p_star = std::accumulate(design.dims.begin(), design.dims.end(), 1.0,
                                          [](double acc, std::size_t v) { return acc * static_cast<double>(v); });
    return design.c_x * (static_cast<double>(design.periods) + p_bar) * std::pow(p_star, design.gamma_x);
}

double target_snr_y(const SimDesign& design) {
    const double p_bar = static_cast<double>(*std::max_element(design.dims.begin(), design.dims.end()));
    const double p_star = std::accumulate(design.dims.begin(), design.dims.end(), 1.0,
                                          [](double acc, std::size_t v) { return acc * static_cast<double>(v); });
    const double r2 = design.ranks.size() > 1 ? static_cast<double>(design.ranks[1]) : 1.0;
    return design.c_y * (static_cast<double>(design.periods) + p_bar) * std::pow(p_star, design.gamma_y) / r2;
}

SimulatedPanel gen_pmtc(const SimDesign& design) {
    const std::size_t d = design.dims.size();
    if (d == 0 || design.ranks.size() != d) throw DesignError("design needs one rank per clustered mode");
    if (design.periods == 0) throw DesignError("design needs at least one period");
    for (std::size_t i = 0; i < d; ++i) {
        if (design.dims[i] == 0) throw DesignError("dimensions must be positive");
        if (design.ranks[i] < 1 || static_cast<std::size_t>(design.ranks[i]) > design.dims[i]) {
            throw DesignError("mode " + std::to_string(i + 1) + ": " + std::to_string(design.ranks[i]) +
                              " clusters for " + std::to_string(design.dims[i]) + " entities");
        }
        if (i < design.balance.size()) check_balance(design.balance[i], design.ranks[i], "mode " + std::to_string(i + 1));
    }
    if (design.num_factors < 1) throw DesignError("design needs at least one factor");
    const auto m1 = static_cast<std::size_t>(design.num_factors);
    if (design.mu_b.size() != m1 || design.mu_f.size() != m1) throw DesignError("mu_b and mu_f need one entry per factor");
    for (double s : {design.sigma_x, design.sigma_y, design.sigma_s, design.sigma_b, design.sigma_f}) {
        if (!(s >= 0.0) || !std::isfinite(s)) throw DesignError("standard deviations must be finite and >= 0");
    }
    if (!std::isfinite(design.gamma_x) || !std::isfinite(design.gamma_y)) throw DesignError("SNR exponents must be finite");

    return with_redraws(design.seed, [&](std::uint64_t seed, std::uint64_t attempt) {
        auto label_rng = make_rng({seed, attempt, kLabels});
        std::vector<Membership> memberships;
        for (std::size_t i = 0; i < d; ++i) {
            static const std::vector<double> uniform;
            const auto& w = i < design.balance.size() ? design.balance[i] : uniform;
            memberships.push_back(draw_labels(design.dims[i], design.ranks[i], w, label_rng));
        }

        std::vector<std::size_t> core_dims(design.ranks.begin(), design.ranks.end());
        core_dims.push_back(design.periods);
        auto core_rng = make_rng({seed, attempt, kCore});
        DenseTensor core = gaussian_tensor(core_dims, design.sigma_s, core_rng);

        const auto r1 = static_cast<Eigen::Index>(design.ranks[0]);
        const auto t = static_cast<Eigen::Index>(design.periods);
        const Eigen::Map<const Vector> mu_b(design.mu_b.data(), static_cast<Eigen::Index>(m1));
        const Eigen::Map<const Vector> mu_f(design.mu_f.data(), static_cast<Eigen::Index>(m1));
        auto load_rng = make_rng({seed, attempt, kLoadings});
        Matrix b = gaussian_matrix(r1, static_cast<Eigen::Index>(m1), design.sigma_b, load_rng);
        b.rowwise() += mu_b.transpose();
        auto fac_rng = make_rng({seed, attempt, kFactors});
        Matrix f = gaussian_matrix(static_cast<Eigen::Index>(m1), t, design.sigma_f, fac_rng);
        f.colwise() += mu_f;

        if (design.normalize_snr) {
            const auto raw = separations(core, memberships, Matrix(b * f));
            const double dx = *std::min_element(raw.delta_x_sq.begin(), raw.delta_x_sq.end());
            if (dx == 0.0 || raw.delta_y_sq == 0.0) throw Redraw{};
            // Noiseless designs normalize against unit noise.
            const double vx = design.sigma_x > 0.0 ? design.sigma_x * design.sigma_x : 1.0;
            const double vy = design.sigma_y > 0.0 ? design.sigma_y * design.sigma_y : 1.0;
            if (std::isfinite(dx)) {
                const double c = std::sqrt(target_snr_x(design) * vx / dx);
                for (auto& v : core.data()) v *= c;
            }
            if (std::isfinite(raw.delta_y_sq)) b *= std::sqrt(target_snr_y(design) * vy / raw.delta_y_sq);
        }
        Matrix s_y = b * f;
        auto seps = separations(core, memberships, s_y);
        if (seps.degenerate()) throw Redraw{};

        SimulatedPanel panel;
        panel.data.x = expand_blocks(core, memberships);
        panel.data.y = one_hot(memberships[0]) * s_y;
        auto xn = make_rng({seed, attempt, kTensorNoise});
        add_noise(panel.data.x, design.sigma_x, design.noise, xn);
        Matrix eta(panel.data.y.rows(), panel.data.y.cols());
        auto yn = make_rng({seed, attempt, kOutcomeNoise});
        add_noise(eta, design.sigma_y, design.noise, yn);
        panel.data.y += eta;

        for (const auto& m : memberships) panel.truth.bases.push_back(normalized_basis(m));
        panel.truth.memberships = std::move(memberships);
        panel.truth.core = std::move(core);
        panel.truth.b = std::move(b);
        panel.truth.f = std::move(f);
        panel.truth.s_y = std::move(s_y);
        panel.truth.separations = std::move(seps);
        return panel;
    });
}

SimulatedPanel gen_tucker(const TuckerDesign& design) {
    const std::size_t d = design.dims.size();
    if (d == 0 || design.ranks.size() != d) throw DesignError("design needs one rank per mode");
    if (design.periods == 0) throw DesignError("design needs at least one period");
    for (std::size_t i = 0; i < d; ++i) {
        if (design.ranks[i] < 1 || static_cast<std::size_t>(design.ranks[i]) > design.dims[i]) {
            throw DesignError("mode " + std::to_string(i + 1) + ": rank exceeds dimension");
        }
    }
    if (static_cast<std::size_t>(design.ranks[0]) > design.periods) throw DesignError("mode-1 rank exceeds periods");

    return with_redraws(design.seed, [&](std::uint64_t seed, std::uint64_t attempt) {
        auto basis_rng = make_rng({seed, attempt, kBases});
        std::vector<OrthonormalBasis> bases;
        for (std::size_t i = 0; i < d; ++i) {
            const Matrix g = gaussian_matrix(static_cast<Eigen::Index>(design.dims[i]), design.ranks[i], 1.0, basis_rng);
            bases.push_back(lsvd(g, design.ranks[i]));
        }
        std::vector<std::size_t> core_dims(design.ranks.begin(), design.ranks.end());
        core_dims.push_back(design.periods);
        auto core_rng = make_rng({seed, attempt, kCore});
        DenseTensor core = gaussian_tensor(core_dims, 1.0, core_rng);
        auto fac_rng = make_rng({seed, attempt, kFactors});
        Matrix f_y = gaussian_matrix(design.ranks[0], static_cast<Eigen::Index>(design.periods), 1.0, fac_rng);

        const double p1 = static_cast<double>(design.dims[0]);
        const double t = static_cast<double>(design.periods);
        const double m_star = std::accumulate(design.ranks.begin(), design.ranks.end(), 1.0,
                                              [](double acc, int v) { return acc * v; });
        const double core_lo = min_sigma_min(core, d);
        Eigen::JacobiSVD<Matrix> fy_svd(f_y);
        const double fy_lo = fy_svd.singularValues().minCoeff();
        if (core_lo == 0.0 || fy_lo == 0.0) throw Redraw{};
        const double core_scale = std::exp(design.log_c_x) * std::sqrt(p1 + m_star * t) / core_lo;
        for (auto& v : core.data()) v *= core_scale;
        f_y *= std::exp(design.log_c_y) * std::sqrt(p1 + t) / fy_lo;

        SimulatedPanel panel;
        DenseTensor x = core;
        for (std::size_t i = 0; i < d; ++i) x = mode_product(x, i, bases[i].matrix());
        auto xn = make_rng({seed, attempt, kTensorNoise});
        add_noise(x, design.sigma_x, design.noise, xn);
        Matrix y = bases[0].matrix() * f_y;
        Matrix eta(y.rows(), y.cols());
        auto yn = make_rng({seed, attempt, kOutcomeNoise});
        add_noise(eta, design.sigma_y, design.noise, yn);
        panel.data.x = std::move(x);
        panel.data.y = y + eta;
        panel.truth.core = std::move(core);
        panel.truth.s_y = std::move(f_y);
        panel.truth.bases = std::move(bases);
        return panel;
    });
}

SimulatedPanel gen_tensor_block(const BlockDesign& design) {
    if (design.order < 1) throw DesignError("block model needs at least one mode");
    if (design.clusters < 1 || static_cast<std::size_t>(design.clusters) > design.dim) {
        throw DesignError("block model: " + std::to_string(design.clusters) + " clusters for " +
                          std::to_string(design.dim) + " entities");
    }
    check_balance(design.balance, design.clusters, "block model");
    if (!(design.sigma >= 0.0) || !(design.signal_sd >= 0.0)) throw DesignError("standard deviations must be >= 0");

    return with_redraws(design.seed, [&](std::uint64_t seed, std::uint64_t attempt) {
        auto label_rng = make_rng({seed, attempt, kLabels});
        std::vector<Membership> memberships;
        for (std::size_t i = 0; i < design.order; ++i) {
            memberships.push_back(draw_labels(design.dim, design.clusters, design.balance, label_rng));
        }
        std::vector<std::size_t> core_dims(design.order, static_cast<std::size_t>(design.clusters));
        core_dims.push_back(1);
        auto core_rng = make_rng({seed, attempt, kCore});
        DenseTensor core = gaussian_tensor(core_dims, design.signal_sd, core_rng);
        auto seps = separations(core, memberships, std::nullopt);
        if (seps.degenerate()) throw Redraw{};

        SimulatedPanel panel;
        panel.data.x = expand_blocks(core, memberships);
        auto xn = make_rng({seed, attempt, kTensorNoise});
        add_noise(panel.data.x, design.sigma, design.noise, xn);
        for (const auto& m : memberships) panel.truth.bases.push_back(normalized_basis(m));
        panel.truth.memberships = std::move(memberships);
        panel.truth.core = std::move(core);
        panel.truth.separations = std::move(seps);
        return panel;
    });
}

}  // namespace pmtc
