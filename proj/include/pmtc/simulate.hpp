#pragma once

#include "pmtc/linalg.hpp"
#include "pmtc/membership.hpp"
#include "pmtc/metrics.hpp"
#include "pmtc/model.hpp"

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace pmtc {

// A design that cannot be generated (rank above dimension, bad weights, ...).
class DesignError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

enum class NoiseLaw {
    gaussian,
    rademacher,  // ±σ with equal probability; sub-Gaussian with norm σ
};

// Coupled panel design with SNR-normalized core and loadings.
struct SimDesign {
    std::vector<std::size_t> dims{200, 200};
    std::size_t periods = 120;
    std::vector<int> ranks{5, 5};
    int num_factors = 5;
    double sigma_x = 1.0;
    double sigma_y = 1.0;
    double sigma_s = 1.0;
    double sigma_b = 1.0;
    double sigma_f = 1.0;
    std::vector<double> mu_b{1.0, 1.0, 1.0, 0.0, 0.0};
    std::vector<double> mu_f{0.03, 0.03, 0.03, 0.03, 0.03};
    double c_x = 1.0;
    double c_y = 1.0;
    double gamma_x = -0.5;
    double gamma_y = -0.1;
    bool normalize_snr = true;
    // Cluster probabilities per mode; an empty entry (or missing mode) means
    // uniform.
    std::vector<std::vector<double>> balance;
    NoiseLaw noise = NoiseLaw::gaussian;
    std::uint64_t seed = 0;
};

// Low-rank Tucker design with orthonormal loadings (no cluster structure).
struct TuckerDesign {
    std::vector<std::size_t> dims{50, 50};
    std::size_t periods = 40;
    std::vector<int> ranks{5, 5};
    double sigma_x = 1.0;
    double sigma_y = 1.0;
    // λ_min(core) = e^{log_c_x}·√(p₁ + m_*T), λ_min(F_Y) = e^{log_c_y}·√(p₁ + T)
    double log_c_x = 1.0;
    double log_c_y = 2.0;
    NoiseLaw noise = NoiseLaw::gaussian;
    std::uint64_t seed = 0;
};

// Tensor block model X = S ×_i M_i + E of order `order` (stored with a
// trailing time mode of length 1 and no outcome panel).
struct BlockDesign {
    std::size_t order = 3;
    std::size_t dim = 100;
    int clusters = 2;
    double sigma = 1.0;
    double signal_sd = 1.0;
    std::vector<double> balance;  // empty: uniform
    NoiseLaw noise = NoiseLaw::gaussian;
    std::uint64_t seed = 0;
};

struct GroundTruth {
    std::vector<Membership> memberships;  // empty for Tucker designs
    DenseTensor core;
    Matrix b;    // r₁ × m₁
    Matrix f;    // m₁ × T
    Matrix s_y;  // r₁ × T (Tucker designs: F_Y)
    std::optional<SeparationStats> separations;
    std::vector<OrthonormalBasis> bases;  // true column spaces per mode
};

struct SimulatedPanel {
    CoupledData data;
    GroundTruth truth;
    int attempts = 1;
};

double target_snr_x(const SimDesign& design);
double target_snr_y(const SimDesign& design);

// Redraws (up to 100 times, with derived sub-seeds) when a cluster comes out
// empty or two block centers coincide; throws DesignError after that.
SimulatedPanel gen_pmtc(const SimDesign& design);
SimulatedPanel gen_tucker(const TuckerDesign& design);
SimulatedPanel gen_tensor_block(const BlockDesign& design);

}  // namespace pmtc
