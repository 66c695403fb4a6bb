#pragma once

#include "pmtc/membership.hpp"
#include "pmtc/tensor.hpp"

#include <optional>
#include <span>
#include <vector>

namespace pmtc {

enum class PermutationSearch {
    automatic,   // exhaustive for r ≤ 8, matching otherwise
    exhaustive,  // all r! permutations
    matching,    // maximum-weight assignment on the confusion matrix
};

struct CerResult {
    double rate;
    // permutation[a] = estimated label matched to true label a.
    std::vector<int> permutation;
};

// Fraction of entities whose estimated label differs from the permuted true
// label, minimized over label permutations.
CerResult cer(const Membership& estimate, const Membership& truth, PermutationSearch search = PermutationSearch::automatic);

// Maximum-weight perfect matching on a square weight matrix (Hungarian
// method).  Returns assignment[row] = column.
std::vector<int> max_weight_matching(const Matrix& weight);

// Block centers indexed by true label: rows of the rescaled core S_i and,
// for the coupled mode only, rows of S_Y.
struct ClusterCenters {
    Matrix tensor_rows;
    std::optional<Matrix> outcome_rows;
};

// Mean squared distance between the center of each entity's estimated
// cluster (mapped back through the permutation) and its true center.  An
// empty permutation means "use the CER-optimal one".
double misclustering_loss(const Membership& estimate, const Membership& truth, const ClusterCenters& centers,
                          std::span<const int> permutation = {});

// S_i = mat_i(S ×_{j≠i} Λ_j) over the clustered modes of the core.
Matrix rescaled_core(const DenseTensor& core, const std::vector<Membership>& memberships, std::size_t mode);

struct SeparationStats {
    std::vector<double> delta_sq;    // Δ_i², +∞ when r_i = 1
    std::vector<double> delta_x_sq;  // Δ_{i,x}²
    double delta_y_sq;               // Δ_y² (+∞ when r₁ = 1, NaN without S_Y)
    double delta_min;                // min_i Δ_i
    bool degenerate() const { return delta_min == 0.0; }
};

SeparationStats separations(const DenseTensor& core, const std::vector<Membership>& memberships,
                            const std::optional<Matrix>& outcome_centers);

// Smallest squared distance between distinct rows (+∞ for one row).
double min_pairwise_sq_distance(const Matrix& rows);

struct EvalInput {
    Matrix returns;         // Y, p₁ × T
    Matrix factors;         // F, m₁ × T
    Vector market_excess;   // R_t^{mkt−rf}, length T
    Membership membership;  // mode-1 groups
    Matrix loadings;        // r₁ × m₁
};

// 1 − Σ(Y − fitted)² / Σ(Y − R^{mkt})², fitted_{it} = b̂_{g_i}ᵀ f_t.
// Throws DegenerateError on a zero denominator.
double total_r2(const EvalInput& input);

}  // namespace pmtc
