#pragma once

#include "pmtc/linalg.hpp"
#include "pmtc/model.hpp"

#include <vector>

namespace pmtc {

struct PchooiOptions {
    int max_iter = 50;
    double tol = 1e-6;
    // Weight of the tensor block in the mode-1 concatenation, [√ω·mat₁(·), Y].
    double omega = 1.0;
    // tensor_only gives plain HOOI on X.
    Source source = Source::coupled;
    // Form X̂ and Ŷ; the simulation harness skips them.
    bool compute_denoised = true;
};

struct PchooiResult {
    std::vector<OrthonormalBasis> bases;  // Û_i, p_i × m_i
    DenseTensor x_hat;                    // X ×_i Û_iÛ_iᵀ
    Matrix y_hat;                         // Û₁Û₁ᵀY (empty for tensor_only)
    int iterations = 0;
    bool converged = false;
    // max_i ‖Û_i⁽ᵏ⁾Û_i⁽ᵏ⁾ᵀ − Û_i⁽ᵏ⁻¹⁾Û_i⁽ᵏ⁻¹⁾ᵀ‖₂² for each iteration k.
    std::vector<double> stop_values;
};

// Coupled higher-order orthogonal iteration over the d clustered modes of X,
// with the outcome panel joined to the mode-1 SVD step.  ranks has length d.
PchooiResult pchooi(const CoupledData& data, std::span<const Eigen::Index> ranks, const PchooiOptions& options = {});

// HOOI on X alone (Y ignored).
PchooiResult hooi(const DenseTensor& x, std::span<const Eigen::Index> ranks, PchooiOptions options = {});

// Top-m₁ left singular subspace of Y alone.
OrthonormalBasis outcome_svd(const Matrix& y, Eigen::Index rank);

}  // namespace pmtc
