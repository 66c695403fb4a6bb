#pragma once

#include "pmtc/linalg.hpp"
#include "pmtc/membership.hpp"

namespace pmtc {

enum class FactorKind { latent, observed };

// How cluster rows of Y are pooled before estimation.
enum class GroupPooling {
    // Cluster means, P̂ᵀY.  Noiseless observed estimates reproduce B exactly.
    mean,
    // Normalized columns, ŴᵀY = Λ·P̂ᵀY.  Noiseless observed estimates are Λ·B.
    normalized,
};

struct FactorEstimate {
    FactorKind kind = FactorKind::observed;
    Matrix u_b;    // latent: r₁ × m₁ orthonormal loading basis
    Matrix f_hat;  // latent: m₁ × T factor estimates
    Matrix b;      // observed: r₁ × m₁ group loadings

    // Group-level loading rows (u_b for latent, b for observed).
    const Matrix& loadings() const { return kind == FactorKind::latent ? u_b : b; }
};

// Û_B = LSVD_m(G YYᵀ Gᵀ / T), F̂ = Û_Bᵀ G Y with G the pooling operator.
// Throws DegenerateError when the pooled second moment is zero.
FactorEstimate estimate_latent(const Matrix& y, const Membership& m1, int num_factors,
                               GroupPooling pooling = GroupPooling::mean);

// B̂ = G Y Fᵀ(FFᵀ)⁻¹, optionally after removing time-series means from Y and F.
// Throws DegenerateError when FFᵀ has condition number ≥ 1e12.
FactorEstimate estimate_observed(const Matrix& y, const Membership& m1, const Matrix& f, bool demean = true,
                                 GroupPooling pooling = GroupPooling::mean);

// Row j is the loading row of j's cluster.
Matrix per_asset_loadings(const FactorEstimate& estimate, const Membership& m1);

// Asset-by-asset least squares without grouping, p₁ × m₁.
Matrix ungrouped_loadings(const Matrix& y, const Matrix& f, bool demean = true);

}  // namespace pmtc
