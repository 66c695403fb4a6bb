#pragma once

#include "pmtc/membership.hpp"
#include "pmtc/model.hpp"

#include <optional>
#include <vector>

namespace pmtc {

enum class Projection {
    orthogonal,  // Ŵ_j (normalized membership columns) on the other modes
    oblique,     // P̂_j = M̂_j(M̂_jᵀM̂_j)⁻¹ on the other modes (high-order Lloyd)
};

enum class UpdateSchedule {
    // Every mode in iteration k uses the iteration k-1 memberships of the
    // other modes.
    simultaneous,
    // Mode i uses iteration-k memberships for modes j < i.
    sequential,
};

struct LloydOptions {
    // Unset: 2⌈ln p̄⌉.
    std::optional<int> max_iter;
    Projection projection = Projection::orthogonal;
    UpdateSchedule schedule = UpdateSchedule::simultaneous;
    double omega = 1.0;
    Source source = Source::coupled;
    bool record_trace = true;
};

struct LloydStep {
    std::vector<Membership> memberships;
    std::vector<Matrix> centroids;  // Ĉ_i, empty for the initial step
    double loss;                    // coupled least-squares loss at plug-in centers
};

struct LloydTrace {
    // steps[0] is the (repaired) initialization, steps[k] iteration k.
    std::vector<LloydStep> steps;
    int iterations_used = 0;
    bool converged = false;
};

struct LloydResult {
    std::vector<Membership> memberships;
    LloydTrace trace;
};

int recovery_iterations(std::size_t max_dim);

// Lloyd refinement of the per-mode memberships (centroids by block averaging,
// nearest-centroid reassignment).  Stops early when no label changes.
LloydResult pmtlloyd(const CoupledData& data, std::vector<Membership> init, const LloydOptions& options = {});

// ω·‖X − Ŝ ×_i M_i‖² + ‖Y − M₁Ŝ_Y‖² with Ŝ, Ŝ_Y the block means.
double coupled_loss(const CoupledData& data, const std::vector<Membership>& memberships, double omega, Source source);

// Moves the farthest point (largest distance, lowest index on ties) into each
// empty cluster, never emptying its donor.
Membership fill_empty_clusters(const Membership& m, const Vector& squared_distance);

}  // namespace pmtc
