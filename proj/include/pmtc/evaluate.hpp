#pragma once

#include "pmtc/factors.hpp"
#include "pmtc/kmeans.hpp"
#include "pmtc/model.hpp"
#include "pmtc/pmtlloyd.hpp"

#include <optional>
#include <string>
#include <vector>

namespace pmtc {

// Replaces every mode-1 fiber (one characteristic's cross-section at one
// period) by its ranks scaled into [0, 1], ties sharing their average rank.
// A cross-section of one entity maps to 0.5.
DenseTensor rank_normalize(const DenseTensor& x);

// Periods [begin, end) of X (trailing mode) and Y.
CoupledData slice_periods(const CoupledData& data, std::size_t begin, std::size_t end);
Matrix slice_columns(const Matrix& m, std::size_t begin, std::size_t end);

struct FitOptions {
    std::vector<int> clusters;  // r_i for each clustered mode
    double omega = 1.0;
    FactorKind factors = FactorKind::observed;
    int num_factors = 0;  // latent only
    bool demean = true;   // observed only
    KmeansOptions kmeans;
    std::optional<int> lloyd_iters;
    Projection projection = Projection::orthogonal;
    UpdateSchedule schedule = UpdateSchedule::simultaneous;
    int pchooi_max_iter = 50;
    double pchooi_tol = 1e-6;
};

struct FitResult {
    std::vector<Membership> memberships;
    FactorEstimate loadings;
    LloydTrace trace;
    int pchooi_iterations = 0;
    bool pchooi_converged = false;
};

// PCHOOI, PMTSC and PMTLloyd on the coupled data, then group loadings from
// the final mode-1 groups.  f (m₁ × T) is required for observed factors.
FitResult fit_panel(const CoupledData& data, const std::optional<Matrix>& f, const FitOptions& options);

// Factor values implied by group loadings over a window: f itself for
// observed factors, Û_Bᵀ·(cluster means of y) for latent ones.
Matrix window_factors(const FactorEstimate& estimate, const Matrix& y, const Membership& m1,
                      const std::optional<Matrix>& f);

struct R2Window {
    std::string label;
    double ins;                 // fraction, not percent
    std::optional<double> oos;  // absent when the window has no successor
};

// Fixed loadings; in-sample over [0, split), out-of-sample over [split, T).
R2Window evaluate_split(const Matrix& y, const std::optional<Matrix>& f, const Vector& market, const Membership& m1,
                        const FactorEstimate& estimate, std::size_t split);

// Groups fixed; loadings re-estimated on each run of equal consecutive
// labels and scored on the next run.
std::vector<R2Window> evaluate_rolling(const Matrix& y, const std::optional<Matrix>& f, const Vector& market,
                                       const Membership& m1, FactorKind kind, int num_factors, bool demean,
                                       const std::vector<std::string>& labels);

}  // namespace pmtc
