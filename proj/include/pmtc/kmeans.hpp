#pragma once

#include "pmtc/membership.hpp"

#include <cstdint>

namespace pmtc {

struct KmeansOptions {
    // Relaxation factor; <= 0 selects the default 1 + log(r).
    double kappa = 0.0;
    int restarts = 10;
    int max_sweeps = 100;
    std::uint64_t seed = 0;
};

struct KmeansResult {
    Membership membership;
    Matrix centroids;   // r × q
    double objective;   // Σ_j ‖z_j − c_{g_j}‖²
    double kappa;
};

double default_kappa(int num_clusters);

// k-means++ seeding followed by Lloyd sweeps, best of `restarts` runs.  The
// winner is the lowest objective, ties going to the earliest restart, so the
// result is a deterministic function of (z, r, options).
KmeansResult kmeans_relaxed(const Matrix& z, int num_clusters, const KmeansOptions& options = {});

struct Assignment {
    Membership membership;
    Vector squared_distance;  // distance of each row to its chosen centroid
};

// Nearest centroid for every row of z; ties go to the lowest cluster index.
Assignment nearest_centroid(const Matrix& z, const Matrix& centroids);
Membership nns(const Matrix& z, const Matrix& centroids);

double kmeans_objective(const Matrix& z, const Membership& m, const Matrix& centroids);

}  // namespace pmtc
