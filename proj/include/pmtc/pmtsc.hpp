#pragma once

#include "pmtc/kmeans.hpp"
#include "pmtc/linalg.hpp"
#include "pmtc/model.hpp"

#include <vector>

namespace pmtc {

struct PmtscOptions {
    KmeansOptions kmeans;
    double omega = 1.0;
    Source source = Source::coupled;
};

struct SpectralInit {
    std::vector<Membership> memberships;
    // Row embedding of each Ẑ_i.  Rows have the same pairwise distances as
    // the rows of Ẑ_i, so k-means on either gives the same partition.
    std::vector<Matrix> embeddings;
    std::vector<double> kmeans_objectives;
};

// Spectral initialization: project X (and Y for mode 1) on the estimated
// subspaces and run relaxed k-means per mode.  Mode i uses k-means seed
// options.kmeans.seed + i.
SpectralInit pmtsc(const CoupledData& data, std::span<const int> num_clusters, const std::vector<OrthonormalBasis>& bases,
                   const PmtscOptions& options = {});

// Ẑ_i = Û_iÛ_iᵀ G_i for every mode, G_i being the projected unfolding
// (with Y appended for mode 1 when coupled).  Dense, for small problems.
std::vector<Matrix> spectral_matrices(const CoupledData& data, const std::vector<OrthonormalBasis>& bases,
                                      double omega, Source source);

// Spectral clustering of the rows of Y on its top-r left singular subspace.
KmeansResult spectral_clustering(const Matrix& y, int num_clusters, const KmeansOptions& options = {});

// Rows of u·g with the same pairwise geometry, using at most rank(g) columns.
Matrix reduced_row_embedding(const Matrix& u, const Matrix& g);

}  // namespace pmtc
