#pragma once

#include "pmtc/linalg.hpp"

#include <cstddef>
#include <vector>

namespace pmtc {

// Hard cluster assignment of p entities into r clusters.
//
// Labels are 0-based in memory; serialized output is 1-based.
class Membership {
public:
    Membership() = default;
    // Throws std::invalid_argument if any label is outside [0, num_clusters).
    Membership(std::vector<int> labels, int num_clusters);

    std::size_t size() const { return labels_.size(); }
    int num_clusters() const { return num_clusters_; }
    const std::vector<int>& labels() const { return labels_; }
    int operator[](std::size_t j) const { return labels_[j]; }
    const std::vector<std::size_t>& cluster_sizes() const { return sizes_; }
    bool has_empty_cluster() const;

    friend bool operator==(const Membership&, const Membership&) = default;

private:
    std::vector<int> labels_;
    int num_clusters_ = 0;
    std::vector<std::size_t> sizes_;
};

// M ∈ {0,1}^{p×r}
Matrix one_hot(const Membership& m);

// P = M (MᵀM)⁻¹; column a averages the members of cluster a.
// Throws EmptyClusterError.
Matrix projector(const Membership& m);

// W = M Λ⁻¹ with Λ = diag(√sizes).  Throws EmptyClusterError.
OrthonormalBasis normalized_basis(const Membership& m);
Vector scale(const Membership& m);  // diagonal of Λ

// Relabels a -> perm[a].  Throws std::invalid_argument unless perm is a
// bijection on [0, r).
Membership permute_labels(const Membership& m, const std::vector<int>& perm);

// Per-cluster row means of z (the rows of Pᵀz), without forming P.
Matrix cluster_means(const Matrix& z, const Membership& m);

}  // namespace pmtc
