#include "pmtc/membership.hpp"

#include "pmtc/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace pmtc {

Membership::Membership(std::vector<int> labels, int num_clusters)
    : labels_(std::move(labels)), num_clusters_(num_clusters), sizes_(static_cast<std::size_t>(std::max(num_clusters, 0)), 0) {
    if (num_clusters < 1) throw std::invalid_argument("membership needs at least one cluster");
    for (int g : labels_) {
        if (g < 0 || g >= num_clusters) {
            throw std::invalid_argument("label " + std::to_string(g + 1) + " outside 1.." + std::to_string(num_clusters));
        }
        ++sizes_[static_cast<std::size_t>(g)];
    }
}

bool Membership::has_empty_cluster() const {
    return std::find(sizes_.begin(), sizes_.end(), std::size_t{0}) != sizes_.end();
}

namespace {

void require_nonempty(const Membership& m) {
    const auto& sizes = m.cluster_sizes();
    for (std::size_t a = 0; a < sizes.size(); ++a) {
        if (sizes[a] == 0) throw EmptyClusterError(a);
    }
}

}  // namespace

Matrix one_hot(const Membership& m) {
    Matrix out = Matrix::Zero(static_cast<Eigen::Index>(m.size()), m.num_clusters());
    for (std::size_t j = 0; j < m.size(); ++j) out(static_cast<Eigen::Index>(j), m[j]) = 1.0;
    return out;
}

Matrix projector(const Membership& m) {
    require_nonempty(m);
    Matrix out = Matrix::Zero(static_cast<Eigen::Index>(m.size()), m.num_clusters());
    const auto& sizes = m.cluster_sizes();
    for (std::size_t j = 0; j < m.size(); ++j) {
        out(static_cast<Eigen::Index>(j), m[j]) = 1.0 / static_cast<double>(sizes[static_cast<std::size_t>(m[j])]);
    }
    return out;
}

Vector scale(const Membership& m) {
    require_nonempty(m);
    Vector out(m.num_clusters());
    for (int a = 0; a < m.num_clusters(); ++a) {
        out(a) = std::sqrt(static_cast<double>(m.cluster_sizes()[static_cast<std::size_t>(a)]));
    }
    return out;
}

OrthonormalBasis normalized_basis(const Membership& m) {
    const Vector lambda = scale(m);
    Matrix w = Matrix::Zero(static_cast<Eigen::Index>(m.size()), m.num_clusters());
    for (std::size_t j = 0; j < m.size(); ++j) w(static_cast<Eigen::Index>(j), m[j]) = 1.0 / lambda(m[j]);
    return OrthonormalBasis(std::move(w));
}

Membership permute_labels(const Membership& m, const std::vector<int>& perm) {
    const auto r = static_cast<std::size_t>(m.num_clusters());
    if (perm.size() != r) throw std::invalid_argument("permutation length must equal cluster count");
    std::vector<bool> seen(r, false);
    for (int a : perm) {
        if (a < 0 || static_cast<std::size_t>(a) >= r || seen[static_cast<std::size_t>(a)]) {
            throw std::invalid_argument("labels permutation is not a bijection");
        }
        seen[static_cast<std::size_t>(a)] = true;
    }
    std::vector<int> labels(m.size());
    for (std::size_t j = 0; j < m.size(); ++j) labels[j] = perm[static_cast<std::size_t>(m[j])];
    return {std::move(labels), m.num_clusters()};
}

Matrix cluster_means(const Matrix& z, const Membership& m) {
    if (static_cast<std::size_t>(z.rows()) != m.size()) throw ShapeError("cluster_means: row count mismatch");
    require_nonempty(m);
    Matrix out = Matrix::Zero(m.num_clusters(), z.cols());
    for (std::size_t j = 0; j < m.size(); ++j) out.row(m[j]) += z.row(static_cast<Eigen::Index>(j));
    for (int a = 0; a < m.num_clusters(); ++a) {
        out.row(a) /= static_cast<double>(m.cluster_sizes()[static_cast<std::size_t>(a)]);
    }
    return out;
}

}  // namespace pmtc
