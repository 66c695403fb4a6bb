#include "pmtc/pmtlloyd.hpp"

#include "pmtc/errors.hpp"
#include "pmtc/kmeans.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace pmtc {

int recovery_iterations(std::size_t max_dim) {
    const double lg = std::log(static_cast<double>(std::max<std::size_t>(max_dim, 2)));
    return 2 * static_cast<int>(std::ceil(lg));
}

Membership fill_empty_clusters(const Membership& m, const Vector& squared_distance) {
    if (!m.has_empty_cluster()) return m;
    if (m.size() < static_cast<std::size_t>(m.num_clusters())) {
        throw std::invalid_argument("cannot fill " + std::to_string(m.num_clusters()) + " clusters from " +
                                    std::to_string(m.size()) + " points");
    }
    std::vector<int> labels = m.labels();
    std::vector<std::size_t> sizes = m.cluster_sizes();
    std::vector<bool> moved(labels.size(), false);
    for (int a = 0; a < m.num_clusters(); ++a) {
        if (sizes[static_cast<std::size_t>(a)] != 0) continue;
        std::size_t pick = labels.size();
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < labels.size(); ++j) {
            if (moved[j] || sizes[static_cast<std::size_t>(labels[j])] < 2) continue;
            if (squared_distance(static_cast<Eigen::Index>(j)) > best) {
                best = squared_distance(static_cast<Eigen::Index>(j));
                pick = j;
            }
        }
        --sizes[static_cast<std::size_t>(labels[pick])];
        labels[pick] = a;
        ++sizes[static_cast<std::size_t>(a)];
        moved[pick] = true;
    }
    return {std::move(labels), m.num_clusters()};
}

double coupled_loss(const CoupledData& data, const std::vector<Membership>& memberships, double omega, Source source) {
    // M_i P_iᵀ = W_i W_iᵀ, so the residual is the orthogonal complement of the
    // block-constant subspace.
    std::vector<Matrix> w;
    for (const auto& m : memberships) w.push_back(normalized_basis(m).matrix());
    const DenseTensor core = project_modes(data.x, w, w.size());
    double loss = omega * std::max(0.0, data.x.squared_norm() - core.squared_norm());
    if (source == Source::coupled) {
        loss += std::max(0.0, data.y.squaredNorm() - (w[0].transpose() * data.y).squaredNorm());
    }
    return loss;
}

namespace {

// Distance of each row of z to the mean of its cluster, ignoring empty
// clusters.
Vector distance_to_own_mean(const Matrix& z, const Membership& m) {
    Matrix sums = Matrix::Zero(m.num_clusters(), z.cols());
    for (std::size_t j = 0; j < m.size(); ++j) sums.row(m[j]) += z.row(static_cast<Eigen::Index>(j));
    Vector d(static_cast<Eigen::Index>(m.size()));
    for (std::size_t j = 0; j < m.size(); ++j) {
        const double n = static_cast<double>(m.cluster_sizes()[static_cast<std::size_t>(m[j])]);
        d(static_cast<Eigen::Index>(j)) = (z.row(static_cast<Eigen::Index>(j)) - sums.row(m[j]) / n).squaredNorm();
    }
    return d;
}

Matrix raw_mode_matrix(const CoupledData& data, std::size_t mode, double omega, Source source) {
    if (mode == 0) return coupled_unfolding(data.x, data.y, omega, source);
    return matricize(data.x, mode);
}

Matrix mode_factor(const Membership& m, Projection projection) {
    return projection == Projection::orthogonal ? normalized_basis(m).matrix() : projector(m);
}

}  // namespace

LloydResult pmtlloyd(const CoupledData& data, std::vector<Membership> init, const LloydOptions& options) {
    validate(data, options.source);
    const std::size_t d = data.num_modes();
    if (init.size() != d) throw ShapeError("pmtlloyd: one initial membership per mode required");
    std::size_t max_dim = 0;
    for (std::size_t i = 0; i < d; ++i) {
        if (init[i].size() != data.x.dim(i)) {
            throw ShapeError("pmtlloyd: initial membership " + std::to_string(i + 1) + " has " +
                             std::to_string(init[i].size()) + " labels, mode has " + std::to_string(data.x.dim(i)));
        }
        max_dim = std::max(max_dim, data.x.dim(i));
    }
    const int max_iter = options.max_iter.value_or(recovery_iterations(max_dim));
    if (max_iter < 1) throw std::invalid_argument("pmtlloyd: max_iter must be >= 1");

    for (std::size_t i = 0; i < d; ++i) {
        if (init[i].has_empty_cluster()) {
            const Matrix z = raw_mode_matrix(data, i, options.omega, options.source);
            init[i] = fill_empty_clusters(init[i], distance_to_own_mean(z, init[i]));
        }
    }

    LloydResult result;
    result.memberships = std::move(init);
    if (options.record_trace) {
        result.trace.steps.push_back(
            {result.memberships, {}, coupled_loss(data, result.memberships, options.omega, options.source)});
    }

    for (int k = 1; k <= max_iter; ++k) {
        std::vector<Matrix> factors;
        for (const auto& m : result.memberships) factors.push_back(mode_factor(m, options.projection));

        std::vector<Membership> next = result.memberships;
        std::vector<Matrix> centroids(d);
        for (std::size_t i = 0; i < d; ++i) {
            const DenseTensor projected = project_modes(data.x, factors, i);
            const Matrix z = i == 0 ? coupled_unfolding(projected, data.y, options.omega, options.source)
                                    : matricize(projected, i);
            // Ĉ_i = P̂_iᵀ Ẑ_i: rows are block means under the previous labels.
            centroids[i] = cluster_means(z, result.memberships[i]);
            const Assignment assign = nearest_centroid(z, centroids[i]);
            next[i] = fill_empty_clusters(assign.membership, assign.squared_distance);
            if (options.schedule == UpdateSchedule::sequential) factors[i] = mode_factor(next[i], options.projection);
        }

        const bool unchanged = next == result.memberships;
        result.memberships = std::move(next);
        result.trace.iterations_used = k;
        if (options.record_trace) {
            result.trace.steps.push_back({result.memberships, std::move(centroids),
                                          coupled_loss(data, result.memberships, options.omega, options.source)});
        }
        if (unchanged) {
            result.trace.converged = true;
            break;
        }
    }
    return result;
}

}  // namespace pmtc
