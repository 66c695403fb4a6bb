#include "pmtc/kmeans.hpp"

#include "pmtc/errors.hpp"
#include "pmtc/random.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <string>

namespace pmtc {

double default_kappa(int num_clusters) { return 1.0 + std::log(static_cast<double>(std::max(num_clusters, 1))); }

Assignment nearest_centroid(const Matrix& z, const Matrix& centroids) {
    if (centroids.rows() < 1) throw std::invalid_argument("nns: need at least one centroid");
    if (z.cols() != centroids.cols()) {
        throw ShapeError("nns: rows have dimension " + std::to_string(z.cols()) + ", centroids " +
                         std::to_string(centroids.cols()));
    }
    const Eigen::Index p = z.rows();
    const Eigen::Index r = centroids.rows();
    std::vector<int> labels(static_cast<std::size_t>(p));
    Vector best_d(p);
    for (Eigen::Index j = 0; j < p; ++j) {
        double best = std::numeric_limits<double>::infinity();
        Eigen::Index arg = 0;
        for (Eigen::Index a = 0; a < r; ++a) {
            const double d = (z.row(j) - centroids.row(a)).squaredNorm();
            if (d < best) {
                best = d;
                arg = a;
            }
        }
        labels[static_cast<std::size_t>(j)] = static_cast<int>(arg);
        best_d(j) = best;
    }
    return {Membership(std::move(labels), static_cast<int>(r)), std::move(best_d)};
}

Membership nns(const Matrix& z, const Matrix& centroids) { return nearest_centroid(z, centroids).membership; }

double kmeans_objective(const Matrix& z, const Membership& m, const Matrix& centroids) {
    double total = 0.0;
    for (std::size_t j = 0; j < m.size(); ++j) {
        total += (z.row(static_cast<Eigen::Index>(j)) - centroids.row(m[j])).squaredNorm();
    }
    return total;
}

namespace {

Matrix seed_plus_plus(const Matrix& z, int r, std::mt19937_64& rng) {
    const Eigen::Index p = z.rows();
    Matrix centers(r, z.cols());
    std::uniform_int_distribution<Eigen::Index> first(0, p - 1);
    centers.row(0) = z.row(first(rng));
    Vector d2 = (z.rowwise() - centers.row(0)).rowwise().squaredNorm();
    for (int a = 1; a < r; ++a) {
        Eigen::Index pick = 0;
        if (d2.sum() > 0.0) {
            std::discrete_distribution<Eigen::Index> draw(d2.data(), d2.data() + p);
            pick = draw(rng);
        } else {
            pick = first(rng);
        }
        centers.row(a) = z.row(pick);
        d2 = d2.cwiseMin((z.rowwise() - centers.row(a)).rowwise().squaredNorm());
    }
    return centers;
}

// Centroid update; an empty cluster is re-seeded at the point farthest from
// its current centroid.
Matrix update_centroids(const Matrix& z, const Assignment& assign, int r) {
    Matrix sums = Matrix::Zero(r, z.cols());
    std::vector<std::size_t> counts(static_cast<std::size_t>(r), 0);
    const auto& labels = assign.membership.labels();
    for (std::size_t j = 0; j < labels.size(); ++j) {
        sums.row(labels[j]) += z.row(static_cast<Eigen::Index>(j));
        ++counts[static_cast<std::size_t>(labels[j])];
    }
    Vector dist = assign.squared_distance;
    for (int a = 0; a < r; ++a) {
        if (counts[static_cast<std::size_t>(a)] == 0) {
            Eigen::Index far = 0;
            dist.maxCoeff(&far);
            sums.row(a) = z.row(far);
            counts[static_cast<std::size_t>(a)] = 1;
            dist(far) = -1.0;
        } else {
            sums.row(a) /= static_cast<double>(counts[static_cast<std::size_t>(a)]);
        }
    }
    return sums;
}

KmeansResult lloyd_run(const Matrix& z, int r, int max_sweeps, std::mt19937_64& rng) {
    Matrix centers = seed_plus_plus(z, r, rng);
    Assignment assign = nearest_centroid(z, centers);
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        centers = update_centroids(z, assign, r);
        Assignment next = nearest_centroid(z, centers);
        const bool unchanged = next.membership == assign.membership;
        assign = std::move(next);
        if (unchanged) break;
    }
    // Centroids consistent with the final labels (means of nonempty clusters).
    centers = update_centroids(z, assign, r);
    const double obj = kmeans_objective(z, assign.membership, centers);
    return {std::move(assign.membership), std::move(centers), obj, 0.0};
}

}  // namespace

KmeansResult kmeans_relaxed(const Matrix& z, int num_clusters, const KmeansOptions& options) {
    if (num_clusters < 1) throw std::invalid_argument("kmeans: cluster count must be positive");
    if (static_cast<Eigen::Index>(num_clusters) > z.rows()) {
        throw std::invalid_argument("kmeans: " + std::to_string(num_clusters) + " clusters for " +
                                    std::to_string(z.rows()) + " points");
    }
    if (!z.allFinite()) throw std::invalid_argument("kmeans: input has non-finite entries");
    const double kappa = options.kappa > 0.0 ? options.kappa : default_kappa(num_clusters);
    if (kappa < 1.0) throw std::invalid_argument("kmeans: relaxation factor must be >= 1");
    const int restarts = std::max(options.restarts, 1);

    KmeansResult best{};
    best.objective = std::numeric_limits<double>::infinity();
    for (int run = 0; run < restarts; ++run) {
        auto rng = make_rng({options.seed, static_cast<std::uint64_t>(run)});
        KmeansResult candidate = lloyd_run(z, num_clusters, options.max_sweeps, rng);
        if (candidate.objective < best.objective) best = std::move(candidate);
    }
    best.kappa = kappa;
    return best;
}

}  // namespace pmtc
