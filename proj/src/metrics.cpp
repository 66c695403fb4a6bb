#include "pmtc/metrics.hpp"

#include "pmtc/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace pmtc {

namespace {

Matrix confusion(const Membership& estimate, const Membership& truth) {
    Matrix c = Matrix::Zero(truth.num_clusters(), estimate.num_clusters());
    for (std::size_t j = 0; j < truth.size(); ++j) c(truth[j], estimate[j]) += 1.0;
    return c;
}

std::vector<int> best_permutation_exhaustive(const Matrix& conf) {
    std::vector<int> perm(static_cast<std::size_t>(conf.rows()));
    std::iota(perm.begin(), perm.end(), 0);
    std::vector<int> best = perm;
    double best_hits = -1.0;
    do {
        double hits = 0.0;
        for (std::size_t a = 0; a < perm.size(); ++a) hits += conf(static_cast<Eigen::Index>(a), perm[a]);
        if (hits > best_hits) {
            best_hits = hits;
            best = perm;
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

}  // namespace

std::vector<int> max_weight_matching(const Matrix& weight) {
    if (weight.rows() != weight.cols()) throw ShapeError("matching needs a square weight matrix");
    const auto n = static_cast<std::size_t>(weight.rows());
    if (n == 0) return {};
    const double top = weight.maxCoeff();
    // Minimum-cost assignment on cost = top − weight, potentials u, v over
    // rows/columns (1-based with a virtual column 0).
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<std::size_t> match_col(n + 1, 0), way(n + 1, 0);
    for (std::size_t row = 1; row <= n; ++row) {
        match_col[0] = row;
        std::size_t col0 = 0;
        std::vector<double> minv(n + 1, inf);
        std::vector<bool> used(n + 1, false);
        do {
            used[col0] = true;
            const std::size_t i0 = match_col[col0];
            double delta = inf;
            std::size_t col1 = 0;
            for (std::size_t col = 1; col <= n; ++col) {
                if (used[col]) continue;
                const double cost = top - weight(static_cast<Eigen::Index>(i0 - 1), static_cast<Eigen::Index>(col - 1));
                const double cur = cost - u[i0] - v[col];
                if (cur < minv[col]) {
                    minv[col] = cur;
                    way[col] = col0;
                }
                if (minv[col] < delta) {
                    delta = minv[col];
                    col1 = col;
                }
            }
            for (std::size_t col = 0; col <= n; ++col) {
                if (used[col]) {
                    u[match_col[col]] += delta;
                    v[col] -= delta;
                } else {
                    minv[col] -= delta;
                }
            }
            col0 = col1;
        } while (match_col[col0] != 0);
        do {
            const std::size_t col1 = way[col0];
            match_col[col0] = match_col[col1];
            col0 = col1;
        } while (col0 != 0);
    }
    std::vector<int> assignment(n, 0);
    for (std::size_t col = 1; col <= n; ++col) assignment[match_col[col] - 1] = static_cast<int>(col - 1);
    return assignment;
}

CerResult cer(const Membership& estimate, const Membership& truth, PermutationSearch search) {
    if (estimate.size() != truth.size()) {
        throw ShapeError("cer: label vectors have lengths " + std::to_string(estimate.size()) + " and " +
                         std::to_string(truth.size()));
    }
    if (estimate.num_clusters() != truth.num_clusters()) throw ShapeError("cer: cluster counts differ");
    if (truth.size() == 0) throw std::invalid_argument("cer: empty label vectors");
    const Matrix conf = confusion(estimate, truth);
    const bool exhaustive = search == PermutationSearch::exhaustive ||
                            (search == PermutationSearch::automatic && truth.num_clusters() <= 8);
    CerResult out;
    out.permutation = exhaustive ? best_permutation_exhaustive(conf) : max_weight_matching(conf);
    double hits = 0.0;
    for (std::size_t a = 0; a < out.permutation.size(); ++a) hits += conf(static_cast<Eigen::Index>(a), out.permutation[a]);
    out.rate = (static_cast<double>(truth.size()) - hits) / static_cast<double>(truth.size());
    return out;
}

double misclustering_loss(const Membership& estimate, const Membership& truth, const ClusterCenters& centers,
                          std::span<const int> permutation) {
    const int r = truth.num_clusters();
    if (centers.tensor_rows.rows() != r) throw std::invalid_argument("misclustering_loss: missing tensor centers");
    if (centers.outcome_rows && centers.outcome_rows->rows() != r) {
        throw std::invalid_argument("misclustering_loss: outcome centers do not match cluster count");
    }
    std::vector<int> perm(permutation.begin(), permutation.end());
    if (perm.empty()) perm = cer(estimate, truth).permutation;
    if (perm.size() != static_cast<std::size_t>(r)) throw std::invalid_argument("misclustering_loss: bad permutation");
    if (estimate.size() != truth.size()) throw ShapeError("misclustering_loss: label vectors differ in length");
    std::vector<int> inverse(perm.size());
    for (std::size_t a = 0; a < perm.size(); ++a) inverse[static_cast<std::size_t>(perm[a])] = static_cast<int>(a);

    double total = 0.0;
    for (std::size_t j = 0; j < truth.size(); ++j) {
        const int est = inverse[static_cast<std::size_t>(estimate[j])];
        const int tru = truth[j];
        if (est == tru) continue;
        total += (centers.tensor_rows.row(est) - centers.tensor_rows.row(tru)).squaredNorm();
        if (centers.outcome_rows) total += (centers.outcome_rows->row(est) - centers.outcome_rows->row(tru)).squaredNorm();
    }
    return total / static_cast<double>(truth.size());
}

Matrix rescaled_core(const DenseTensor& core, const std::vector<Membership>& memberships, std::size_t mode) {
    if (memberships.size() + 1 != core.order()) throw ShapeError("rescaled_core: one membership per clustered mode");
    DenseTensor scaled = core;
    for (std::size_t j = 0; j < memberships.size(); ++j) {
        if (j == mode) continue;
        const Matrix lambda = scale(memberships[j]).asDiagonal();
        scaled = mode_product(scaled, j, lambda);
    }
    return matricize(scaled, mode);
}

double min_pairwise_sq_distance(const Matrix& rows) {
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index a = 0; a < rows.rows(); ++a) {
        for (Eigen::Index b = a + 1; b < rows.rows(); ++b) best = std::min(best, (rows.row(a) - rows.row(b)).squaredNorm());
    }
    return best;
}

SeparationStats separations(const DenseTensor& core, const std::vector<Membership>& memberships,
                            const std::optional<Matrix>& outcome_centers) {
    const std::size_t d = memberships.size();
    if (d + 1 != core.order()) throw ShapeError("separations: one membership per clustered mode required");
    for (std::size_t i = 0; i < d; ++i) {
        if (static_cast<int>(core.dim(i)) != memberships[i].num_clusters()) {
            throw ShapeError("separations: core mode " + std::to_string(i + 1) + " does not match cluster count");
        }
    }
    const double inf = std::numeric_limits<double>::infinity();
    SeparationStats out;
    out.delta_y_sq = std::numeric_limits<double>::quiet_NaN();
    if (outcome_centers) {
        if (outcome_centers->rows() != memberships[0].num_clusters()) throw ShapeError("separations: S_Y row count");
        out.delta_y_sq = min_pairwise_sq_distance(*outcome_centers);
    }
    double min_sq = inf;
    for (std::size_t i = 0; i < d; ++i) {
        const Matrix s = rescaled_core(core, memberships, i);
        out.delta_x_sq.push_back(min_pairwise_sq_distance(s));
        double delta = inf;
        if (s.rows() > 1) {
            delta = inf;
            for (Eigen::Index a = 0; a < s.rows(); ++a) {
                for (Eigen::Index b = a + 1; b < s.rows(); ++b) {
                    double dist = (s.row(a) - s.row(b)).squaredNorm();
                    if (i == 0 && outcome_centers) dist += (outcome_centers->row(a) - outcome_centers->row(b)).squaredNorm();
                    delta = std::min(delta, dist);
                }
            }
        }
        out.delta_sq.push_back(delta);
        min_sq = std::min(min_sq, delta);
    }
    out.delta_min = std::sqrt(min_sq);
    return out;
}

double total_r2(const EvalInput& in) {
    const Eigen::Index p = in.returns.rows();
    const Eigen::Index t = in.returns.cols();
    if (in.factors.cols() != t || in.market_excess.size() != t) throw ShapeError("total_r2: period counts differ");
    if (static_cast<std::size_t>(p) != in.membership.size()) throw ShapeError("total_r2: membership size differs");
    if (in.loadings.rows() != in.membership.num_clusters() || in.loadings.cols() != in.factors.rows()) {
        throw ShapeError("total_r2: loadings must be clusters x factors");
    }
    const Matrix group_fit = in.loadings * in.factors;  // r₁ × T
    double resid = 0.0;
    double bench = 0.0;
    for (Eigen::Index i = 0; i < p; ++i) {
        resid += (in.returns.row(i) - group_fit.row(in.membership[static_cast<std::size_t>(i)])).squaredNorm();
        bench += (in.returns.row(i) - in.market_excess.transpose()).squaredNorm();
    }
    if (bench == 0.0) throw DegenerateError("total_r2: benchmark residual sum of squares is zero");
    return 1.0 - resid / bench;
}

}  // namespace pmtc
