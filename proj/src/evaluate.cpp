#include "pmtc/evaluate.hpp"

#include "pmtc/errors.hpp"
#include "pmtc/metrics.hpp"
#include "pmtc/pchooi.hpp"
#include "pmtc/pmtsc.hpp"

#include <algorithm>
#include <numeric>

namespace pmtc {

DenseTensor rank_normalize(const DenseTensor& x) {
    if (x.order() < 1) throw ShapeError("rank_normalize needs a tensor of order >= 1");
    DenseTensor out(x.dims());
    const std::size_t n = x.dim(0);
    const auto in = x.data();
    auto dst = out.data();
    std::vector<std::size_t> idx(n);
    for (std::size_t start = 0; start < x.size(); start += n) {
        std::iota(idx.begin(), idx.end(), 0);
        std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return in[start + a] < in[start + b]; });
        for (std::size_t lo = 0; lo < n;) {
            std::size_t hi = lo + 1;
            while (hi < n && in[start + idx[hi]] == in[start + idx[lo]]) ++hi;
            // 0-based ranks lo..hi-1 share their mean.
            const double rank = 0.5 * static_cast<double>(lo + hi - 1);
            const double scaled = n == 1 ? 0.5 : rank / static_cast<double>(n - 1);
            for (std::size_t k = lo; k < hi; ++k) dst[start + idx[k]] = scaled;
            lo = hi;
        }
    }
    return out;
}

Matrix slice_columns(const Matrix& m, std::size_t begin, std::size_t end) {
    if (begin > end || end > static_cast<std::size_t>(m.cols())) throw ShapeError("period range outside the panel");
    return m.middleCols(static_cast<Eigen::Index>(begin), static_cast<Eigen::Index>(end - begin));
}

CoupledData slice_periods(const CoupledData& data, std::size_t begin, std::size_t end) {
    if (data.x.order() < 2 || begin > end || end > data.periods()) throw ShapeError("period range outside the panel");
    auto dims = data.x.dims();
    const std::size_t block = data.x.size() / dims.back();
    dims.back() = end - begin;
    const auto src = data.x.data();
    std::vector<double> values(src.begin() + static_cast<std::ptrdiff_t>(begin * block),
                               src.begin() + static_cast<std::ptrdiff_t>(end * block));
    CoupledData out{DenseTensor(std::move(dims), std::move(values)), Matrix()};
    if (data.y.size() > 0) out.y = slice_columns(data.y, begin, end);
    return out;
}

FitResult fit_panel(const CoupledData& data, const std::optional<Matrix>& f, const FitOptions& options) {
    validate(data, Source::coupled);
    if (options.clusters.size() != data.num_modes()) {
        throw ShapeError(std::to_string(options.clusters.size()) + " cluster counts for " +
                         std::to_string(data.num_modes()) + " clustered modes");
    }
    if (options.factors == FactorKind::observed && !f) throw std::invalid_argument("observed factors need a factor panel");

    PchooiOptions popts;
    popts.max_iter = options.pchooi_max_iter;
    popts.tol = options.pchooi_tol;
    popts.omega = options.omega;
    popts.compute_denoised = false;
    const std::vector<Eigen::Index> ranks(options.clusters.begin(), options.clusters.end());
    const auto sub = pchooi(data, ranks, popts);

    PmtscOptions sopts;
    sopts.kmeans = options.kmeans;
    sopts.omega = options.omega;
    const auto init = pmtsc(data, options.clusters, sub.bases, sopts);

    LloydOptions lopts;
    lopts.max_iter = options.lloyd_iters;
    lopts.projection = options.projection;
    lopts.schedule = options.schedule;
    lopts.omega = options.omega;
    auto lloyd = pmtlloyd(data, init.memberships, lopts);

    FitResult out;
    out.memberships = std::move(lloyd.memberships);
    out.trace = std::move(lloyd.trace);
    out.pchooi_iterations = sub.iterations;
    out.pchooi_converged = sub.converged;
    out.loadings = options.factors == FactorKind::observed
                       ? estimate_observed(data.y, out.memberships[0], *f, options.demean)
                       : estimate_latent(data.y, out.memberships[0], options.num_factors);
    return out;
}

Matrix window_factors(const FactorEstimate& estimate, const Matrix& y, const Membership& m1,
                      const std::optional<Matrix>& f) {
    if (estimate.kind == FactorKind::observed) {
        if (!f) throw std::invalid_argument("observed factors need a factor panel");
        return *f;
    }
    return estimate.u_b.transpose() * cluster_means(y, m1);
}

namespace {

double window_r2(const Matrix& y, const std::optional<Matrix>& f, const Vector& market, const Membership& m1,
                 const FactorEstimate& est, std::size_t begin, std::size_t end) {
    const Matrix yw = slice_columns(y, begin, end);
    std::optional<Matrix> fw;
    if (f) fw = slice_columns(*f, begin, end);
    EvalInput in;
    in.returns = yw;
    in.factors = window_factors(est, yw, m1, fw);
    in.market_excess = market.segment(static_cast<Eigen::Index>(begin), static_cast<Eigen::Index>(end - begin));
    in.membership = m1;
    in.loadings = est.loadings();
    return total_r2(in);
}

void check_panel(const Matrix& y, const std::optional<Matrix>& f, const Vector& market, const Membership& m1) {
    if (static_cast<std::size_t>(y.rows()) != m1.size()) throw ShapeError("returns rows differ from membership size");
    if (market.size() != y.cols()) throw ShapeError("market series length differs from the returns panel");
    if (f && f->cols() != y.cols()) throw ShapeError("factor panel length differs from the returns panel");
}

}  // namespace

R2Window evaluate_split(const Matrix& y, const std::optional<Matrix>& f, const Vector& market, const Membership& m1,
                        const FactorEstimate& estimate, std::size_t split) {
    check_panel(y, f, market, m1);
    const auto t = static_cast<std::size_t>(y.cols());
    if (split == 0 || split > t) throw ShapeError("split index must be in 1..T");
    R2Window w{"split@" + std::to_string(split), window_r2(y, f, market, m1, estimate, 0, split), std::nullopt};
    if (split < t) w.oos = window_r2(y, f, market, m1, estimate, split, t);
    return w;
}

std::vector<R2Window> evaluate_rolling(const Matrix& y, const std::optional<Matrix>& f, const Vector& market,
                                       const Membership& m1, FactorKind kind, int num_factors, bool demean,
                                       const std::vector<std::string>& labels) {
    check_panel(y, f, market, m1);
    if (labels.size() != static_cast<std::size_t>(y.cols())) {
        throw ShapeError(std::to_string(labels.size()) + " date labels for " + std::to_string(y.cols()) + " periods");
    }
    if (kind == FactorKind::observed && !f) throw std::invalid_argument("observed factors need a factor panel");
    std::vector<std::pair<std::size_t, std::size_t>> runs;
    for (std::size_t t = 0; t < labels.size(); ++t) {
        if (t == 0 || labels[t] != labels[t - 1]) runs.push_back({t, t});
        runs.back().second = t + 1;
    }
    std::vector<R2Window> out;
    for (std::size_t k = 0; k < runs.size(); ++k) {
        const auto [b, e] = runs[k];
        const Matrix yw = slice_columns(y, b, e);
        const auto est = kind == FactorKind::observed ? estimate_observed(yw, m1, slice_columns(*f, b, e), demean)
                                                      : estimate_latent(yw, m1, num_factors);
        R2Window w{labels[b], window_r2(y, f, market, m1, est, b, e), std::nullopt};
        if (k + 1 < runs.size()) w.oos = window_r2(y, f, market, m1, est, runs[k + 1].first, runs[k + 1].second);
        out.push_back(std::move(w));
    }
    return out;
}

}  // namespace pmtc
