#include "btcgp/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace btcgp {

namespace {

inline double se_value(double tau, double signal_var, double lengthscale) {
    const double u = tau / lengthscale;
    return signal_var * std::exp(-0.5 * u * u);
}

void require_strictly_increasing(const Eigen::VectorXd& x) {
    for (Index i = 0; i + 1 < x.size(); ++i) {
        if (!(x[i + 1] - x[i] > 0.0))
            throw DuplicatePoints("inputs must be strictly increasing (index " +
                                  std::to_string(i + 1) + ")");
    }
}

}  // namespace

void SeHyperParams::validate() const {
    const bool ok = std::isfinite(signal_var) && signal_var > 0.0 && std::isfinite(lengthscale) &&
                    lengthscale > 0.0 && std::isfinite(noise_var) && noise_var > 0.0;
    if (!ok) throw InvalidParams("hyperparameters must be strictly positive and finite");
}

Dataset1D::Dataset1D(Eigen::VectorXd x, Eigen::VectorXd y) : x_(std::move(x)), y_(std::move(y)) {
    if (x_.size() != y_.size()) throw DimensionMismatch("x and y must have equal length");
    if (x_.size() < 1) throw TooFewPoints("dataset needs at least one point");
    if (!x_.allFinite() || !y_.allFinite()) throw InvalidParams("dataset entries must be finite");
    delta_ = x_.size() >= 2 ? min_spacing(x_) : std::numeric_limits<double>::infinity();
}

double se_kernel(double tau, const SeHyperParams& params) {
    params.validate();
    return se_value(tau, params.signal_var, params.lengthscale);
}

Eigen::MatrixXd gram_dense(const Eigen::VectorXd& x, const Eigen::VectorXd& x2,
                           const SeHyperParams& params) {
    params.validate();
    if (!x.allFinite() || !x2.allFinite()) throw InvalidParams("inputs must be finite");
    Eigen::MatrixXd g(x.size(), x2.size());
    for (Index j = 0; j < x2.size(); ++j)
        for (Index i = 0; i < x.size(); ++i)
            g(i, j) = se_value(std::abs(x[i] - x2[j]), params.signal_var, params.lengthscale);
    return g;
}

BandedSymMatrix gram_banded(const Eigen::VectorXd& x, const SeHyperParams& params, Index k) {
    params.validate();
    if (!x.allFinite()) throw InvalidParams("inputs must be finite");
    require_strictly_increasing(x);
    const Index n = x.size();
    BandedSymMatrix b(n, k);  // validates 0 <= k <= n-1
    const Index s = k + 1;
    double* band = b.band().data();
    for (Index i = 0; i < n; ++i) {
        double* col = band + i * s;
        const Index top = std::min(k, n - 1 - i);
        for (Index d = 0; d <= top; ++d) {
            const double v = se_value(x[i + d] - x[i], params.signal_var, params.lengthscale);
            col[d] = v;
            // The SE kernel decays monotonically with distance, so once a
            // column entry underflows to zero the rest of it is zero too.
            if (v == 0.0) break;
        }
    }
    return b;
}

double min_spacing(const Eigen::VectorXd& x) {
    if (x.size() < 2) throw TooFewPoints("min_spacing needs at least two points");
    double best = std::numeric_limits<double>::infinity();
    for (Index i = 0; i + 1 < x.size(); ++i) {
        const double gap = x[i + 1] - x[i];
        if (!(gap > 0.0))
            throw DuplicatePoints("adjacent points at index " + std::to_string(i) +
                                  " are duplicated or unsorted");
        best = std::min(best, gap);
    }
    return best;
}

double spacing_quantile(const Eigen::VectorXd& x, double quantile) {
    if (!(quantile >= 0.0) || !(quantile <= 1.0))
        throw InvalidParams("quantile must lie in [0, 1]");
    if (x.size() < 2) throw TooFewPoints("spacing_quantile needs at least two points");
    std::vector<double> gaps(static_cast<std::size_t>(x.size() - 1));
    for (Index i = 0; i + 1 < x.size(); ++i) {
        gaps[static_cast<std::size_t>(i)] = x[i + 1] - x[i];
        if (!(gaps[static_cast<std::size_t>(i)] > 0.0))
            throw DuplicatePoints("adjacent points at index " + std::to_string(i) +
                                  " are duplicated or unsorted");
    }
    std::sort(gaps.begin(), gaps.end());
    const auto rank = static_cast<std::size_t>(quantile * static_cast<double>(gaps.size() - 1));
    return gaps[rank];
}

Index theoretical_bandwidth(const SeHyperParams& params, double delta) {
    params.validate();
    if (!(delta > 0.0)) throw InvalidParams("delta must be positive");
    const double l2 = params.lengthscale * params.lengthscale;
    const double d2 = delta * delta;
    const double ratio = 2.0 * params.signal_var * l2 / (3.0 * params.noise_var * d2);
    if (!(ratio > 1.0)) return 2;
    const double val = std::sqrt(1.5 + (2.0 * l2 / d2) * std::log(ratio));
    return static_cast<Index>(std::ceil(val));
}

double thm1_margin(const Eigen::VectorXd& x, const SeHyperParams& params, Index k) {
    params.validate();
    const Index n = x.size();
    if (k < 0 || k > n - 1)
        throw BandwidthOutOfRange("bandwidth " + std::to_string(k) + " outside [0, " +
                                  std::to_string(n - 1) + "]");
    const double delta = min_spacing(x);
    const double l2 = params.lengthscale * params.lengthscale;
    const double eps_bound =
        params.noise_var * 3.0 * delta * delta / (4.0 * l2) * std::exp(-1.5 * delta * delta / l2);

    double max_excluded = 0.0;
    if (k < n - 1) {
        // The largest excluded entry sits at the smallest distance among
        // pairs more than k indices apart, which for sorted inputs is the
        // tightest (k+1)-step window.
        double min_dist = std::numeric_limits<double>::infinity();
        for (Index i = 0; i + k + 1 < n; ++i) min_dist = std::min(min_dist, x[i + k + 1] - x[i]);
        max_excluded = se_value(min_dist, params.signal_var, params.lengthscale);
    }
    return eps_bound - max_excluded;
}

Dataset1D thin_to_spacing(const Dataset1D& data, double delta_min) {
    if (!(delta_min > 0.0)) throw InvalidParams("delta_min must be positive");
    const Eigen::VectorXd& x = data.x();
    const Eigen::VectorXd& y = data.y();
    std::vector<Index> keep;
    keep.push_back(0);
    for (Index i = 1; i < x.size(); ++i) {
        if (x[i] - x[keep.back()] >= delta_min) keep.push_back(i);
    }
    Eigen::VectorXd xs(static_cast<Index>(keep.size()));
    Eigen::VectorXd ys(static_cast<Index>(keep.size()));
    for (std::size_t j = 0; j < keep.size(); ++j) {
        xs[static_cast<Index>(j)] = x[keep[j]];
        ys[static_cast<Index>(j)] = y[keep[j]];
    }
    return Dataset1D(std::move(xs), std::move(ys));
}

}  // namespace btcgp
