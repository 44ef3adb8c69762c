#pragma once

#include <Eigen/Core>

#include "btcgp/banded.hpp"
#include "btcgp/errors.hpp"

namespace btcgp {

/// Squared-exponential hyperparameters plus observation-noise variance.
/// signal_var is the kernel amplitude sigma^2 (output units squared),
/// lengthscale is ell (input units), noise_var is sigma_n^2.
struct SeHyperParams {
    double signal_var;
    double lengthscale;
    double noise_var;

    /// All fields must be strictly positive and finite.
    void validate() const;
};

/// Sorted 1-D inputs with observations. delta() is the minimum adjacent
/// spacing (+inf for a single point).
class Dataset1D {
public:
    Dataset1D(Eigen::VectorXd x, Eigen::VectorXd y);

    const Eigen::VectorXd& x() const noexcept { return x_; }
    const Eigen::VectorXd& y() const noexcept { return y_; }
    Index size() const noexcept { return x_.size(); }
    double delta() const noexcept { return delta_; }

private:
    Eigen::VectorXd x_;
    Eigen::VectorXd y_;
    double delta_;
};

/// k(tau) = sigma^2 * exp(-tau^2 / (2 ell^2)).
double se_kernel(double tau, const SeHyperParams& params);

/// Pairwise kernel matrix: entry (i, j) = k(|x_i - x2_j|).
Eigen::MatrixXd gram_dense(const Eigen::VectorXd& x, const Eigen::VectorXd& x2,
                           const SeHyperParams& params);

/// Band of the Gram matrix over sorted inputs, built with O(n k) kernel
/// evaluations and never materializing the dense matrix. Matches
/// band_from_dense(gram_dense(x, x, params), k) bit for bit. Noise is NOT
/// added here; use add_diagonal.
BandedSymMatrix gram_banded(const Eigen::VectorXd& x, const SeHyperParams& params, Index k);

/// Minimum adjacent gap of a strictly increasing vector (length >= 2).
double min_spacing(const Eigen::VectorXd& x);

/// Nearest-rank quantile of the adjacent gaps, for trading the
/// positive-definiteness guarantee against bandwidth on irregular data
/// (quantile -> 0 recovers min_spacing).
double spacing_quantile(const Eigen::VectorXd& x, double quantile);

/// Closed-form bandwidth choice for the cut-off SE Gram matrix with noise:
/// ceil(sqrt(3/2 + (2 ell^2/delta^2) log(2 sigma^2 ell^2 / (3 sigma_n^2 delta^2))))
/// when the log argument exceeds 1, else 2. Never below 2; callers clamp to
/// n-1 when the data is short.
Index theoretical_bandwidth(const SeHyperParams& params, double delta);

/// Slack of the positive-definiteness certificate for bandwidth k:
/// eps_bound - max_{|i-j|>k} K(i,j) with
/// eps_bound = sigma_n^2 * 3 delta^2 / (4 ell^2) * exp(-3 delta^2 / (2 ell^2)).
/// A non-negative value certifies that the cut-off Gram plus noise is
/// positive definite. For k = n-1 there are no excluded entries and the
/// bound itself is returned.
double thm1_margin(const Eigen::VectorXd& x, const SeHyperParams& params, Index k);

/// Greedy left-to-right subset keeping the first point and every later point
/// at distance >= delta_min from the last kept one.
Dataset1D thin_to_spacing(const Dataset1D& data, double delta_min);

}  // namespace btcgp
