#pragma once

#include <Eigen/Core>

#include "btcgp/banded.hpp"
#include "btcgp/kernel.hpp"

namespace btcgp {

enum class Mode { Exact, Btc };

/// Gaussian predictive distribution at test inputs: mean vector and dense
/// covariance. includes_noise records whether the observation-noise variance
/// has been added to the covariance.
struct PredictiveDistribution {
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;
    bool includes_noise = false;
};

/// Hyperparameters, training data and the cached banded Cholesky factor of
/// the (cut-off) training covariance plus noise. Exact mode uses the full
/// bandwidth n-1; Btc mode uses a fixed k. Immutable after construction.
class FittedModel {
public:
    const SeHyperParams& params() const noexcept { return params_; }
    const Dataset1D& train() const noexcept { return train_; }
    Mode mode() const noexcept { return mode_; }
    Index bandwidth() const noexcept { return bandwidth_; }
    const BandedCholeskyFactor& factor() const noexcept { return factor_; }

    /// Training loss recomputed from the cached factor.
    double nll() const;

private:
    friend FittedModel fit_factor(const SeHyperParams&, const Dataset1D&, Mode, Index);

    FittedModel(SeHyperParams params, Dataset1D train, Mode mode, Index bandwidth,
                BandedCholeskyFactor factor)
        : params_(params),
          train_(std::move(train)),
          mode_(mode),
          bandwidth_(bandwidth),
          factor_(std::move(factor)) {}

    SeHyperParams params_;
    Dataset1D train_;
    Mode mode_;
    Index bandwidth_;
    BandedCholeskyFactor factor_;
};

/// Negative log marginal likelihood of the observations:
/// 1/2 y^T (K + sigma_n^2 I)^{-1} y + 1/2 log|K + sigma_n^2 I| + n/2 log(2 pi),
/// computed through the banded machinery at full bandwidth.
double nll_exact(const SeHyperParams& params, const Dataset1D& data);

/// Same loss with the training covariance cut off at bandwidth k; evaluation
/// costs O(n k^2). NotPositiveDefinite signals that k is too small for the
/// current hyperparameters.
double nll_btc(const SeHyperParams& params, const Dataset1D& data, Index k);

/// Factorizes the (cut-off) training covariance plus noise once, for reuse by
/// both the loss and prediction. Exact mode ignores k and uses n-1.
FittedModel fit_factor(const SeHyperParams& params, const Dataset1D& data, Mode mode,
                       Index k = -1);

/// Predictive mean and covariance at x_star (noise-free):
///   mean = K_*f (C)^{-1} y,   cov = K_** - K_*f (C)^{-1} K_f*
/// where C is the factored training covariance. The cross-covariance block is
/// always dense; only the training block is cut off.
PredictiveDistribution predict(const FittedModel& model, const Eigen::VectorXd& x_star);

/// Adds noise_var to the covariance diagonal; fails on a distribution that
/// already includes noise.
PredictiveDistribution add_observation_noise(PredictiveDistribution dist, double noise_var);

struct PdVerdict {
    bool pd;
    double lambda_min;
};

/// Dense symmetric-eigenvalue verdict on the predictive covariance.
/// Throws TooLargeForDenseCheck beyond dense_limit test points.
PdVerdict check_predictive_pd(const PredictiveDistribution& dist, Index dense_limit = 2000);

}  // namespace btcgp
