#pragma once

#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "btcgp/kernel.hpp"
#include "btcgp/model.hpp"

namespace btcgp {

enum class BandwidthPolicy { Theoretical, Fixed };
enum class PdFailurePolicy { Abort, BacktrackStep };

struct TrainConfig {
    /// Starting hyperparameters; empty means init_hyperparams(data).
    std::optional<SeHyperParams> init;
    Mode mode = Mode::Btc;
    /// Theoretical: bandwidth from theoretical_bandwidth at the initial
    /// hyperparameters, clamped to n-1. Fixed: use fixed_k as given.
    BandwidthPolicy bandwidth_policy = BandwidthPolicy::Theoretical;
    Index fixed_k = 0;
    /// When set, the Theoretical policy evaluates the selector at this
    /// quantile of the adjacent gaps instead of the minimum. The true minimum
    /// is pessimistic on irregular data but is what the guarantee covers.
    std::optional<double> delta_quantile;
    int max_iters = 200;
    /// Stop when the log-space gradient infinity norm falls below this.
    double grad_tol = 1e-5;
    /// Central-difference step in log-space (a relative step on parameters).
    double fd_step = 1e-4;
    PdFailurePolicy pd_failure_policy = PdFailurePolicy::BacktrackStep;
};

struct TrainResult {
    SeHyperParams params{1.0, 1.0, 1.0};
    Index bandwidth_used = 0;
    /// Theoretical bandwidth exceeded n-1 and was clamped.
    bool bandwidth_clamped = false;
    /// (iteration, loss) for the initial point and every accepted step;
    /// strictly decreasing across accepted steps.
    std::vector<std::pair<int, double>> loss_trace;
    /// (iteration, pivot index) for every positive-definiteness loss hit at a
    /// trial point or finite-difference probe.
    std::vector<std::pair<int, Index>> pd_violations;
    double wall_time_s = 0.0;
    /// True when the gradient criterion was met after at least one accepted
    /// step; false for runs stopped at the initial point or by max_iters.
    bool converged = false;
    /// Theoretical bandwidth evaluated at the final hyperparameters.
    Index final_bandwidth_check = 0;
    /// final_bandwidth_check > bandwidth_used: the bandwidth kept during the
    /// run is no longer certified at the final hyperparameters.
    bool bandwidth_warning = false;
};

/// Data-driven start: sigma^2 = sample variance of y, ell = 5 * delta,
/// sigma_n^2 = half the sample variance (a deliberately small length-scale
/// and large noise). Throws ZeroVariance on constant observations.
SeHyperParams init_hyperparams(const Dataset1D& data);

/// Central differences of a loss over log-parameters:
/// g_i = (loss(p + h e_i) - loss(p - h e_i)) / (2 h).
/// Throws NonFiniteLoss when a probe evaluates to NaN or infinity.
Eigen::Vector3d loss_gradient_fd(const std::function<double(const Eigen::Vector3d&)>& loss,
                                 const Eigen::Vector3d& log_params, double h);

/// Minimizes the training loss over (log sigma^2, log ell, log sigma_n^2)
/// with finite-difference gradients, a BFGS update and a backtracking line
/// search. The bandwidth is fixed for the whole run. A trial point that loses
/// positive definiteness either aborts (PdFailure) or halves the step, up to
/// 30 times, depending on pd_failure_policy.
TrainResult fit(const Dataset1D& data, const TrainConfig& config);

}  // namespace btcgp
