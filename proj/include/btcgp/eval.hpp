#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "btcgp/model.hpp"
#include "btcgp/train.hpp"

namespace btcgp {

/// Mean squared prediction error normalized by the variance of the targets
/// about their own mean. Throws ConstantTarget when that variance is zero.
double nmse(const Eigen::VectorXd& y_star, const Eigen::VectorXd& mu_star);

/// Negative log density of y_star under the joint Gaussian predictive.
/// Requires a distribution with observation noise included.
double nlpd(const PredictiveDistribution& dist, const Eigen::VectorXd& y_star);

/// Per-point variant for cross-toolkit comparability: the mean over test
/// points of the one-dimensional negative log densities under the marginals.
double nlpd_pointwise_mean(const PredictiveDistribution& dist, const Eigen::VectorXd& y_star);

struct FoldIndices {
    std::vector<Index> train;
    std::vector<Index> test;
};

/// Seeded shuffle followed by a contiguous partition; the remainder goes to
/// the first folds. Index lists come back sorted.
std::vector<FoldIndices> kfold_split(Index n, int folds, std::uint64_t seed);

/// Draws y = L z + sigma_n w where L is the Cholesky factor of the kernel
/// matrix over x plus a fixed 1e-10 * sigma^2 diagonal jitter, and z, w are
/// standard-normal vectors from the seeded generator.
Eigen::VectorXd sample_gp(const Eigen::VectorXd& x, const SeHyperParams& params,
                          std::uint64_t seed, Index dense_limit = 5000);

struct SyntheticSpec {
    SeHyperParams params{1.0, 1.0, 0.1};
    double delta = 0.2;
    Index n = 2000;
};

struct MethodSpec {
    Mode mode = Mode::Btc;
    Index k = -1;  // ignored for Exact
};

struct ExperimentConfig {
    std::variant<std::string, SyntheticSpec> dataset;  // CSV path or synthetic draw
    std::vector<MethodSpec> methods;
    int folds = 5;
    std::uint64_t seed = 0;
    /// Output path stem; empty disables report files.
    std::string output;
    /// Optimizer settings; mode and bandwidth are overridden per method.
    TrainConfig train;
};

struct FoldOutcome {
    int fold = 0;
    bool pd_valid = false;
    // NaN when the fold is invalid.
    double nmse = 0.0;
    double nlpd = 0.0;
    double nlpd_mean = 0.0;
    double fit_s = 0.0;
    double predict_s = 0.0;
};

struct EvalReport {
    std::string method;
    Index k = -1;  // -1 means none (exact mode)
    std::vector<FoldOutcome> folds;
    bool all_folds_pd = false;
    // Means over the pd-valid folds; NaN when no fold is valid.
    double nmse_mean = 0.0;
    double nlpd_mean = 0.0;
    double nlpd_pointwise = 0.0;
    double fit_s_mean = 0.0;
    double predict_s_mean = 0.0;
};

/// Cross-validates every method: fit on each training fold, predict the held
/// out fold, record NMSE / NLPD / wall times. Folds that lose positive
/// definiteness are reported with pd_valid = false and their metrics omitted.
/// Folds and methods run concurrently up to BTCGP_THREADS workers (default:
/// hardware concurrency). When config.output is set, writes
/// <output>.json and <output>.csv.
std::vector<EvalReport> run_experiment(const ExperimentConfig& config);

struct BenchRow {
    Index n = 0;
    double loss_eval_s = 0.0;
    double fit_s = 0.0;
};

/// Median-of-5 wall times of one loss evaluation and of a short
/// fixed-iteration fit, per series length, on synthetic data with spacing
/// delta. Runs strictly serially.
std::vector<BenchRow> bench_scaling(const std::vector<Index>& n_list, Index k,
                                    const SeHyperParams& params, std::uint64_t seed,
                                    double delta = 0.2);

}  // namespace btcgp
