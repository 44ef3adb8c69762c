#include "btcgp/model.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Eigenvalues>

namespace btcgp {

namespace {

const double kLog2Pi = std::log(2.0 * std::numbers::pi);

double nll_from_factor(const BandedCholeskyFactor& f, const Eigen::VectorXd& y) {
    return 0.5 * quad_form(f, y) + 0.5 * logdet_banded(f) +
           0.5 * static_cast<double>(f.dim()) * kLog2Pi;
}

BandedCholeskyFactor factor_covariance(const SeHyperParams& params, const Dataset1D& data,
                                       Index k) {
    return cholesky_banded(add_diagonal(gram_banded(data.x(), params, k), params.noise_var));
}

}  // namespace

double FittedModel::nll() const { return nll_from_factor(factor_, train_.y()); }

double nll_btc(const SeHyperParams& params, const Dataset1D& data, Index k) {
    params.validate();
    return nll_from_factor(factor_covariance(params, data, k), data.y());
}

double nll_exact(const SeHyperParams& params, const Dataset1D& data) {
    return nll_btc(params, data, data.size() - 1);
}

FittedModel fit_factor(const SeHyperParams& params, const Dataset1D& data, Mode mode, Index k) {
    params.validate();
    const Index bandwidth = mode == Mode::Exact ? data.size() - 1 : k;
    return FittedModel(params, data, mode, bandwidth,
                       factor_covariance(params, data, bandwidth));
}

PredictiveDistribution predict(const FittedModel& model, const Eigen::VectorXd& x_star) {
    if (!x_star.allFinite()) throw InvalidParams("test inputs must be finite");
    const Index m = x_star.size();
    if (m == 0) return PredictiveDistribution{Eigen::VectorXd(0), Eigen::MatrixXd(0, 0), false};

    const Dataset1D& train = model.train();
    const Eigen::MatrixXd cross = gram_dense(x_star, train.x(), model.params());  // m x n
    const Eigen::VectorXd alpha = solve_banded(model.factor(), train.y());

    PredictiveDistribution dist;
    dist.mean = cross * alpha;
    const Eigen::MatrixXd solved = solve_banded(model.factor(), cross.transpose());  // n x m
    Eigen::MatrixXd cov = gram_dense(x_star, x_star, model.params()) - cross * solved;
    dist.cov = 0.5 * (cov + cov.transpose());
    dist.includes_noise = false;
    return dist;
}

PredictiveDistribution add_observation_noise(PredictiveDistribution dist, double noise_var) {
    if (dist.includes_noise) throw AlreadyNoised("observation noise was already added");
    if (!(noise_var >= 0.0) || !std::isfinite(noise_var))
        throw InvalidParams("noise variance must be finite and non-negative");
    dist.cov.diagonal().array() += noise_var;
    dist.includes_noise = true;
    return dist;
}

PdVerdict check_predictive_pd(const PredictiveDistribution& dist, Index dense_limit) {
    const Index m = dist.cov.rows();
    if (m > dense_limit)
        throw TooLargeForDenseCheck("covariance of size " + std::to_string(m) +
                                    " exceeds the dense-check limit " +
                                    std::to_string(dense_limit));
    if (m == 0) return PdVerdict{true, std::numeric_limits<double>::infinity()};
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dist.cov, Eigen::EigenvaluesOnly);
    const double lambda_min = es.eigenvalues()(0);
    return PdVerdict{lambda_min > 0.0, lambda_min};
}

}  // namespace btcgp
