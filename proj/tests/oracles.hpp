// Dense reference implementations used to check the banded path. Everything
// here goes through Eigen's dense factorizations and direct formulas only.
#pragma once

#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "btcgp/kernel.hpp"

namespace oracle {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using btcgp::Index;
using btcgp::SeHyperParams;

inline const double kLog2Pi = std::log(2.0 * std::numbers::pi);

/// Zeroes every entry with |i-j| > k.
inline MatrixXd dense_cutoff(const MatrixXd& a, Index k) {
    MatrixXd out = a;
    for (Index i = 0; i < a.rows(); ++i)
        for (Index j = 0; j < a.cols(); ++j)
            if (std::abs(i - j) > k) out(i, j) = 0.0;
    return out;
}

inline MatrixXd dense_se_gram(const VectorXd& x, const VectorXd& x2, const SeHyperParams& p) {
    MatrixXd g(x.size(), x2.size());
    for (Index i = 0; i < x.size(); ++i)
        for (Index j = 0; j < x2.size(); ++j) {
            const double tau = std::abs(x[i] - x2[j]);
            g(i, j) = p.signal_var * std::exp(-0.5 * tau * tau / (p.lengthscale * p.lengthscale));
        }
    return g;
}

inline double min_eigenvalue(const MatrixXd& a) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(a, Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
}

inline double dense_logdet(const MatrixXd& a) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(a, Eigen::EigenvaluesOnly);
    return es.eigenvalues().array().log().sum();
}

/// Direct evaluation of the marginal-likelihood loss from the dense matrix.
inline double dense_nll(const MatrixXd& cov_with_noise, const VectorXd& y) {
    Eigen::LLT<MatrixXd> llt(cov_with_noise);
    const VectorXd alpha = llt.solve(y);
    const double logdet = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
    return 0.5 * y.dot(alpha) + 0.5 * logdet + 0.5 * static_cast<double>(y.size()) * kLog2Pi;
}

inline double dense_nll_cutoff(const SeHyperParams& p, const VectorXd& x, const VectorXd& y,
                               Index k) {
    MatrixXd c = dense_cutoff(dense_se_gram(x, x, p), k);
    c.diagonal().array() += p.noise_var;
    return dense_nll(c, y);
}

struct DensePrediction {
    VectorXd mean;
    MatrixXd cov;
};

/// Predictive mean and covariance with the training block cut off at k
/// (k = n-1 reproduces the plain dense formulas).
inline DensePrediction dense_predict(const SeHyperParams& p, const VectorXd& x,
                                     const VectorXd& y, const VectorXd& xs, Index k) {
    MatrixXd c = dense_cutoff(dense_se_gram(x, x, p), k);
    c.diagonal().array() += p.noise_var;
    Eigen::LLT<MatrixXd> llt(c);
    const MatrixXd cross = dense_se_gram(xs, x, p);
    DensePrediction out;
    out.mean = cross * llt.solve(y);
    out.cov = dense_se_gram(xs, xs, p) - cross * llt.solve(cross.transpose());
    return out;
}

/// Joint Gaussian negative log density, straight from the formula.
inline double dense_nlpd(const VectorXd& mean, const MatrixXd& cov, const VectorXd& y) {
    Eigen::LLT<MatrixXd> llt(cov);
    const VectorXd r = y - mean;
    const double logdet = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
    return 0.5 * r.dot(llt.solve(r)) + 0.5 * logdet +
           0.5 * static_cast<double>(y.size()) * kLog2Pi;
}

/// Well-conditioned random SPD matrix that is exactly k-banded, built as
/// L L^T from a random banded lower factor with a dominant diagonal.
inline MatrixXd random_spd_banded(Index n, Index k, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> off(-0.5, 0.5);
    std::uniform_real_distribution<double> diag(1.0, 2.0);
    MatrixXd l = MatrixXd::Zero(n, n);
    for (Index j = 0; j < n; ++j) {
        l(j, j) = diag(rng);
        for (Index i = j + 1; i <= std::min(n - 1, j + k); ++i) l(i, j) = off(rng) / double(k);
    }
    const MatrixXd m = l * l.transpose();
    return 0.5 * (m + m.transpose());  // bitwise symmetric
}

inline MatrixXd random_symmetric(Index n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    MatrixXd a(n, n);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j <= i; ++j) {
            a(i, j) = u(rng);
            a(j, i) = a(i, j);
        }
    return a;
}

inline VectorXd random_sorted_x(Index n, std::mt19937_64& rng, double min_gap = 0.05,
                                double max_gap = 0.5) {
    std::uniform_real_distribution<double> gap(min_gap, max_gap);
    VectorXd x(n);
    double acc = 0.0;
    for (Index i = 0; i < n; ++i) {
        x[i] = acc;
        acc += gap(rng);
    }
    return x;
}

inline VectorXd random_vector(Index n, std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    VectorXd v(n);
    for (Index i = 0; i < n; ++i) v[i] = normal(rng);
    return v;
}

/// Brute-force minimum pairwise distance.
inline double min_pairwise_distance(const VectorXd& x) {
    double best = std::numeric_limits<double>::infinity();
    for (Index i = 0; i < x.size(); ++i)
        for (Index j = 0; j < x.size(); ++j)
            if (i != j) best = std::min(best, std::abs(x[i] - x[j]));
    return best;
}

}  // namespace oracle
