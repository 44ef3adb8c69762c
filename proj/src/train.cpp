#include "btcgp/train.hpp"

#include <chrono>
#include <cmath>
#include <limits>

namespace btcgp {

namespace {

struct LogSpaceLoss {
    const Dataset1D& data;
    Index k;

    double operator()(const Eigen::Vector3d& v) const {
        const SeHyperParams p{std::exp(v[0]), std::exp(v[1]), std::exp(v[2])};
        // exp underflow/overflow at extreme trial points; report an infinite
        // loss so the line search backs off instead of erroring out.
        for (const double value : {p.signal_var, p.lengthscale, p.noise_var})
            if (!(value > 0.0) || !std::isfinite(value))
                return std::numeric_limits<double>::infinity();
        return nll_btc(p, data, k);
    }
};

// FD probes can step just outside the positive-definite region even when the
// current point is fine; shrinking h moves them back inside.
Eigen::Vector3d gradient_with_pd_backoff(const LogSpaceLoss& loss, const Eigen::Vector3d& v,
                                         const TrainConfig& cfg, TrainResult& res, int iter) {
    double h = cfg.fd_step;
    for (int attempt = 0; attempt <= 30; ++attempt) {
        try {
            return loss_gradient_fd(loss, v, h);
        } catch (const NotPositiveDefinite& e) {
            res.pd_violations.emplace_back(iter, static_cast<Index>(e.pivot_index()));
            if (cfg.pd_failure_policy == PdFailurePolicy::Abort)
                throw PdFailure("positive definiteness lost at a gradient probe (iteration " +
                                std::to_string(iter) + ")");
            h *= 0.5;
        }
    }
    throw PdFailure("gradient probes kept losing positive definiteness (iteration " +
                    std::to_string(iter) + ")");
}

}  // namespace

SeHyperParams init_hyperparams(const Dataset1D& data) {
    if (data.size() < 2) throw TooFewPoints("initialization needs at least two points");
    const Eigen::VectorXd& y = data.y();
    if (y.minCoeff() == y.maxCoeff()) throw ZeroVariance("observations are constant");
    const double mean = y.mean();
    const double var = (y.array() - mean).square().sum() / static_cast<double>(y.size() - 1);
    if (!(var > 0.0)) throw ZeroVariance("observations have zero sample variance");
    return SeHyperParams{var, 5.0 * data.delta(), 0.5 * var};
}

Eigen::Vector3d loss_gradient_fd(const std::function<double(const Eigen::Vector3d&)>& loss,
                                 const Eigen::Vector3d& log_params, double h) {
    if (!(h > 0.0)) throw InvalidParams("finite-difference step must be positive");
    Eigen::Vector3d g;
    for (int i = 0; i < 3; ++i) {
        Eigen::Vector3d hi = log_params, lo = log_params;
        hi[i] += h;
        lo[i] -= h;
        const double fh = loss(hi);
        const double fl = loss(lo);
        if (!std::isfinite(fh) || !std::isfinite(fl))
            throw NonFiniteLoss("loss is not finite at a finite-difference probe");
        g[i] = (fh - fl) / (2.0 * h);
    }
    return g;
}

TrainResult fit(const Dataset1D& data, const TrainConfig& cfg) {
    if (cfg.max_iters < 1) throw InvalidParams("max_iters must be at least 1");
    if (!(cfg.grad_tol > 0.0)) throw InvalidParams("grad_tol must be positive");
    if (!(cfg.fd_step > 0.0)) throw InvalidParams("fd_step must be positive");
    if (data.size() < 2) throw TooFewPoints("fit needs at least two points");

    const auto t_start = std::chrono::steady_clock::now();

    const SeHyperParams p0 = cfg.init ? *cfg.init : init_hyperparams(data);
    p0.validate();

    const Index n1 = data.size() - 1;
    TrainResult res;
    Index k = n1;
    if (cfg.mode == Mode::Btc) {
        if (cfg.bandwidth_policy == BandwidthPolicy::Fixed) {
            if (cfg.fixed_k < 0 || cfg.fixed_k > n1)
                throw BandwidthOutOfRange("fixed bandwidth " + std::to_string(cfg.fixed_k) +
                                          " outside [0, " + std::to_string(n1) + "]");
            k = cfg.fixed_k;
        } else {
            const double delta = cfg.delta_quantile
                                     ? spacing_quantile(data.x(), *cfg.delta_quantile)
                                     : data.delta();
            k = theoretical_bandwidth(p0, delta);
            if (k > n1) {
                k = n1;
                res.bandwidth_clamped = true;
            }
        }
    }
    res.bandwidth_used = k;

    const LogSpaceLoss loss{data, k};
    Eigen::Vector3d v(std::log(p0.signal_var), std::log(p0.lengthscale), std::log(p0.noise_var));

    double f;
    try {
        f = loss(v);
    } catch (const NotPositiveDefinite& e) {
        res.pd_violations.emplace_back(0, static_cast<Index>(e.pivot_index()));
        throw PdFailure("covariance not positive definite at the initial hyperparameters (pivot " +
                        std::to_string(e.pivot_index()) + ", bandwidth " + std::to_string(k) + ")");
    }
    if (!std::isfinite(f)) throw NonFiniteLoss("loss is not finite at the initial point");
    res.loss_trace.emplace_back(0, f);

    Eigen::Matrix3d h_inv = Eigen::Matrix3d::Identity();
    Eigen::Vector3d v_prev, g_prev;
    bool have_prev = false;

    for (int iter = 1; iter <= cfg.max_iters; ++iter) {
        const Eigen::Vector3d g = gradient_with_pd_backoff(loss, v, cfg, res, iter);

        // Gradients grow with the series length; a unit-length first step
        // keeps the initial line search out of the exp over/underflow range.
        if (iter == 1) h_inv /= std::max(1.0, g.lpNorm<Eigen::Infinity>());

        if (have_prev) {
            const Eigen::Vector3d s = v - v_prev;
            const Eigen::Vector3d yd = g - g_prev;
            const double sy = s.dot(yd);
            if (sy > 1e-12 * s.norm() * yd.norm()) {
                const double rho = 1.0 / sy;
                const Eigen::Matrix3d m =
                    Eigen::Matrix3d::Identity() - rho * s * yd.transpose();
                h_inv = m * h_inv * m.transpose() + rho * s * s.transpose();
            }
        }

        if (g.lpNorm<Eigen::Infinity>() < cfg.grad_tol) {
            res.converged = res.loss_trace.size() > 1;
            break;
        }

        Eigen::Vector3d dir = -h_inv * g;
        double slope = dir.dot(g);
        if (!(slope < 0.0)) {  // curvature estimate went bad; fall back to steepest descent
            h_inv.setIdentity();
            dir = -g;
            slope = dir.dot(g);
        }

        double t = 1.0;
        bool accepted = false;
        bool any_finite = false;
        bool any_pd_fail = false;
        for (int halvings = 0; halvings <= 30; ++halvings) {
            const Eigen::Vector3d vt = v + t * dir;
            bool evaluated = false;
            double ft = 0.0;
            try {
                ft = loss(vt);
                evaluated = true;
            } catch (const NotPositiveDefinite& e) {
                res.pd_violations.emplace_back(iter, static_cast<Index>(e.pivot_index()));
                if (cfg.pd_failure_policy == PdFailurePolicy::Abort)
                    throw PdFailure("positive definiteness lost at a trial point (iteration " +
                                    std::to_string(iter) + ", pivot " +
                                    std::to_string(e.pivot_index()) + ")");
                any_pd_fail = true;
            }
            if (evaluated && std::isfinite(ft)) {
                any_finite = true;
                if (ft <= f + 1e-4 * t * slope) {  // Armijo; slope < 0 forces strict decrease
                    v_prev = v;
                    g_prev = g;
                    have_prev = true;
                    v = vt;
                    f = ft;
                    res.loss_trace.emplace_back(iter, f);
                    accepted = true;
                    break;
                }
            }
            t *= 0.5;
        }

        if (!accepted) {
            if (!any_finite) {
                if (any_pd_fail)
                    throw PdFailure("line search exhausted: every trial lost positive definiteness");
                throw NonFiniteLoss("line search exhausted: every trial loss was non-finite");
            }
            break;  // no further decrease at finite-difference resolution
        }
    }

    res.params = SeHyperParams{std::exp(v[0]), std::exp(v[1]), std::exp(v[2])};
    res.final_bandwidth_check = theoretical_bandwidth(res.params, data.delta());
    res.bandwidth_warning = res.final_bandwidth_check > res.bandwidth_used;
    res.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return res;
}

}  // namespace btcgp
