#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <sstream>
#include <variant>

#include "btcgp/banded.hpp"
#include "btcgp/eval.hpp"
#include "btcgp/kernel.hpp"
#include "btcgp/model.hpp"
#include "btcgp/train.hpp"

namespace py = pybind11;
using namespace btcgp;

namespace {

Mode mode_from_string(const std::string& name) {
    if (name == "exact") return Mode::Exact;
    if (name == "btc") return Mode::Btc;
    throw InvalidParams("mode must be 'exact' or 'btc'");
}

std::string mode_to_string(Mode mode) { return mode == Mode::Exact ? "exact" : "btc"; }

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Gaussian-process regression for 1-D series with a banded training covariance";

    // Base first: translators run in reverse registration order, so the
    // derived exceptions must be registered after their base.
    py::register_exception<Error>(m, "BtcgpError");
    py::register_exception<NotPositiveDefinite>(m, "NotPositiveDefiniteError");
    py::register_exception<PdFailure>(m, "PdFailureError");
    py::register_exception<BandwidthOutOfRange>(m, "BandwidthOutOfRangeError");

    py::class_<SeHyperParams>(m, "SeHyperParams")
        .def(py::init([](double sigma2, double lengthscale, double noise_var) {
                 SeHyperParams p{sigma2, lengthscale, noise_var};
                 p.validate();
                 return p;
             }),
             py::arg("sigma2"), py::arg("lengthscale"), py::arg("noise_var"))
        .def_readwrite("sigma2", &SeHyperParams::signal_var)
        .def_readwrite("lengthscale", &SeHyperParams::lengthscale)
        .def_readwrite("noise_var", &SeHyperParams::noise_var)
        .def("__repr__", [](const SeHyperParams& p) {
            std::ostringstream ss;
            ss << "SeHyperParams(sigma2=" << p.signal_var << ", lengthscale=" << p.lengthscale
               << ", noise_var=" << p.noise_var << ")";
            return ss.str();
        });

    py::class_<Dataset1D>(m, "Dataset1D")
        .def(py::init<Eigen::VectorXd, Eigen::VectorXd>(), py::arg("x"), py::arg("y"))
        .def_property_readonly("x", &Dataset1D::x)
        .def_property_readonly("y", &Dataset1D::y)
        .def_property_readonly("delta", &Dataset1D::delta)
        .def("__len__", &Dataset1D::size);

    py::class_<BandedSymMatrix>(m, "BandedSymMatrix")
        .def_property_readonly("n", &BandedSymMatrix::dim)
        .def_property_readonly("k", &BandedSymMatrix::bandwidth)
        .def("to_dense", [](const BandedSymMatrix& b) { return to_dense(b); });

    py::class_<BandedCholeskyFactor>(m, "BandedCholeskyFactor")
        .def_property_readonly("n", &BandedCholeskyFactor::dim)
        .def_property_readonly("k", &BandedCholeskyFactor::bandwidth)
        .def("solve", [](const BandedCholeskyFactor& f,
                         const Eigen::MatrixXd& rhs) { return solve_banded(f, rhs); },
             py::arg("rhs"))
        .def("logdet", [](const BandedCholeskyFactor& f) { return logdet_banded(f); })
        .def("quad_form", [](const BandedCholeskyFactor& f,
                             const Eigen::VectorXd& y) { return quad_form(f, y); },
             py::arg("y"));

    m.def("band_from_dense", &band_from_dense, py::arg("a"), py::arg("k"));
    m.def("add_diagonal", &add_diagonal, py::arg("b"), py::arg("shift"));
    m.def("cholesky_banded", &cholesky_banded, py::arg("b"));

    m.def("se_kernel", &se_kernel, py::arg("tau"), py::arg("params"));
    m.def("gram_dense", &gram_dense, py::arg("x"), py::arg("x2"), py::arg("params"));
    m.def("gram_banded", &gram_banded, py::arg("x"), py::arg("params"), py::arg("k"));
    m.def("min_spacing", &min_spacing, py::arg("x"));
    m.def("spacing_quantile", &spacing_quantile, py::arg("x"), py::arg("quantile"));
    m.def("theoretical_bandwidth", &theoretical_bandwidth, py::arg("params"), py::arg("delta"));
    m.def("thm1_margin", &thm1_margin, py::arg("x"), py::arg("params"), py::arg("k"));
    m.def("thin_to_spacing", &thin_to_spacing, py::arg("data"), py::arg("delta_min"));

    py::class_<PredictiveDistribution>(m, "PredictiveDistribution")
        .def_readonly("mean", &PredictiveDistribution::mean)
        .def_readonly("cov", &PredictiveDistribution::cov)
        .def_readonly("includes_noise", &PredictiveDistribution::includes_noise);

    py::class_<FittedModel>(m, "FittedModel")
        .def_property_readonly("params", &FittedModel::params)
        .def_property_readonly("bandwidth", &FittedModel::bandwidth)
        .def_property_readonly(
            "mode", [](const FittedModel& fm) { return mode_to_string(fm.mode()); })
        .def("nll", &FittedModel::nll)
        .def("predict",
             [](const FittedModel& fm, const Eigen::VectorXd& xs) { return predict(fm, xs); },
             py::arg("x_star"));

    m.def("nll_exact", &nll_exact, py::arg("params"), py::arg("data"));
    m.def("nll_btc", &nll_btc, py::arg("params"), py::arg("data"), py::arg("k"));
    m.def(
        "fit_factor",
        [](const SeHyperParams& p, const Dataset1D& data, const std::string& mode, Index k) {
            return fit_factor(p, data, mode_from_string(mode), k);
        },
        py::arg("params"), py::arg("data"), py::arg("mode") = "btc", py::arg("k") = -1);
    m.def("add_observation_noise", &add_observation_noise, py::arg("dist"), py::arg("noise_var"));
    m.def(
        "check_predictive_pd",
        [](const PredictiveDistribution& dist, Index dense_limit) {
            const PdVerdict v = check_predictive_pd(dist, dense_limit);
            return py::make_tuple(v.pd, v.lambda_min);
        },
        py::arg("dist"), py::arg("dense_limit") = 2000);

    py::class_<TrainResult>(m, "TrainResult")
        .def_readonly("params", &TrainResult::params)
        .def_readonly("bandwidth_used", &TrainResult::bandwidth_used)
        .def_readonly("bandwidth_clamped", &TrainResult::bandwidth_clamped)
        .def_readonly("loss_trace", &TrainResult::loss_trace)
        .def_readonly("pd_violations", &TrainResult::pd_violations)
        .def_readonly("wall_time_s", &TrainResult::wall_time_s)
        .def_readonly("converged", &TrainResult::converged)
        .def_readonly("final_bandwidth_check", &TrainResult::final_bandwidth_check)
        .def_readonly("bandwidth_warning", &TrainResult::bandwidth_warning);

    m.def("init_hyperparams", &init_hyperparams, py::arg("data"));
    m.def(
        "fit",
        [](const Dataset1D& data, const std::string& mode, std::optional<Index> k,
           std::optional<SeHyperParams> init, int max_iters, double grad_tol, double fd_step,
           const std::string& pd_policy) {
            TrainConfig cfg;
            cfg.mode = mode_from_string(mode);
            if (k) {
                cfg.bandwidth_policy = BandwidthPolicy::Fixed;
                cfg.fixed_k = *k;
            } else {
                cfg.bandwidth_policy = BandwidthPolicy::Theoretical;
            }
            cfg.init = init;
            cfg.max_iters = max_iters;
            cfg.grad_tol = grad_tol;
            cfg.fd_step = fd_step;
            if (pd_policy == "abort")
                cfg.pd_failure_policy = PdFailurePolicy::Abort;
            else if (pd_policy == "backtrack")
                cfg.pd_failure_policy = PdFailurePolicy::BacktrackStep;
            else
                throw InvalidParams("pd_policy must be 'abort' or 'backtrack'");
            return fit(data, cfg);
        },
        py::arg("data"), py::arg("mode") = "btc", py::arg("k") = std::nullopt,
        py::arg("init") = std::nullopt, py::arg("max_iters") = 200, py::arg("grad_tol") = 1e-5,
        py::arg("fd_step") = 1e-4, py::arg("pd_policy") = "backtrack");

    m.def("nmse", &nmse, py::arg("y_star"), py::arg("mu_star"));
    m.def("nlpd", &nlpd, py::arg("dist"), py::arg("y_star"));
    m.def("nlpd_pointwise_mean", &nlpd_pointwise_mean, py::arg("dist"), py::arg("y_star"));
    m.def(
        "kfold_split",
        [](Index n, int folds, std::uint64_t seed) {
            py::list out;
            for (const FoldIndices& f : kfold_split(n, folds, seed))
                out.append(py::make_tuple(f.train, f.test));
            return out;
        },
        py::arg("n"), py::arg("folds"), py::arg("seed"));
    m.def("sample_gp", &sample_gp, py::arg("x"), py::arg("params"), py::arg("seed"),
          py::arg("dense_limit") = 5000);
}
