#include "btcgp/cli.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "btcgp/eval.hpp"
#include "btcgp/io.hpp"
#include "btcgp/model.hpp"
#include "btcgp/train.hpp"

namespace btcgp {

namespace {

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::optional<SeHyperParams> parse_init(const std::string& spec) {
    if (spec == "auto") return std::nullopt;
    std::vector<double> vals;
    std::stringstream ss(spec);
    std::string field;
    while (std::getline(ss, field, ',')) {
        try {
            std::size_t used = 0;
            vals.push_back(std::stod(field, &used));
            if (used != field.size()) throw std::invalid_argument(field);
        } catch (const std::exception&) {
            throw InvalidParams("--init expects 'auto' or 'sigma2,lengthscale,noise_var'");
        }
    }
    if (vals.size() != 3)
        throw InvalidParams("--init expects 'auto' or 'sigma2,lengthscale,noise_var'");
    SeHyperParams p{vals[0], vals[1], vals[2]};
    p.validate();
    return p;
}

SeHyperParams parse_params_flag(const std::string& spec) {
    const auto p = parse_init(spec);
    if (!p) throw InvalidParams("--params expects 'sigma2,lengthscale,noise_var'");
    return *p;
}

/// Test locations: either a CSV file with an x column or start:stop:count.
Eigen::VectorXd parse_at(const std::string& spec) {
    if (std::filesystem::exists(spec)) {
        std::ifstream in(spec);
        if (!in) throw CsvError("cannot open '" + spec + "'");
        std::string line;
        if (!std::getline(in, line)) throw CsvError("'" + spec + "' is empty");
        std::string header = line;
        header.erase(std::remove_if(header.begin(), header.end(),
                                    [](char c) { return c == ' ' || c == '\r'; }),
                     header.end());
        if (header != "x" && header != "x,y")
            throw CsvError("'" + spec + "': expected header 'x' or 'x,y'");
        std::vector<double> xs;
        std::size_t lineno = 1;
        while (std::getline(in, line)) {
            ++lineno;
            std::string t = line;
            t.erase(std::remove_if(t.begin(), t.end(),
                                   [](char c) { return c == ' ' || c == '\r'; }),
                    t.end());
            if (t.empty()) continue;
            const std::string field = t.substr(0, t.find(','));
            try {
                std::size_t used = 0;
                xs.push_back(std::stod(field, &used));
                if (used != field.size()) throw std::invalid_argument(field);
            } catch (const std::exception&) {
                throw CsvError("'" + spec + "' line " + std::to_string(lineno) +
                               ": cannot parse '" + field + "'");
            }
        }
        Eigen::VectorXd x(static_cast<Index>(xs.size()));
        std::copy(xs.begin(), xs.end(), x.data());
        return x;
    }

    // start:stop:count
    double start = 0, stop = 0;
    long long count = 0;
    std::stringstream ss(spec);
    std::string a, b, c;
    if (!std::getline(ss, a, ':') || !std::getline(ss, b, ':') || !std::getline(ss, c))
        throw InvalidParams("--at expects a CSV path or start:stop:count");
    try {
        start = std::stod(a);
        stop = std::stod(b);
        count = std::stoll(c);
    } catch (const std::exception&) {
        throw InvalidParams("--at expects a CSV path or start:stop:count");
    }
    if (count < 0) throw InvalidParams("--at count must be non-negative");
    Eigen::VectorXd x(static_cast<Index>(count));
    if (count == 1) {
        x[0] = start;
    } else if (count > 1) {
        const double step = (stop - start) / static_cast<double>(count - 1);
        for (long long i = 0; i < count; ++i) x[static_cast<Index>(i)] = start + step * i;
    }
    return x;
}

void echo_config(std::ostream& out, const nlohmann::json& j) {
    out << "config: " << j.dump() << "\n";
}

struct FitOptions {
    std::string data_path;
    std::string mode = "btc";
    Index k = -1;
    std::string k_policy;
    double delta_quantile = -1.0;  // < 0 means use the true minimum spacing
    std::string init = "auto";
    std::string out_path;
    std::uint64_t seed = 0;
};

int cmd_fit(const FitOptions& opt, std::ostream& out, std::ostream& err) {
    const Mode mode = opt.mode == "exact" ? Mode::Exact : Mode::Btc;
    if (mode == Mode::Btc) {
        if ((opt.k >= 0) == !opt.k_policy.empty()) {
            err << "btc mode requires exactly one of --k or --k-policy\n";
            return 1;
        }
        if (!opt.k_policy.empty() && opt.k_policy != "theoretical") {
            err << "--k-policy only supports 'theoretical'\n";
            return 1;
        }
    } else if (opt.k >= 0 || !opt.k_policy.empty()) {
        err << "--k/--k-policy apply to btc mode only\n";
        return 1;
    }

    if (opt.delta_quantile >= 0.0 && opt.k_policy.empty()) {
        err << "--delta-quantile only applies with --k-policy theoretical\n";
        return 1;
    }

    TrainConfig tc;
    tc.init = parse_init(opt.init);
    tc.mode = mode;
    if (mode == Mode::Btc && opt.k >= 0) {
        tc.bandwidth_policy = BandwidthPolicy::Fixed;
        tc.fixed_k = opt.k;
    } else {
        tc.bandwidth_policy = BandwidthPolicy::Theoretical;
        if (opt.delta_quantile >= 0.0) {
            if (opt.delta_quantile > 1.0) {
                err << "--delta-quantile must lie in [0, 1]\n";
                return 1;
            }
            tc.delta_quantile = opt.delta_quantile;
        }
    }

    nlohmann::json echo = train_config_json(tc);
    echo["data"] = opt.data_path;
    echo["mode"] = opt.mode;
    echo["bandwidth_policy"] =
        tc.bandwidth_policy == BandwidthPolicy::Fixed ? "fixed" : "theoretical";
    if (tc.bandwidth_policy == BandwidthPolicy::Fixed) echo["k"] = tc.fixed_k;
    if (tc.delta_quantile)
        echo["delta_quantile"] = *tc.delta_quantile;
    else if (tc.bandwidth_policy == BandwidthPolicy::Theoretical)
        echo["delta_quantile"] = "min";
    echo["seed"] = opt.seed;
    echo["out"] = opt.out_path;

    const Dataset1D data = read_xy_csv(opt.data_path);
    const TrainResult result = fit(data, tc);

    const ModelFile model{result.params, mode, result.bandwidth_used, data};
    write_model_json(opt.out_path, model, result, echo);

    out << "fit: mode=" << opt.mode << " n=" << data.size() << " k=" << result.bandwidth_used
        << (tc.bandwidth_policy == BandwidthPolicy::Fixed ? " (fixed)" : " (theoretical at init)")
        << "\n";
    out << "final loss: " << format_double(result.loss_trace.back().second) << " after "
        << result.loss_trace.size() - 1 << " accepted steps\n";
    out << "converged: " << (result.converged ? "yes" : "no") << "\n";
    out << "params: sigma2=" << format_double(result.params.signal_var)
        << " lengthscale=" << format_double(result.params.lengthscale)
        << " noise_var=" << format_double(result.params.noise_var) << "\n";
    out << "theoretical k at final params: " << result.final_bandwidth_check << "\n";
    if (result.bandwidth_clamped)
        out << "warning: theoretical bandwidth exceeded n-1 and was clamped\n";
    if (result.bandwidth_warning)
        out << "warning: theoretical bandwidth at the final hyperparameters ("
            << result.final_bandwidth_check << ") exceeds the bandwidth used ("
            << result.bandwidth_used << "); the certificate no longer covers this fit\n";
    if (!result.pd_violations.empty())
        out << "note: " << result.pd_violations.size()
            << " positive-definiteness failures were backtracked during training\n";
    out << "model written: " << opt.out_path << "\n";
    echo_config(out, echo);
    return 0;
}

struct PredictOptions {
    std::string model_path;
    std::string at;
    bool with_noise = false;
    std::string out_path;
};

int cmd_predict(const PredictOptions& opt, std::ostream& out, std::ostream& err) {
    const ModelFile model = read_model_json(opt.model_path);
    const Eigen::VectorXd x_star = parse_at(opt.at);

    const FittedModel fitted =
        fit_factor(model.params, model.train, model.mode, model.bandwidth);
    PredictiveDistribution dist = predict(fitted, x_star);
    if (opt.with_noise) dist = add_observation_noise(std::move(dist), model.params.noise_var);

    std::ofstream csv(opt.out_path);
    if (!csv) throw CsvError("cannot write '" + opt.out_path + "'");
    csv << "x,mean,variance\n";
    for (Index i = 0; i < x_star.size(); ++i)
        csv << format_double(x_star[i]) << ',' << format_double(dist.mean[i]) << ','
            << format_double(dist.cov(i, i)) << '\n';

    out << "predictions written: " << opt.out_path << " (" << x_star.size() << " points"
        << (opt.with_noise ? ", noise included" : "") << ")\n";
    echo_config(out, nlohmann::json{{"model", opt.model_path},
                                    {"at", opt.at},
                                    {"with_noise", opt.with_noise},
                                    {"out", opt.out_path}});
    (void)err;
    return 0;
}

struct BandwidthOptions {
    double sigma2 = 0, lengthscale = 0, noise = 0, delta = 0;
};

int cmd_bandwidth(const BandwidthOptions& opt, std::ostream& out, std::ostream& err) {
    const SeHyperParams params{opt.sigma2, opt.lengthscale, opt.noise};
    params.validate();
    if (!(opt.delta > 0)) throw InvalidParams("--delta must be positive");

    const Index k = theoretical_bandwidth(params, opt.delta);
    const double ratio = 2.0 * opt.sigma2 * opt.lengthscale * opt.lengthscale /
                         (3.0 * opt.noise * opt.delta * opt.delta);
    out << "k = " << k << "\n";
    if (ratio > 1.0)
        out << "branch: log (ratio = " << format_double(ratio) << " > 1)\n";
    else
        out << "branch: fallback (ratio = " << format_double(ratio) << " <= 1)\n";
    if (opt.lengthscale / opt.delta >= 100.0)
        err << "warning: delta is far below the length-scale, which makes this choice "
               "pessimistic for irregular data; consider thinning to a coarser spacing\n";
    echo_config(out, nlohmann::json{{"sigma2", opt.sigma2},
                                    {"lengthscale", opt.lengthscale},
                                    {"noise", opt.noise},
                                    {"delta", opt.delta}});
    return 0;
}

int cmd_eval(const std::string& config_path, std::ostream& out, std::ostream& err) {
    ExperimentConfig cfg = read_experiment_config(config_path);
    if (cfg.output.empty()) cfg.output = "report";
    const std::vector<EvalReport> reports = run_experiment(cfg);

    out << "method  k      nmse         nlpd         pd_valid_folds\n";
    for (const EvalReport& rep : reports) {
        int valid = 0;
        for (const FoldOutcome& fo : rep.folds) valid += fo.pd_valid ? 1 : 0;
        out << rep.method << (rep.method.size() < 6 ? std::string(6 - rep.method.size(), ' ') : " ");
        if (rep.k >= 0)
            out << ' ' << rep.k << (rep.k < 10 ? "     " : rep.k < 100 ? "    " : "   ");
        else
            out << " -     ";
        if (std::isfinite(rep.nmse_mean))
            out << format_double(rep.nmse_mean).substr(0, 12) << ' '
                << format_double(rep.nlpd_mean).substr(0, 12) << ' ';
        else
            out << "-            -            ";
        out << valid << "/" << rep.folds.size() << "\n";
    }
    out << "reports written: " << cfg.output << ".json, " << cfg.output << ".csv\n";
    echo_config(out, experiment_config_json(cfg));
    (void)err;
    return 0;
}

struct SimulateOptions {
    double sigma2 = 0, lengthscale = 0, noise = 0, delta = 0;
    Index n = 0;
    std::uint64_t seed = 0;
    std::string out_path;
};

int cmd_simulate(const SimulateOptions& opt, std::ostream& out, std::ostream& err) {
    const SeHyperParams params{opt.sigma2, opt.lengthscale, opt.noise};
    params.validate();
    if (!(opt.delta > 0)) throw InvalidParams("--delta must be positive");
    if (opt.n < 2) throw InvalidParams("--n must be at least 2");

    Eigen::VectorXd x(opt.n);
    for (Index i = 0; i < opt.n; ++i) x[i] = static_cast<double>(i) * opt.delta;
    const Eigen::VectorXd y = sample_gp(x, params, opt.seed, std::max<Index>(opt.n, 5000));
    write_xy_csv(opt.out_path, x, y);

    out << "simulated " << opt.n << " points written: " << opt.out_path << "\n";
    echo_config(out, nlohmann::json{{"sigma2", opt.sigma2},
                                    {"lengthscale", opt.lengthscale},
                                    {"noise", opt.noise},
                                    {"delta", opt.delta},
                                    {"n", opt.n},
                                    {"seed", opt.seed},
                                    {"out", opt.out_path}});
    (void)err;
    return 0;
}

struct BenchOptions {
    std::vector<Index> n_list;
    Index k = 0;
    std::string params = "1,1,0.1";
    double delta = 0.2;
    std::uint64_t seed = 0;
    std::string out_path;
};

int cmd_bench(const BenchOptions& opt, std::ostream& out, std::ostream& err) {
    if (opt.n_list.empty()) throw InvalidParams("--n-list must not be empty");
    if (opt.k < 1) throw InvalidParams("--k must be at least 1");
    const SeHyperParams params = parse_params_flag(opt.params);

    const std::vector<BenchRow> rows = bench_scaling(opt.n_list, opt.k, params, opt.seed, opt.delta);
    write_bench_csv(opt.out_path, rows);

    out << "n,loss_eval_s,fit_s\n";
    for (const BenchRow& r : rows)
        out << r.n << ',' << format_double(r.loss_eval_s) << ',' << format_double(r.fit_s) << "\n";
    out << "timings written: " << opt.out_path << "\n";
    echo_config(out, nlohmann::json{{"n_list", opt.n_list},
                                    {"k", opt.k},
                                    {"params", opt.params},
                                    {"delta", opt.delta},
                                    {"seed", opt.seed},
                                    {"out", opt.out_path}});
    (void)err;
    return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Gaussian-process regression for 1-D series with a banded training covariance"};
    app.require_subcommand(1);

    FitOptions fit_opt;
    CLI::App* fit_cmd = app.add_subcommand("fit", "Train hyperparameters on a CSV dataset");
    fit_cmd->add_option("--data", fit_opt.data_path, "input CSV with header x,y")->required();
    fit_cmd->add_option("--mode", fit_opt.mode, "exact or btc")
        ->required()
        ->check(CLI::IsMember({"exact", "btc"}));
    fit_cmd->add_option("--k", fit_opt.k, "fixed bandwidth (btc)");
    fit_cmd->add_option("--k-policy", fit_opt.k_policy,
                        "bandwidth policy: 'theoretical' evaluates the closed-form choice at the "
                        "initial hyperparameters (btc)");
    fit_cmd->add_option("--delta-quantile", fit_opt.delta_quantile,
                        "use this quantile of the adjacent gaps instead of the minimum when "
                        "evaluating the theoretical bandwidth (trades the guarantee for speed "
                        "on irregular data)");
    fit_cmd->add_option("--init", fit_opt.init, "'auto' or sigma2,lengthscale,noise_var");
    fit_cmd->add_option("--out", fit_opt.out_path, "output model JSON")->required();
    fit_cmd->add_option("--seed", fit_opt.seed, "seed echoed into the model file");

    PredictOptions pred_opt;
    CLI::App* pred_cmd = app.add_subcommand("predict", "Predict from a fitted model file");
    pred_cmd->add_option("--model", pred_opt.model_path, "model JSON from 'fit'")->required();
    pred_cmd->add_option("--at", pred_opt.at, "CSV of x locations or start:stop:count")
        ->required();
    pred_cmd->add_flag("--with-noise", pred_opt.with_noise,
                       "add the observation-noise variance to the reported variance");
    pred_cmd->add_option("--out", pred_opt.out_path, "output CSV (x,mean,variance)")->required();

    BandwidthOptions bw_opt;
    CLI::App* bw_cmd = app.add_subcommand("bandwidth", "Closed-form bandwidth choice");
    bw_cmd->add_option("--sigma2", bw_opt.sigma2, "signal variance")->required();
    bw_cmd->add_option("--lengthscale", bw_opt.lengthscale, "length-scale")->required();
    bw_cmd->add_option("--noise", bw_opt.noise, "noise variance")->required();
    bw_cmd->add_option("--delta", bw_opt.delta, "minimum input spacing")->required();

    std::string eval_config;
    CLI::App* eval_cmd = app.add_subcommand("eval", "Cross-validated evaluation from a JSON config");
    eval_cmd->add_option("--config", eval_config, "experiment config JSON")->required();

    SimulateOptions sim_opt;
    CLI::App* sim_cmd = app.add_subcommand("simulate", "Draw a synthetic dataset CSV");
    sim_cmd->add_option("--sigma2", sim_opt.sigma2, "signal variance")->required();
    sim_cmd->add_option("--lengthscale", sim_opt.lengthscale, "length-scale")->required();
    sim_cmd->add_option("--noise", sim_opt.noise, "noise variance")->required();
    sim_cmd->add_option("--delta", sim_opt.delta, "input spacing")->required();
    sim_cmd->add_option("--n", sim_opt.n, "number of points")->required();
    sim_cmd->add_option("--seed", sim_opt.seed, "generator seed");
    sim_cmd->add_option("--out", sim_opt.out_path, "output CSV")->required();

    BenchOptions bench_opt;
    CLI::App* bench_cmd = app.add_subcommand("bench", "Loss-evaluation and fit timing table");
    bench_cmd->add_option("--n-list", bench_opt.n_list, "series lengths")
        ->required()
        ->delimiter(',');
    bench_cmd->add_option("--k", bench_opt.k, "bandwidth")->required();
    bench_cmd->add_option("--params", bench_opt.params, "sigma2,lengthscale,noise_var");
    bench_cmd->add_option("--delta", bench_opt.delta, "input spacing");
    bench_cmd->add_option("--seed", bench_opt.seed, "generator seed");
    bench_cmd->add_option("--out", bench_opt.out_path, "output CSV")->required();

    std::vector<const char*> argv;
    argv.push_back("btcgp");
    for (const std::string& a : args) argv.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << e.what() << "\n";
        return 1;
    }

    try {
        if (app.got_subcommand(fit_cmd)) return cmd_fit(fit_opt, out, err);
        if (app.got_subcommand(pred_cmd)) return cmd_predict(pred_opt, out, err);
        if (app.got_subcommand(bw_cmd)) return cmd_bandwidth(bw_opt, out, err);
        if (app.got_subcommand(eval_cmd)) return cmd_eval(eval_config, out, err);
        if (app.got_subcommand(sim_cmd)) return cmd_simulate(sim_opt, out, err);
        if (app.got_subcommand(bench_cmd)) return cmd_bench(bench_opt, out, err);
        err << "no subcommand selected\n";
        return 1;
    } catch (const NotPositiveDefinite& e) {
        err << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const PdFailure& e) {
        err << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const NonFiniteLoss& e) {
        err << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const InvalidParams& e) {
        err << "usage error: " << e.what() << "\n";
        return 1;
    } catch (const BandwidthOutOfRange& e) {
        err << "usage error: " << e.what() << "\n";
        return 1;
    } catch (const Error& e) {
        err << "data error: " << e.what() << "\n";
        return 2;
    }
}

}  // namespace btcgp
