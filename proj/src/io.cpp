#include "btcgp/io.hpp"

#include <algorithm>
#include <charconv>
#include <cinttypes>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>
#include <utility>

namespace btcgp {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return {};
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

double parse_double(const std::string& field, const std::string& context) {
    const std::string t = trim(field);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
    if (ec != std::errc{} || ptr != t.data() + t.size())
        throw CsvError(context + ": cannot parse number '" + field + "'");
    return value;
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::uint64_t fnv1a_bytes(std::uint64_t hash, const void* data, std::size_t bytes) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < bytes; ++i) {
        hash ^= p[i];
        hash *= 0x100000001b3ull;
    }
    return hash;
}

std::string mode_name(Mode mode) { return mode == Mode::Exact ? "exact" : "btc"; }

Mode mode_from_name(const std::string& name, const std::string& context) {
    if (name == "exact") return Mode::Exact;
    if (name == "btc") return Mode::Btc;
    throw ConfigError(context + ": unknown mode '" + name + "'");
}

nlohmann::json params_json(const SeHyperParams& p) {
    return {{"sigma2", p.signal_var}, {"lengthscale", p.lengthscale}, {"noise_var", p.noise_var}};
}

SeHyperParams params_from_json(const nlohmann::json& j, const std::string& context) {
    if (!j.is_object() || !j.contains("sigma2") || !j.contains("lengthscale") ||
        !j.contains("noise_var"))
        throw ConfigError(context + ": expected {sigma2, lengthscale, noise_var}");
    SeHyperParams p{j.at("sigma2").get<double>(), j.at("lengthscale").get<double>(),
                    j.at("noise_var").get<double>()};
    try {
        p.validate();
    } catch (const InvalidParams& e) {
        throw ConfigError(context + ": " + e.what());
    }
    return p;
}

nlohmann::json load_json_file(const std::string& path, const std::string& what) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + what + " '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(what + " '" + path + "' is not valid JSON: " + e.what());
    }
    return j;
}

}  // namespace

Dataset1D read_xy_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw CsvError("cannot open '" + path + "'");

    std::string line;
    if (!std::getline(in, line)) throw CsvError("'" + path + "' is empty");
    {
        std::string header = trim(line);
        header.erase(std::remove(header.begin(), header.end(), ' '), header.end());
        if (header != "x,y")
            throw CsvError("'" + path + "': expected header 'x,y', got '" + trim(line) + "'");
    }

    std::vector<std::pair<double, double>> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty()) continue;
        const auto comma = t.find(',');
        if (comma == std::string::npos || t.find(',', comma + 1) != std::string::npos)
            throw CsvError("'" + path + "' line " + std::to_string(lineno) +
                           ": expected two comma-separated fields");
        const std::string ctx = "'" + path + "' line " + std::to_string(lineno);
        const double x = parse_double(t.substr(0, comma), ctx);
        const double y = parse_double(t.substr(comma + 1), ctx);
        if (!std::isfinite(x) || !std::isfinite(y))
            throw CsvError(ctx + ": values must be finite");
        rows.emplace_back(x, y);
    }
    if (rows.empty()) throw CsvError("'" + path + "' has no data rows");

    std::stable_sort(rows.begin(), rows.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    Eigen::VectorXd x(static_cast<Index>(rows.size())), y(static_cast<Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        x[static_cast<Index>(i)] = rows[i].first;
        y[static_cast<Index>(i)] = rows[i].second;
    }
    return Dataset1D(std::move(x), std::move(y));  // duplicate x rejected here
}

void write_xy_csv(const std::string& path, const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    if (x.size() != y.size()) throw DimensionMismatch("x and y must have equal length");
    std::ofstream out(path);
    if (!out) throw CsvError("cannot write '" + path + "'");
    out << "x,y\n";
    for (Index i = 0; i < x.size(); ++i)
        out << format_double(x[i]) << ',' << format_double(y[i]) << '\n';
}

std::string dataset_fingerprint(const Dataset1D& data) {
    std::uint64_t hash = 0xcbf29ce484222325ull;
    hash = fnv1a_bytes(hash, data.x().data(), sizeof(double) * data.x().size());
    hash = fnv1a_bytes(hash, data.y().data(), sizeof(double) * data.y().size());
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%016" PRIx64, hash);
    return buf;
}

void write_model_json(const std::string& path, const ModelFile& model, const TrainResult& result,
                      const nlohmann::json& config_echo) {
    nlohmann::json j;
    j["format"] = "btcgp-model-v1";
    j["mode"] = mode_name(model.mode);
    j["bandwidth"] = model.bandwidth;
    j["params"] = params_json(model.params);
    j["train"]["x"] = std::vector<double>(model.train.x().data(),
                                          model.train.x().data() + model.train.x().size());
    j["train"]["y"] = std::vector<double>(model.train.y().data(),
                                          model.train.y().data() + model.train.y().size());
    j["fingerprint"] = dataset_fingerprint(model.train);

    nlohmann::json fitj;
    fitj["loss_trace"] = result.loss_trace;
    fitj["pd_violations"] = result.pd_violations;
    fitj["converged"] = result.converged;
    fitj["final_bandwidth_check"] = result.final_bandwidth_check;
    fitj["bandwidth_warning"] = result.bandwidth_warning;
    fitj["bandwidth_clamped"] = result.bandwidth_clamped;
    fitj["wall_time_s"] = result.wall_time_s;
    j["fit"] = std::move(fitj);
    j["config"] = config_echo;

    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write model file '" + path + "'");
    out << j.dump(2) << '\n';
}

ModelFile read_model_json(const std::string& path) {
    const nlohmann::json j = load_json_file(path, "model file");
    if (!j.is_object() || j.value("format", "") != std::string("btcgp-model-v1"))
        throw ConfigError("'" + path + "' is not a btcgp model file");
    for (const char* key : {"mode", "bandwidth", "params", "train", "fingerprint"})
        if (!j.contains(key)) throw ConfigError("'" + path + "' is missing '" + key + "'");

    const auto& tr = j.at("train");
    if (!tr.is_object() || !tr.contains("x") || !tr.contains("y"))
        throw ConfigError("'" + path + "': train must hold x and y arrays");
    const auto xs = tr.at("x").get<std::vector<double>>();
    const auto ys = tr.at("y").get<std::vector<double>>();
    if (xs.size() != ys.size()) throw ConfigError("'" + path + "': x and y lengths differ");
    Eigen::VectorXd x(static_cast<Index>(xs.size())), y(static_cast<Index>(ys.size()));
    std::copy(xs.begin(), xs.end(), x.data());
    std::copy(ys.begin(), ys.end(), y.data());

    ModelFile model{params_from_json(j.at("params"), "'" + path + "' params"),
                    mode_from_name(j.at("mode").get<std::string>(), "'" + path + "'"),
                    j.at("bandwidth").get<Index>(), Dataset1D(std::move(x), std::move(y))};
    if (model.bandwidth < 0 || model.bandwidth > model.train.size() - 1)
        throw ConfigError("'" + path + "': bandwidth outside [0, n-1]");
    if (dataset_fingerprint(model.train) != j.at("fingerprint").get<std::string>())
        throw ConfigError("'" + path + "': fingerprint does not match the embedded data");
    return model;
}

nlohmann::json train_config_json(const TrainConfig& config) {
    nlohmann::json j;
    if (config.init)
        j["init"] = params_json(*config.init);
    else
        j["init"] = "auto";
    j["max_iters"] = config.max_iters;
    j["grad_tol"] = config.grad_tol;
    j["fd_step"] = config.fd_step;
    j["pd_policy"] =
        config.pd_failure_policy == PdFailurePolicy::Abort ? "abort" : "backtrack";
    return j;
}

nlohmann::json experiment_config_json(const ExperimentConfig& config) {
    nlohmann::json j;
    if (const auto* path = std::get_if<std::string>(&config.dataset)) {
        j["dataset"] = {{"csv", *path}};
    } else {
        const SyntheticSpec& s = std::get<SyntheticSpec>(config.dataset);
        j["dataset"] = {{"synthetic",
                         {{"sigma2", s.params.signal_var},
                          {"lengthscale", s.params.lengthscale},
                          {"noise_var", s.params.noise_var},
                          {"delta", s.delta},
                          {"n", s.n}}}};
    }
    j["methods"] = nlohmann::json::array();
    for (const MethodSpec& m : config.methods) {
        nlohmann::json mj{{"method", mode_name(m.mode)}};
        if (m.mode == Mode::Btc) mj["k"] = m.k;
        j["methods"].push_back(std::move(mj));
    }
    j["folds"] = config.folds;
    j["seed"] = config.seed;
    j["output"] = config.output;
    j["train"] = train_config_json(config.train);
    return j;
}

namespace {

void parse_train_section(const nlohmann::json& j, TrainConfig& tc) {
    for (const auto& [key, value] : j.items()) {
        if (key == "init") {
            if (value.is_string() && value.get<std::string>() == "auto")
                tc.init.reset();
            else
                tc.init = params_from_json(value, "train.init");
        } else if (key == "max_iters") {
            if (!value.is_number_integer() || value.get<int>() < 1)
                throw ConfigError("train.max_iters must be a positive integer");
            tc.max_iters = value.get<int>();
        } else if (key == "grad_tol") {
            tc.grad_tol = value.get<double>();
            if (!(tc.grad_tol > 0)) throw ConfigError("train.grad_tol must be positive");
        } else if (key == "fd_step") {
            tc.fd_step = value.get<double>();
            if (!(tc.fd_step > 0)) throw ConfigError("train.fd_step must be positive");
        } else if (key == "pd_policy") {
            const std::string p = value.get<std::string>();
            if (p == "abort")
                tc.pd_failure_policy = PdFailurePolicy::Abort;
            else if (p == "backtrack")
                tc.pd_failure_policy = PdFailurePolicy::BacktrackStep;
            else
                throw ConfigError("train.pd_policy must be 'abort' or 'backtrack'");
        } else {
            throw ConfigError("unknown key 'train." + key + "'");
        }
    }
}

}  // namespace

ExperimentConfig read_experiment_config(const std::string& path) {
    const nlohmann::json j = load_json_file(path, "experiment config");
    if (!j.is_object()) throw ConfigError("'" + path + "': expected a JSON object");

    ExperimentConfig cfg;
    bool have_dataset = false, have_methods = false;
    for (const auto& [key, value] : j.items()) {
        if (key == "dataset") {
            have_dataset = true;
            if (value.is_object() && value.contains("csv")) {
                cfg.dataset = value.at("csv").get<std::string>();
            } else if (value.is_object() && value.contains("synthetic")) {
                const auto& s = value.at("synthetic");
                SyntheticSpec spec;
                spec.params = SeHyperParams{s.at("sigma2").get<double>(),
                                            s.at("lengthscale").get<double>(),
                                            s.at("noise_var").get<double>()};
                try {
                    spec.params.validate();
                } catch (const InvalidParams& e) {
                    throw ConfigError(std::string("dataset.synthetic: ") + e.what());
                }
                spec.delta = s.at("delta").get<double>();
                if (!(spec.delta > 0)) throw ConfigError("dataset.synthetic.delta must be positive");
                spec.n = s.at("n").get<Index>();
                if (spec.n < 2) throw ConfigError("dataset.synthetic.n must be at least 2");
                cfg.dataset = spec;
            } else {
                throw ConfigError("dataset must hold either 'csv' or 'synthetic'");
            }
        } else if (key == "methods") {
            have_methods = true;
            if (!value.is_array() || value.empty())
                throw ConfigError("methods must be a non-empty array");
            for (const auto& mj : value) {
                if (!mj.is_object() || !mj.contains("method"))
                    throw ConfigError("each method entry needs a 'method' field");
                const Mode mode = mode_from_name(mj.at("method").get<std::string>(), "methods");
                if (mode == Mode::Exact) {
                    if (mj.contains("k")) throw ConfigError("exact methods take no bandwidth");
                    cfg.methods.push_back(MethodSpec{mode, -1});
                    continue;
                }
                if (!mj.contains("k")) throw ConfigError("btc methods need 'k'");
                const auto& kj = mj.at("k");
                std::vector<Index> ks;
                if (kj.is_array())
                    ks = kj.get<std::vector<Index>>();
                else
                    ks.push_back(kj.get<Index>());
                for (const Index k : ks) {
                    if (k < 1) throw ConfigError("btc bandwidths must be >= 1");
                    cfg.methods.push_back(MethodSpec{mode, k});
                }
            }
        } else if (key == "folds") {
            if (!value.is_number_integer() || value.get<int>() < 2)
                throw ConfigError("folds must be an integer >= 2");
            cfg.folds = value.get<int>();
        } else if (key == "seed") {
            cfg.seed = value.get<std::uint64_t>();
        } else if (key == "output") {
            cfg.output = value.get<std::string>();
        } else if (key == "train") {
            if (!value.is_object()) throw ConfigError("train must be an object");
            parse_train_section(value, cfg.train);
        } else {
            throw ConfigError("unknown key '" + key + "'");
        }
    }
    if (!have_dataset) throw ConfigError("config is missing 'dataset'");
    if (!have_methods) throw ConfigError("config is missing 'methods'");
    return cfg;
}

namespace {

nlohmann::json fold_row(const EvalReport& rep, const FoldOutcome& fo, std::uint64_t seed) {
    nlohmann::json row;
    row["method"] = rep.method;
    if (rep.k >= 0)
        row["k"] = rep.k;
    else
        row["k"] = nullptr;
    row["fold"] = fo.fold;
    auto put = [&row](const char* key, double v) {
        if (std::isfinite(v))
            row[key] = v;
        else
            row[key] = nullptr;
    };
    put("nmse", fo.pd_valid ? fo.nmse : std::numeric_limits<double>::quiet_NaN());
    put("nlpd", fo.pd_valid ? fo.nlpd : std::numeric_limits<double>::quiet_NaN());
    put("nlpd_mean", fo.pd_valid ? fo.nlpd_mean : std::numeric_limits<double>::quiet_NaN());
    put("fit_s", fo.fit_s);
    put("predict_s", fo.predict_s);
    row["pd_valid"] = fo.pd_valid;
    row["seed"] = seed;
    return row;
}

std::string csv_cell(double v) { return std::isfinite(v) ? format_double(v) : std::string(); }

}  // namespace

void write_reports(const std::string& stem, const std::vector<EvalReport>& reports,
                   const ExperimentConfig& config) {
    nlohmann::json rows = nlohmann::json::array();
    for (const EvalReport& rep : reports)
        for (const FoldOutcome& fo : rep.folds) rows.push_back(fold_row(rep, fo, config.seed));

    nlohmann::json doc;
    doc["config"] = experiment_config_json(config);
    doc["reports"] = rows;

    {
        std::ofstream out(stem + ".json");
        if (!out) throw ConfigError("cannot write report '" + stem + ".json'");
        out << doc.dump(2) << '\n';
    }

    std::ofstream csv(stem + ".csv");
    if (!csv) throw ConfigError("cannot write report '" + stem + ".csv'");
    csv << "method,k,fold,nmse,nlpd,nlpd_mean,fit_s,predict_s,pd_valid,seed\n";
    for (const EvalReport& rep : reports) {
        for (const FoldOutcome& fo : rep.folds) {
            csv << rep.method << ',';
            if (rep.k >= 0) csv << rep.k;
            csv << ',' << fo.fold << ',';
            csv << (fo.pd_valid ? csv_cell(fo.nmse) : std::string()) << ',';
            csv << (fo.pd_valid ? csv_cell(fo.nlpd) : std::string()) << ',';
            csv << (fo.pd_valid ? csv_cell(fo.nlpd_mean) : std::string()) << ',';
            csv << csv_cell(fo.fit_s) << ',' << csv_cell(fo.predict_s) << ',';
            csv << (fo.pd_valid ? "true" : "false") << ',' << config.seed << '\n';
        }
    }
}

void write_bench_csv(const std::string& path, const std::vector<BenchRow>& rows) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write '" + path + "'");
    out << "n,loss_eval_s,fit_s\n";
    for (const BenchRow& r : rows)
        out << r.n << ',' << format_double(r.loss_eval_s) << ',' << format_double(r.fit_s) << '\n';
}

}  // namespace btcgp
