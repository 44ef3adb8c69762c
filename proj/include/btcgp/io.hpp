#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "btcgp/eval.hpp"
#include "btcgp/kernel.hpp"
#include "btcgp/model.hpp"
#include "btcgp/train.hpp"

namespace btcgp {

/// Reads a `x,y` CSV ('.' decimal separator), sorts rows by x and rejects
/// duplicate locations. Throws CsvError on malformed input.
Dataset1D read_xy_csv(const std::string& path);

/// Writes a `x,y` CSV with round-trippable doubles.
void write_xy_csv(const std::string& path, const Eigen::VectorXd& x, const Eigen::VectorXd& y);

/// FNV-1a hash over the raw bytes of x then y, as a fixed-width hex string.
std::string dataset_fingerprint(const Dataset1D& data);

/// On-disk model: hyperparameters, mode, bandwidth and the full training
/// data, guarded by a fingerprint.
struct ModelFile {
    SeHyperParams params{1.0, 1.0, 1.0};
    Mode mode = Mode::Btc;
    Index bandwidth = 0;
    Dataset1D train;
};

void write_model_json(const std::string& path, const ModelFile& model, const TrainResult& result,
                      const nlohmann::json& config_echo);

/// Loads and validates a model file; a fingerprint that does not match the
/// embedded data raises ConfigError.
ModelFile read_model_json(const std::string& path);

/// Parses an experiment configuration; unknown/invalid fields raise
/// ConfigError. Defaults: folds 5, seed 0, train settings as in TrainConfig.
ExperimentConfig read_experiment_config(const std::string& path);

/// Resolved-configuration echo (defaults filled in) for reproducibility.
nlohmann::json experiment_config_json(const ExperimentConfig& config);
nlohmann::json train_config_json(const TrainConfig& config);

/// Writes <stem>.json ({"config": ..., "reports": [...]}) and <stem>.csv with
/// columns method,k,fold,nmse,nlpd,nlpd_mean,fit_s,predict_s,pd_valid,seed.
/// Invalid folds keep their row with empty metric cells.
void write_reports(const std::string& stem, const std::vector<EvalReport>& reports,
                   const ExperimentConfig& config);

void write_bench_csv(const std::string& path, const std::vector<BenchRow>& rows);

}  // namespace btcgp
