#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "spamsim/analytics.hpp"
#include "spamsim/detection.hpp"
#include "spamsim/error_model.hpp"
#include "spamsim/experiment.hpp"

namespace spamsim {

using Json = nlohmann::ordered_json;

/// Malformed or out-of-range configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// File could not be read or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Serializes with non-integer numbers printed to 6 significant digits.
std::string dump_json(const Json& j, int indent = 2);

/// Rounds to 6 significant digits for output.
double round_sig(double x, int digits = 6);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& content);

// Config

Json to_json(const ErrorModel& model);
/// Missing sections keep the defaults of `base`.
ErrorModel error_model_from_json(const Json& j, const ErrorModel& base = ErrorModel::reference_defaults());
Json to_json(const ExperimentConfig& config);
ExperimentConfig experiment_config_from_json(const Json& j, ExperimentConfig base = {});

struct RunConfig {
  ExperimentConfig experiment;
  ErrorModel model = ErrorModel::reference_defaults();
};

/// Parses {"experiment": {...}, "model": {...}}; both sections optional.
/// Throws ConfigError on unknown keys, wrong types or invalid values.
RunConfig parse_run_config(const std::string& text);
RunConfig load_run_config(const std::filesystem::path& path);
Json to_json(const RunConfig& config);

// Results

Json summary_to_json(const ExperimentSummary& summary, const ExperimentConfig& config);
Json calibration_to_json(const ThresholdCalibration& calibration, FitMethod method);
std::string records_to_csv(const std::vector<ShotRecord>& records);
std::string histogram_to_csv(const std::map<std::int64_t, std::uint64_t>& bins);
std::string histogram_to_csv(const CountHistogram& histogram);
CountHistogram histogram_from_csv(const std::string& text, HistogramLabel label);
std::string bias_to_csv(BiasCurve curve, const std::vector<BiasPoint>& points);
std::string lifetime_samples_to_csv(const std::vector<std::pair<double, bool>>& samples);
/// Accepts "delay,decayed" rows (decayed 0/1) or "delay,decayed,trials" rows.
std::vector<LifetimeObservation> lifetime_observations_from_csv(const std::string& text);

}  // namespace spamsim
