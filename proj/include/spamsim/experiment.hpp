#pragma once

#include <cstdint>
#include <vector>

#include "spamsim/analytics.hpp"
#include "spamsim/error_model.hpp"
#include "spamsim/protocol.hpp"
#include "spamsim/summary.hpp"

namespace spamsim {

enum class RunMode { PostSelect, RepeatUntilSuccess };

std::string_view to_string(RunMode mode);
RunMode parse_run_mode(std::string_view text);

struct ExperimentConfig {
  EncodingName encoding = EncodingName::Metastable;
  std::uint64_t shots = 1000;  // per prepared state
  RunMode mode = RunMode::PostSelect;
  int max_attempts = 1;  // used in RepeatUntilSuccess mode
  std::uint64_t seed = 0;
  bool interleave = true;
  std::vector<QubitValue> states = {QubitValue::Zero, QubitValue::One};
  bool strict_flags = false;
  bool keep_records = false;
  unsigned threads = 1;
  double wilson_z = 1.0;
  std::int64_t histogram_bin_width = 5;

  void validate() const;
  std::uint64_t total_shots() const { return shots * states.size(); }
  /// State prepared by shot `index`.
  QubitValue state_of_shot(std::uint64_t index) const;
};

struct ExperimentResult {
  SummaryAccumulator tallies;
  ExperimentSummary summary;
  std::vector<ShotRecord> records;  // in shot order; empty unless keep_records
};

/// Runs config.total_shots() shots. Shot i uses stream_rng(seed, i), so the
/// outcome is independent of the thread count.
ExperimentResult run_experiment(const ExperimentConfig& config, const ErrorModel& model);

// ---------------------------------------------------------------------------
// Pulse-duration bias scan

struct BiasPoint {
  double t_over_tpi;
  double measured_bias;
  double closed_form_bias;
  double standard_error;
  std::uint64_t accepted;
  std::uint64_t shots;
};

struct BiasScanConfig {
  BiasCurve curve = BiasCurve::Optical0;
  std::vector<double> t_grid = {0.6, 0.7, 0.8, 0.9, 1.0};
  std::uint64_t shots_per_point = 100000;
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

/// Indices of the measurement-part transfers varied for a bias curve.
std::vector<std::size_t> scanned_steps(const Sequence& sequence, BiasCurve curve);

/// Superposition sequence for one curve with the scanned pulses set to
/// t_over_tpi of their calibrated duration.
Sequence bias_sequence(BiasCurve curve, QubitValue origin, double t_over_tpi, const ErrorModel& model);

/// MC and closed-form bias on the grid. Static pump/pulse errors are removed
/// from the model so the scanned pulses are the only source of unequal
/// acceptance; decay and detection stay as configured. Shots alternate the
/// state the superposition is rotated from.
std::vector<BiasPoint> run_bias_scan(const BiasScanConfig& config, const ErrorModel& model);

// ---------------------------------------------------------------------------

/// Counts from `samples` detections at a fixed fluorescing fraction.
std::vector<std::int64_t> simulate_counts(const DetectionModel& model, double fluorescing, std::size_t samples,
                                          std::uint64_t seed);

}  // namespace spamsim
