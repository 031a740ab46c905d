#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string_view>
#include <vector>

#include "spamsim/analytics.hpp"
#include "spamsim/protocol.hpp"

namespace spamsim {

/// Post-selection stages, applied cumulatively: no filter, then R0, R1, R2,
/// R3/R4 and R5.
inline constexpr std::size_t kStageCount = 6;
inline constexpr std::array<std::string_view, kStageCount> kStageNames = {"none", "R0", "R1", "R2", "R3R4", "R5"};
inline constexpr std::size_t kFlagReasonCount = 7;

/// Integer tallies for one prepared state. Merging is plain addition, so the
/// result does not depend on the order shots are added in.
struct StateTally {
  std::uint64_t shots = 0;
  std::array<std::uint64_t, kStageCount> kept{};
  std::array<std::uint64_t, kStageCount> errors{};  // kept shots whose R3 readout != prepared
  std::array<std::uint64_t, kFlagReasonCount> reasons{};
  std::map<int, std::uint64_t> attempts;

  void add(const ShotRecord& record);
  void merge(const StateTally& other);
};

/// First stage at which the shot is removed (kStageCount if never).
std::size_t rejection_stage(FlagReason reason);

class SummaryAccumulator {
 public:
  explicit SummaryAccumulator(std::int64_t histogram_bin_width = 5);

  void add(const ShotRecord& record);
  void merge(const SummaryAccumulator& other);

  const StateTally& tally(QubitValue prepared) const { return tallies_[static_cast<std::size_t>(prepared)]; }
  /// Count histograms per detection label, keyed by bin lower edge.
  const std::array<std::map<std::int64_t, std::uint64_t>, kDetectionCount>& histograms() const {
    return histograms_;
  }
  std::int64_t histogram_bin_width() const { return bin_width_; }
  std::uint64_t total_shots() const { return tallies_[0].shots + tallies_[1].shots; }

 private:
  std::int64_t bin_width_;
  std::array<StateTally, 2> tallies_;
  std::array<std::map<std::int64_t, std::uint64_t>, kDetectionCount> histograms_;
};

struct StageSummary {
  std::string_view name;
  std::uint64_t kept;
  double retention;
  std::optional<RateEstimate> error;  // absent when no shot survives the stage
};

struct StateSummary {
  QubitValue prepared;
  std::uint64_t shots;
  std::vector<StageSummary> stages;
  double rejected_fraction;
  std::array<std::uint64_t, kFlagReasonCount> reasons;
  std::map<int, std::uint64_t> attempts;

  const StageSummary& final_stage() const { return stages.back(); }
};

struct ExperimentSummary {
  std::vector<StateSummary> states;  // only states that received shots
  std::vector<StageSummary> overall;  // both states pooled
  std::vector<std::optional<double>> average_error;  // per stage, mean of per-state points
  double wilson_z;

  const StateSummary* state(QubitValue prepared) const;
};

ExperimentSummary summarize(const SummaryAccumulator& acc, double wilson_z = 1.0);
/// Summary of a finished record set. Throws std::invalid_argument if empty.
ExperimentSummary spam_summary(const std::vector<ShotRecord>& records, double wilson_z = 1.0);

}  // namespace spamsim
