#include "spamsim/summary.hpp"

#include <stdexcept>

namespace spamsim {

std::size_t rejection_stage(FlagReason reason) {
  switch (reason) {
    case FlagReason::R0Dark:
      return 1;
    case FlagReason::R1Bright:
      return 2;
    case FlagReason::R2Bright:
      return 3;
    case FlagReason::R3R4Dark:
    case FlagReason::R3BrightR4Dark:
      return 4;
    case FlagReason::R5Dark:
      return 5;
    case FlagReason::None:
      return kStageCount;
  }
  throw std::invalid_argument("unknown flag reason");
}

void StateTally::add(const ShotRecord& record) {
  ++shots;
  const std::size_t removed_at = rejection_stage(record.reason);
  const bool wrong = raw_readout(record.outcomes) != record.prepared;
  for (std::size_t s = 0; s < removed_at; ++s) {
    ++kept[s];
    if (wrong) ++errors[s];
  }
  ++reasons[static_cast<std::size_t>(record.reason)];
  ++attempts[record.attempts];
}

void StateTally::merge(const StateTally& other) {
  shots += other.shots;
  for (std::size_t s = 0; s < kStageCount; ++s) {
    kept[s] += other.kept[s];
    errors[s] += other.errors[s];
  }
  for (std::size_t r = 0; r < kFlagReasonCount; ++r) reasons[r] += other.reasons[r];
  for (const auto& [a, n] : other.attempts) attempts[a] += n;
}

SummaryAccumulator::SummaryAccumulator(std::int64_t histogram_bin_width) : bin_width_(histogram_bin_width) {
  if (bin_width_ < 1) throw std::invalid_argument("histogram bin width must be at least 1");
}

void SummaryAccumulator::add(const ShotRecord& record) {
  tallies_[static_cast<std::size_t>(record.prepared)].add(record);
  for (std::size_t l = 0; l < kDetectionCount; ++l) {
    const std::int64_t c = record.counts[l];
    // floor division so negative counts land in the right bin
    std::int64_t q = c / bin_width_;
    if (c % bin_width_ != 0 && c < 0) --q;
    ++histograms_[l][q * bin_width_];
  }
}

void SummaryAccumulator::merge(const SummaryAccumulator& other) {
  if (other.bin_width_ != bin_width_) throw std::invalid_argument("cannot merge summaries with different bin widths");
  for (std::size_t i = 0; i < 2; ++i) tallies_[i].merge(other.tallies_[i]);
  for (std::size_t l = 0; l < kDetectionCount; ++l) {
    for (const auto& [bin, n] : other.histograms_[l]) histograms_[l][bin] += n;
  }
}

namespace {

std::vector<StageSummary> stage_summaries(const StateTally& t, double z) {
  std::vector<StageSummary> out;
  for (std::size_t s = 0; s < kStageCount; ++s) {
    StageSummary st{kStageNames[s], t.kept[s], 0.0, std::nullopt};
    if (t.shots > 0) st.retention = static_cast<double>(t.kept[s]) / static_cast<double>(t.shots);
    if (t.kept[s] > 0) st.error = estimate_rate(t.errors[s], t.kept[s], z);
    out.push_back(st);
  }
  return out;
}

}  // namespace

const StateSummary* ExperimentSummary::state(QubitValue prepared) const {
  for (const auto& s : states) {
    if (s.prepared == prepared) return &s;
  }
  return nullptr;
}

ExperimentSummary summarize(const SummaryAccumulator& acc, double wilson_z) {
  if (acc.total_shots() == 0) throw std::invalid_argument("cannot summarize an empty record set");
  ExperimentSummary out;
  out.wilson_z = wilson_z;
  StateTally pooled;
  for (QubitValue v : {QubitValue::Zero, QubitValue::One}) {
    const StateTally& t = acc.tally(v);
    pooled.merge(t);
    if (t.shots == 0) continue;
    StateSummary s{v, t.shots, stage_summaries(t, wilson_z), 0.0, t.reasons, t.attempts};
    s.rejected_fraction = 1.0 - s.stages.back().retention;
    out.states.push_back(std::move(s));
  }
  out.overall = stage_summaries(pooled, wilson_z);
  for (std::size_t st = 0; st < kStageCount; ++st) {
    double sum = 0.0;
    bool complete = true;
    for (const auto& s : out.states) {
      if (!s.stages[st].error) {
        complete = false;
        break;
      }
      sum += s.stages[st].error->point;
    }
    out.average_error.push_back(complete ? std::optional<double>(sum / static_cast<double>(out.states.size()))
                                         : std::nullopt);
  }
  return out;
}

ExperimentSummary spam_summary(const std::vector<ShotRecord>& records, double wilson_z) {
  if (records.empty()) throw std::invalid_argument("spam_summary: empty record set");
  SummaryAccumulator acc;
  for (const auto& r : records) acc.add(r);
  return summarize(acc, wilson_z);
}

}  // namespace spamsim
