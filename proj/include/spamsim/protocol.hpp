#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "spamsim/atomic_model.hpp"
#include "spamsim/detection.hpp"
#include "spamsim/error_model.hpp"
#include "spamsim/rng.hpp"

namespace spamsim {

enum class DetectLabel : std::uint8_t { R0, R1, R2, R3, R4, R5 };
inline constexpr std::size_t kDetectionCount = 6;

std::string_view to_string(DetectLabel label);
constexpr std::size_t index_of(DetectLabel label) { return static_cast<std::size_t>(label); }

namespace step {
// Durations left empty are taken from the error model when the step runs.
struct Cool {
  std::optional<double> duration;
};
struct Detect {
  DetectLabel label;
};
struct Pump {};
struct Transfer {
  StateLabel from;
  StateLabel to;
  std::optional<double> duration;  // defaults to the pulse's t_pi
};
struct Deshelve {};
/// Qubit rotation by `angle` about an equatorial axis (pi/2 makes an equal
/// superposition of the basis state it acts on).
struct Rotate {
  double angle;
};
}  // namespace step

using SequenceStep =
    std::variant<step::Cool, step::Detect, step::Pump, step::Transfer, step::Deshelve, step::Rotate>;

std::string describe(const SequenceStep& s);

enum class Preparation { Zero, One, SuperpositionViaRotation };

struct Sequence {
  QubitEncoding encoding;
  Preparation prepare;
  QubitValue origin;  // basis state prepared before any rotation
  std::vector<SequenceStep> steps;
  std::size_t retry_from;         // first step re-run by repeat-until-success
  std::size_t measurement_begin;  // first step after the preparation part

  /// Checks the detection labels (R0..R5, unique, in order) and that every
  /// transfer exists in the model and crosses manifolds.
  void validate(const ErrorModel& model) const;
  /// Number of steps other than the Cool/Deshelve/Rotate framing steps.
  std::size_t protocol_step_count() const;
};

/// Full shot sequence: Cool, R0, Cool, preparation, measurement, Deshelve, R5.
/// For SuperpositionViaRotation the preparation starts from `origin` and a
/// pi/2 Rotate separates the two parts.
Sequence build_sequence(const QubitEncoding& encoding, Preparation prepare,
                        QubitValue origin = QubitValue::Zero);

// ---------------------------------------------------------------------------
// Flag logic

enum class FlagReason { None, R0Dark, R1Bright, R2Bright, R3R4Dark, R3BrightR4Dark, R5Dark };

std::string_view to_string(FlagReason reason);

using DetectionOutcomes = std::array<Outcome, kDetectionCount>;

struct FlagVerdict {
  bool flagged;
  FlagReason reason;
  std::optional<QubitValue> inferred;
};

/// Flags R0 dark, R1 bright, R2 bright, R3 and R4 both dark, R5 dark, in that
/// order. Unflagged shots read |0> from a bright R3. With `strict`, R3 bright
/// followed by R4 dark is also flagged.
FlagVerdict evaluate_flags(const DetectionOutcomes& outcomes, bool strict = false);
/// Throws std::invalid_argument if any outcome is missing.
FlagVerdict evaluate_flags(const std::array<std::optional<Outcome>, kDetectionCount>& outcomes,
                           bool strict = false);

/// Measurement result read from R3 alone, ignoring flags.
constexpr QubitValue raw_readout(const DetectionOutcomes& outcomes) {
  return outcomes[index_of(DetectLabel::R3)] == Outcome::Bright ? QubitValue::Zero : QubitValue::One;
}

// ---------------------------------------------------------------------------
// Shot execution

struct TraceEntry {
  std::size_t step;
  StateLabel state;
};

struct ShotRecord {
  std::uint64_t index = 0;
  QubitValue prepared = QubitValue::Zero;
  std::optional<QubitValue> projected;  // set when a rotation was Born-sampled
  DetectionOutcomes outcomes{};
  std::array<std::int64_t, kDetectionCount> counts{};
  bool flagged = false;
  FlagReason reason = FlagReason::None;
  std::optional<QubitValue> inferred;
  int attempts = 1;
  std::vector<TraceEntry> trace;
};

struct ShotOptions {
  bool strict_flags = false;
  int max_attempts = 1;  // > 1 enables repeat-until-success on an R1 flag
  bool record_trace = false;
};

/// Runs shots of one sequence against one model. Holds the validated
/// sequence and a reusable count sampler; not shareable across threads.
class ShotEngine {
 public:
  ShotEngine(Sequence sequence, const ErrorModel& model, ShotOptions options = {});

  ShotRecord run(Rng& rng, std::uint64_t index = 0);

  const Sequence& sequence() const { return sequence_; }

 private:
  Sequence sequence_;
  const ErrorModel& model_;
  ShotOptions options_;
  CountSampler sampler_;
  std::vector<double> durations_;
  std::vector<const TransferPulse*> pulses_;
};

ShotRecord run_shot(const Sequence& sequence, const ErrorModel& model, Rng& rng, const ShotOptions& options = {});

}  // namespace spamsim
