#pragma once

#include <map>
#include <utility>
#include <vector>

#include "spamsim/channels.hpp"
#include "spamsim/detection.hpp"

namespace spamsim {

struct StepDurations {
  double cooling = 1e-3;
  double deshelve = 0.0;
};

/// Every stochastic channel of the protocol. Immutable once constructed;
/// the with_* helpers return modified copies.
class ErrorModel {
 public:
  using PulseKey = std::pair<StateLabel, StateLabel>;

  ErrorModel(PumpChannel pump, std::vector<TransferPulse> pulses, DecayChannel decay, DetectionModel detection,
             StepDurations durations, double loss_probability_per_shot);

  /// Table I rates, tau = 27.2 s, 20 us pumping, 25 us pulses, 458.6 us
  /// detection and the calibrated count model.
  static ErrorModel reference_defaults();

  const PumpChannel& pump() const { return pump_; }
  const std::map<PulseKey, TransferPulse>& pulses() const { return pulses_; }
  const DecayChannel& decay() const { return decay_; }
  const DetectionModel& detection() const { return detection_; }
  const StepDurations& durations() const { return durations_; }
  double loss_probability_per_shot() const { return loss_probability_; }

  const TransferPulse* find_pulse(const StateLabel& from, const StateLabel& to) const;
  /// Throws std::invalid_argument when the model has no such pulse.
  const TransferPulse& pulse(const StateLabel& from, const StateLabel& to) const;

  /// Zero pump error, pulse error rates and ion loss. Decay and detection kept.
  ErrorModel with_static_errors_disabled() const;
  ErrorModel with_pump_error(double rate) const;
  ErrorModel with_pulse_error(const StateLabel& from, const StateLabel& to, double rate) const;
  ErrorModel with_all_pulse_errors(double rate) const;
  ErrorModel with_decay(DecayChannel decay) const;
  ErrorModel with_detection(DetectionModel detection) const;
  ErrorModel with_loss(double probability) const;

 private:
  void validate() const;

  PumpChannel pump_;
  std::map<PulseKey, TransferPulse> pulses_;
  DecayChannel decay_;
  DetectionModel detection_;
  StepDurations durations_;
  double loss_probability_;
};

/// No static errors, no decay, no ion loss and read-noise-free detection.
ErrorModel ideal_error_model();

}  // namespace spamsim
