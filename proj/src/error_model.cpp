#include "spamsim/error_model.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace spamsim {

ErrorModel::ErrorModel(PumpChannel pump, std::vector<TransferPulse> pulses, DecayChannel decay,
                       DetectionModel detection, StepDurations durations, double loss_probability_per_shot)
    : pump_(std::move(pump)),
      decay_(decay),
      detection_(detection),
      durations_(durations),
      loss_probability_(loss_probability_per_shot) {
  for (auto& p : pulses) {
    PulseKey key{p.from, p.to};
    if (!pulses_.emplace(key, std::move(p)).second) {
      throw std::invalid_argument("duplicate transfer pulse " + key.first.to_string() + " -> " +
                                  key.second.to_string());
    }
  }
  validate();
}

void ErrorModel::validate() const {
  pump_.validate();
  for (const auto& [key, p] : pulses_) {
    p.validate();
    if (key != PulseKey{p.from, p.to}) throw std::invalid_argument("pulse key does not match its pulse");
  }
  decay_.validate();
  detection_.validate();
  if (!(durations_.cooling >= 0.0) || !(durations_.deshelve >= 0.0)) {
    throw std::invalid_argument("step durations must be non-negative");
  }
  if (!(loss_probability_ >= 0.0 && loss_probability_ <= 1.0)) {
    throw std::invalid_argument("loss_probability_per_shot must be a probability");
  }
}

ErrorModel ErrorModel::reference_defaults() {
  const StateLabel s20 = ground_state(2, 0);
  const StateLabel s10 = ground_state(1, 0);
  const StateLabel d2m1 = metastable_state(2, -1);
  const StateLabel d2p1 = metastable_state(2, 1);
  const StateLabel d1m1 = metastable_state(1, -1);
  constexpr double kTpi = 25e-6;
  // Each measured transition is usable in both directions at the same rate.
  const std::vector<std::tuple<StateLabel, StateLabel, double>> transitions = {
      {s20, d2m1, 0.0138}, {s20, d1m1, 0.0473}, {s20, d2p1, 0.0310}, {s10, d2m1, 0.0111}, {s10, d1m1, 0.0098},
  };
  std::vector<TransferPulse> pulses;
  for (const auto& [a, b, rate] : transitions) {
    pulses.push_back({a, b, rate, kTpi, PulseOrder::Single});
    pulses.push_back({b, a, rate, kTpi, PulseOrder::Single});
  }
  return ErrorModel(PumpChannel{s20, 0.0080, 20e-6}, std::move(pulses), DecayChannel{27.2}, DetectionModel{},
                    StepDurations{}, 0.0);
}

const TransferPulse* ErrorModel::find_pulse(const StateLabel& from, const StateLabel& to) const {
  const auto it = pulses_.find({from, to});
  return it == pulses_.end() ? nullptr : &it->second;
}

const TransferPulse& ErrorModel::pulse(const StateLabel& from, const StateLabel& to) const {
  if (const auto* p = find_pulse(from, to)) return *p;
  throw std::invalid_argument("error model has no pulse " + from.to_string() + " -> " + to.to_string());
}

ErrorModel ErrorModel::with_static_errors_disabled() const {
  return with_pump_error(0.0).with_all_pulse_errors(0.0).with_loss(0.0);
}

ErrorModel ErrorModel::with_pump_error(double rate) const {
  ErrorModel copy = *this;
  copy.pump_.error_rate = rate;
  copy.validate();
  return copy;
}

ErrorModel ErrorModel::with_pulse_error(const StateLabel& from, const StateLabel& to, double rate) const {
  ErrorModel copy = *this;
  const auto it = copy.pulses_.find({from, to});
  if (it == copy.pulses_.end()) {
    throw std::invalid_argument("error model has no pulse " + from.to_string() + " -> " + to.to_string());
  }
  it->second.error_rate = rate;
  copy.validate();
  return copy;
}

ErrorModel ErrorModel::with_all_pulse_errors(double rate) const {
  ErrorModel copy = *this;
  for (auto& [key, p] : copy.pulses_) p.error_rate = rate;
  copy.validate();
  return copy;
}

ErrorModel ErrorModel::with_decay(DecayChannel decay) const {
  ErrorModel copy = *this;
  copy.decay_ = decay;
  copy.validate();
  return copy;
}

ErrorModel ErrorModel::with_detection(DetectionModel detection) const {
  ErrorModel copy = *this;
  copy.detection_ = detection;
  copy.validate();
  return copy;
}

ErrorModel ErrorModel::with_loss(double probability) const {
  ErrorModel copy = *this;
  copy.loss_probability_ = probability;
  copy.validate();
  return copy;
}

ErrorModel ideal_error_model() {
  DetectionModel noiseless;
  noiseless.read_noise = 0.0;  // bright error ~1e-25, dark error exactly 0
  return ErrorModel::reference_defaults()
      .with_static_errors_disabled()
      .with_decay(DecayChannel{std::numeric_limits<double>::infinity()})
      .with_detection(noiseless);
}

}  // namespace spamsim
