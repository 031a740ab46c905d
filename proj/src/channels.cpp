#include "spamsim/channels.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace spamsim {
namespace {

void check_probability(double p, const char* what) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw std::invalid_argument(std::string(what) + " must be a probability in [0, 1]");
  }
}

}  // namespace

void TransferPulse::validate() const {
  check_probability(error_rate, "pulse error_rate");
  if (!(t_pi > 0.0) || !std::isfinite(t_pi)) throw std::invalid_argument("pulse t_pi must be positive");
  if (!transition_allowed(from, to)) {
    throw std::invalid_argument("transfer pulse must connect A and B: " + from.to_string() + " -> " +
                                to.to_string());
  }
}

void PumpChannel::validate() const {
  if (target.is_sentinel() || !target.in_ground()) {
    throw std::invalid_argument("pump target must be a basis state in manifold A");
  }
  check_probability(error_rate, "pump error_rate");
  if (!(duration >= 0.0)) throw std::invalid_argument("pump duration must be non-negative");
}

void DecayChannel::validate() const {
  if (!(lifetime > 0.0)) throw std::invalid_argument("lifetime must be positive");
}

double decay_probability(double t, double tau) {
  if (!(t >= 0.0)) throw std::invalid_argument("elapsed time must be non-negative");
  if (!(tau > 0.0)) throw std::invalid_argument("lifetime must be positive");
  if (std::isinf(t)) return 1.0;
  return -std::expm1(-t / tau);
}

double pulse_success_probability(double t, const TransferPulse& pulse) {
  if (!(t >= 0.0)) throw std::invalid_argument("pulse duration must be non-negative");
  const double s = std::sin(0.5 * std::numbers::pi * t / pulse.t_pi);
  const double single = s * s;
  return pulse.order == PulseOrder::Single ? single : single * single;
}

double transfer_probability(double t, const TransferPulse& pulse) {
  return pulse_success_probability(t, pulse) * (1.0 - pulse.error_rate);
}

StateLabel apply_transfer(const StateLabel& state, const TransferPulse& pulse, double t, Rng& rng) {
  if (state != pulse.from) return state;
  const double p = transfer_probability(t, pulse);
  if (p >= 1.0) return pulse.to;
  if (p <= 0.0) return state;
  return uniform01(rng) < p ? pulse.to : state;
}

StateLabel apply_pump(const StateLabel& state, const PumpChannel& pump, Rng& rng) {
  if (!state.in_ground()) return state;
  if (pump.error_rate <= 0.0) return pump.target;
  return uniform01(rng) < pump.error_rate ? StateLabel::wrong_ground() : pump.target;
}

DecayOutcome apply_decay(const StateLabel& state, double duration, const DecayChannel& decay, Rng& rng) {
  if (!(duration >= 0.0)) throw std::invalid_argument("decay window must be non-negative");
  if (!state.in_metastable() || duration == 0.0 || std::isinf(decay.lifetime)) return {state, std::nullopt};
  // Exponential decay instant; the ion decays in the window iff it falls inside.
  const double t = -decay.lifetime * std::log1p(-uniform01(rng));
  if (t < duration) return {StateLabel::wrong_ground(), t};
  return {state, std::nullopt};
}

}  // namespace spamsim
