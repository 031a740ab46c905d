#pragma once

#include <optional>

#include "spamsim/atomic_model.hpp"
#include "spamsim/rng.hpp"

namespace spamsim {

/// Whether a pulse's duration factor is sin^2 or sin^4 of pi*t/(2*t_pi).
enum class PulseOrder { Single, Double };

/// A 1762 nm-style population transfer between one A state and one B state.
struct TransferPulse {
  StateLabel from;
  StateLabel to;
  double error_rate = 0.0;  // static failure probability at t = t_pi
  double t_pi = 25e-6;      // seconds
  PulseOrder order = PulseOrder::Single;

  void validate() const;
};

struct PumpChannel {
  StateLabel target;
  double error_rate = 0.0;  // probability of ending in WrongGround
  double duration = 20e-6;

  void validate() const;
};

/// Metastable (B) lifetime. An infinite lifetime disables decay.
struct DecayChannel {
  double lifetime = 27.2;

  void validate() const;
};

/// 1 - exp(-t/tau). Throws on negative t or non-positive tau.
double decay_probability(double t, double tau);

/// Duration factor of a pulse: sin^2(pi t / 2 t_pi) (Single) or its square
/// (Double). Equals 1 at t = t_pi; the static error rate is not included.
double pulse_success_probability(double t, const TransferPulse& pulse);

/// Probability that an addressed ion is moved: duration factor times
/// (1 - error_rate).
double transfer_probability(double t, const TransferPulse& pulse);

/// State-selective transfer. Only pulse.from is addressed; on failure the
/// population stays where it was.
StateLabel apply_transfer(const StateLabel& state, const TransferPulse& pulse, double t, Rng& rng);

/// Optical pumping. Any present A population (including WrongGround) lands
/// in the target, or in WrongGround with probability error_rate. B and Lost
/// are untouched.
StateLabel apply_pump(const StateLabel& state, const PumpChannel& pump, Rng& rng);

struct DecayOutcome {
  StateLabel state;
  std::optional<double> decay_time;  // seconds from the window start
};

/// Spontaneous B -> A decay within a window of the given length. A decayed
/// ion ends in WrongGround. Other states pass through unchanged.
DecayOutcome apply_decay(const StateLabel& state, double duration, const DecayChannel& decay, Rng& rng);

}  // namespace spamsim
