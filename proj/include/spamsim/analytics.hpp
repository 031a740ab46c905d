#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "spamsim/error_model.hpp"
#include "spamsim/protocol.hpp"
#include "spamsim/rng.hpp"

namespace spamsim {

// ---------------------------------------------------------------------------
// Binomial rates

struct Interval {
  double lo;
  double hi;

  bool contains(double x) const { return lo <= x && x <= hi; }
  bool overlaps(const Interval& other) const { return lo <= other.hi && other.lo <= hi; }
};

/// Wilson score interval, clamped to [0, 1]. Throws if n == 0, k > n or z <= 0.
Interval wilson_interval(std::uint64_t k, std::uint64_t n, double z);

struct RateEstimate {
  std::uint64_t successes = 0;
  std::uint64_t trials = 0;
  double point = 0.0;
  Interval interval{0.0, 1.0};
  double z = 1.0;
};

RateEstimate estimate_rate(std::uint64_t k, std::uint64_t n, double z = 1.0);

// ---------------------------------------------------------------------------
// Rejection prediction

struct PredictOptions {
  bool include_decay = false;  // add decay events on steps where the ideal ion sits in B
  bool strict_flags = false;
};

enum class EventKind { Loss, Pump, Transfer, Decay };

/// One independent failure channel met along a sequence.
struct RejectionEvent {
  EventKind kind;
  std::size_t step;    // index into Sequence::steps (0 for Loss)
  double probability;  // chance that the channel fails
};

/// Every channel with a non-zero failure probability, in sequence order.
std::vector<RejectionEvent> rejection_events(const Sequence& sequence, const ErrorModel& model,
                                             const PredictOptions& options = {});

/// First-order rejected fraction: the summed probability of every event
/// whose lone failure raises a flag under perfect detection.
double predict_rejection(const Sequence& sequence, const ErrorModel& model, const PredictOptions& options = {});

/// Exact rejected fraction under independent events, by enumerating all
/// 2^m failure patterns. Throws if m > kMaxExactEvents.
inline constexpr std::size_t kMaxExactEvents = 20;
double predict_rejection_exact(const Sequence& sequence, const ErrorModel& model,
                               const PredictOptions& options = {});

// ---------------------------------------------------------------------------
// Detection error budget

struct DetectionBudget {
  double bright_total;
  double dark_total;
  double average;
};

DetectionBudget detection_error_budget(double bright_err, double dark_optical_err, double decay_err);

// ---------------------------------------------------------------------------
// Post-selection bias

/// <Z_meas> - <Z> for acceptance ratio gamma = P(a|0)/P(a|1) and population P0.
double bias_closed_form(double gamma, double p0);

struct BiasCorrection {
  double p0;
  double p1;
  double z;
};

/// Inverts P(b,a) = sum_i P(b,a|i) P(i).
BiasCorrection correct_bias(double p_ba, double p_ba_given_0, double p_ba_given_1);
/// Same with P(b|a,i) taken as ideal: P0 = P(b|a)P(a)/P(a|0), P1 = P(d|a)P(a)/P(a|1).
BiasCorrection correct_bias_simplified(double p_b_given_a, double p_accept, double p_accept_given_0,
                                       double p_accept_given_1);

/// Families of the pulse-duration bias scan. Each varies the measurement
/// transfers that map one qubit state between the manifolds.
enum class BiasCurve { Optical0, Optical1, Metastable0, Ground0 };

const std::vector<BiasCurve>& all_bias_curves();
std::string_view to_string(BiasCurve curve);
BiasCurve parse_bias_curve(std::string_view text);
EncodingName encoding_of(BiasCurve curve);

struct Acceptance {
  double given_zero;
  double given_one;
  double gamma() const { return given_zero / given_one; }
};

/// Acceptance probabilities when the scanned pulses last t = t_over_tpi * t_pi:
/// sin^2 for a single pulse, sin^4 for two, 1 for the unscanned state.
Acceptance bias_acceptance(BiasCurve curve, double t_over_tpi);

// ---------------------------------------------------------------------------
// Lifetime

struct LifetimeObservation {
  double delay;    // seconds
  double decayed;  // decays seen (may be fractional for pre-averaged data)
  double trials;
};

struct LifetimeFit {
  double tau;
  double tau_stderr;
  std::size_t iterations;

  Interval interval(double z = 1.96) const { return {tau - z * tau_stderr, tau + z * tau_stderr}; }
};

/// Binomial maximum-likelihood fit of 1 - exp(-t/tau) by Fisher scoring on
/// the rate. Throws if fewer than two distinct delays are present or the
/// data are all-decayed or none-decayed.
LifetimeFit fit_lifetime(const std::vector<LifetimeObservation>& observations);
/// Groups (delay, decayed) samples by delay.
std::vector<LifetimeObservation> bin_lifetime_samples(const std::vector<std::pair<double, bool>>& samples);
/// Bernoulli decay samples cycling through the given delays.
std::vector<std::pair<double, bool>> simulate_lifetime_samples(double tau, const std::vector<double>& delays,
                                                               std::size_t count, std::uint64_t seed);

}  // namespace spamsim
