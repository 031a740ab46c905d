#include "spamsim/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <set>
#include <stdexcept>
#include <string>

namespace spamsim {

Interval wilson_interval(std::uint64_t k, std::uint64_t n, double z) {
  if (n == 0) throw std::invalid_argument("wilson_interval: n must be positive");
  if (k > n) throw std::invalid_argument("wilson_interval: k exceeds n");
  if (!(z > 0.0)) throw std::invalid_argument("wilson_interval: z must be positive");
  const double nn = static_cast<double>(n);
  const double p = static_cast<double>(k) / nn;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double center = (p + z2 / (2.0 * nn)) / denom;
  const double half = (z / denom) * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn));
  // Exact bounds at the edges; the formula loses them to rounding.
  const double lo = k == 0 ? 0.0 : std::max(0.0, center - half);
  const double hi = k == n ? 1.0 : std::min(1.0, center + half);
  return {lo, hi};
}

RateEstimate estimate_rate(std::uint64_t k, std::uint64_t n, double z) {
  RateEstimate r;
  r.successes = k;
  r.trials = n;
  r.z = z;
  r.interval = wilson_interval(k, n, z);
  r.point = static_cast<double>(k) / static_cast<double>(n);
  return r;
}

// ---------------------------------------------------------------------------

namespace {

double step_duration(const SequenceStep& s, const ErrorModel& model) {
  if (const auto* c = std::get_if<step::Cool>(&s)) return c->duration.value_or(model.durations().cooling);
  if (std::holds_alternative<step::Detect>(s)) return model.detection().total_duration;
  if (std::holds_alternative<step::Pump>(s)) return model.pump().duration;
  if (const auto* t = std::get_if<step::Transfer>(&s)) {
    return t->duration.value_or(model.pulse(t->from, t->to).t_pi);
  }
  if (std::holds_alternative<step::Deshelve>(s)) return model.durations().deshelve;
  return 0.0;
}

// Deterministic propagation of the ion under perfect detection. `failed`
// says, per step, whether that step's channel fails; decay_failed likewise
// for decay before the step.
class Tracer {
 public:
  Tracer(const Sequence& sequence, const ErrorModel& model) : seq_(sequence), model_(model) {
    sequence.validate(model);
    for (const auto& s : sequence.steps) {
      if (std::holds_alternative<step::Rotate>(s)) {
        throw std::invalid_argument("rejection prediction needs a basis-state sequence (no Rotate)");
      }
    }
  }

  // Ion state before each step on the error-free path.
  std::vector<StateLabel> ideal_states() const {
    std::vector<StateLabel> out;
    const std::vector<bool> none(seq_.steps.size(), false);
    run(false, none, none, &out);
    return out;
  }

  DetectionOutcomes run(bool lost, const std::vector<bool>& failed, const std::vector<bool>& decayed,
                        std::vector<StateLabel>* states = nullptr) const {
    DetectionOutcomes outcomes{};
    StateLabel ion = lost ? StateLabel::lost() : StateLabel::wrong_ground();
    for (std::size_t i = 0; i < seq_.steps.size(); ++i) {
      if (states) states->push_back(ion);
      if (decayed[i] && ion.in_metastable()) ion = StateLabel::wrong_ground();
      const SequenceStep& s = seq_.steps[i];
      if (const auto* d = std::get_if<step::Detect>(&s)) {
        outcomes[index_of(d->label)] = ion.fluoresces() ? Outcome::Bright : Outcome::Dark;
      } else if (std::holds_alternative<step::Pump>(s)) {
        if (ion.in_ground()) ion = failed[i] ? StateLabel::wrong_ground() : model_.pump().target;
      } else if (const auto* t = std::get_if<step::Transfer>(&s)) {
        if (ion == t->from && !failed[i]) ion = t->to;
      } else if (std::holds_alternative<step::Deshelve>(s)) {
        if (ion.in_metastable()) ion = StateLabel::wrong_ground();
      }
    }
    return outcomes;
  }

 private:
  const Sequence& seq_;
  const ErrorModel& model_;
};

struct Pattern {
  bool lost = false;
  std::vector<bool> failed;
  std::vector<bool> decayed;
};

Pattern make_pattern(std::size_t steps, const std::vector<RejectionEvent>& events, std::uint64_t mask) {
  Pattern p{false, std::vector<bool>(steps, false), std::vector<bool>(steps, false)};
  for (std::size_t e = 0; e < events.size(); ++e) {
    if (!((mask >> e) & 1U)) continue;
    switch (events[e].kind) {
      case EventKind::Loss:
        p.lost = true;
        break;
      case EventKind::Pump:
      case EventKind::Transfer:
        p.failed[events[e].step] = true;
        break;
      case EventKind::Decay:
        p.decayed[events[e].step] = true;
        break;
    }
  }
  return p;
}

bool pattern_flagged(const Tracer& tracer, const Pattern& p, bool strict) {
  return evaluate_flags(tracer.run(p.lost, p.failed, p.decayed), strict).flagged;
}

}  // namespace

std::vector<RejectionEvent> rejection_events(const Sequence& sequence, const ErrorModel& model,
                                             const PredictOptions& options) {
  const Tracer tracer(sequence, model);
  std::vector<RejectionEvent> events;
  if (model.loss_probability_per_shot() > 0.0) {
    events.push_back({EventKind::Loss, 0, model.loss_probability_per_shot()});
  }
  const auto ideal = tracer.ideal_states();
  for (std::size_t i = 0; i < sequence.steps.size(); ++i) {
    const SequenceStep& s = sequence.steps[i];
    const double duration = step_duration(s, model);
    if (options.include_decay && ideal[i].in_metastable() && duration > 0.0) {
      const double p = decay_probability(duration, model.decay().lifetime);
      if (p > 0.0) events.push_back({EventKind::Decay, i, p});
    }
    if (std::holds_alternative<step::Pump>(s) && model.pump().error_rate > 0.0) {
      events.push_back({EventKind::Pump, i, model.pump().error_rate});
    } else if (const auto* t = std::get_if<step::Transfer>(&s)) {
      const double p = 1.0 - transfer_probability(duration, model.pulse(t->from, t->to));
      if (p > 0.0) events.push_back({EventKind::Transfer, i, p});
    }
  }
  return events;
}

double predict_rejection(const Sequence& sequence, const ErrorModel& model, const PredictOptions& options) {
  const Tracer tracer(sequence, model);
  const auto events = rejection_events(sequence, model, options);
  double total = 0.0;
  for (std::size_t e = 0; e < events.size(); ++e) {
    if (pattern_flagged(tracer, make_pattern(sequence.steps.size(), events, std::uint64_t{1} << e),
                        options.strict_flags)) {
      total += events[e].probability;
    }
  }
  return total;
}

double predict_rejection_exact(const Sequence& sequence, const ErrorModel& model, const PredictOptions& options) {
  const Tracer tracer(sequence, model);
  const auto events = rejection_events(sequence, model, options);
  if (events.size() > kMaxExactEvents) {
    throw std::invalid_argument("predict_rejection_exact: " + std::to_string(events.size()) +
                                " events exceed the enumeration limit");
  }
  const std::uint64_t combos = std::uint64_t{1} << events.size();
  double total = 0.0;
  for (std::uint64_t mask = 0; mask < combos; ++mask) {
    double prob = 1.0;
    for (std::size_t e = 0; e < events.size(); ++e) {
      prob *= ((mask >> e) & 1U) ? events[e].probability : 1.0 - events[e].probability;
    }
    if (prob == 0.0) continue;
    if (pattern_flagged(tracer, make_pattern(sequence.steps.size(), events, mask), options.strict_flags)) {
      total += prob;
    }
  }
  return total;
}

// ---------------------------------------------------------------------------

DetectionBudget detection_error_budget(double bright_err, double dark_optical_err, double decay_err) {
  for (double p : {bright_err, dark_optical_err, decay_err}) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("detection_error_budget: inputs must be probabilities");
  }
  DetectionBudget b;
  b.bright_total = bright_err;
  b.dark_total = dark_optical_err + decay_err * (1.0 - bright_err);
  b.average = 0.5 * (b.bright_total + b.dark_total);
  return b;
}

// ---------------------------------------------------------------------------

double bias_closed_form(double gamma, double p0) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw std::invalid_argument("bias_closed_form: gamma must be positive");
  if (!(p0 >= 0.0 && p0 <= 1.0)) throw std::invalid_argument("bias_closed_form: P0 must be a probability");
  const double p1 = 1.0 - p0;
  return (gamma * p0 - p1) / (gamma * p0 + p1) - (p0 - p1);
}

BiasCorrection correct_bias(double p_ba, double p_ba_given_0, double p_ba_given_1) {
  const double denom = p_ba_given_0 - p_ba_given_1;
  if (denom == 0.0) throw std::invalid_argument("correct_bias: P(b,a|0) equals P(b,a|1)");
  BiasCorrection c;
  c.p0 = (p_ba - p_ba_given_1) / denom;
  c.p1 = 1.0 - c.p0;
  c.z = (2.0 * p_ba - p_ba_given_1 - p_ba_given_0) / denom;
  return c;
}

BiasCorrection correct_bias_simplified(double p_b_given_a, double p_accept, double p_accept_given_0,
                                       double p_accept_given_1) {
  if (!(p_accept_given_0 > 0.0) || !(p_accept_given_1 > 0.0)) {
    throw std::invalid_argument("correct_bias_simplified: acceptance probabilities must be positive");
  }
  BiasCorrection c;
  c.p0 = p_b_given_a * p_accept / p_accept_given_0;
  c.p1 = (1.0 - p_b_given_a) * p_accept / p_accept_given_1;
  c.z = c.p0 - c.p1;
  return c;
}

const std::vector<BiasCurve>& all_bias_curves() {
  static const std::vector<BiasCurve> curves = {BiasCurve::Optical0, BiasCurve::Optical1, BiasCurve::Metastable0,
                                                BiasCurve::Ground0};
  return curves;
}

std::string_view to_string(BiasCurve curve) {
  switch (curve) {
    case BiasCurve::Optical0:
      return "O0";
    case BiasCurve::Optical1:
      return "O1";
    case BiasCurve::Metastable0:
      return "M0";
    case BiasCurve::Ground0:
      return "G0";
  }
  throw std::invalid_argument("unknown bias curve");
}

BiasCurve parse_bias_curve(std::string_view text) {
  for (BiasCurve c : all_bias_curves()) {
    if (to_string(c) == text) return c;
  }
  throw std::invalid_argument("unknown bias curve '" + std::string(text) + "' (expected O0, O1, M0 or G0)");
}

EncodingName encoding_of(BiasCurve curve) {
  switch (curve) {
    case BiasCurve::Optical0:
    case BiasCurve::Optical1:
      return EncodingName::Optical;
    case BiasCurve::Metastable0:
      return EncodingName::Metastable;
    case BiasCurve::Ground0:
      return EncodingName::Ground;
  }
  throw std::invalid_argument("unknown bias curve");
}

Acceptance bias_acceptance(BiasCurve curve, double t_over_tpi) {
  if (!(t_over_tpi >= 0.0)) throw std::invalid_argument("bias_acceptance: duration must be non-negative");
  const double s = std::sin(0.5 * std::numbers::pi * t_over_tpi);
  const double single = s * s;
  switch (curve) {
    case BiasCurve::Optical0:
    case BiasCurve::Metastable0:
      return {single, 1.0};
    case BiasCurve::Optical1:
      return {1.0, single * single};
    case BiasCurve::Ground0:
      return {single * single, 1.0};
  }
  throw std::invalid_argument("unknown bias curve");
}

// ---------------------------------------------------------------------------

LifetimeFit fit_lifetime(const std::vector<LifetimeObservation>& observations) {
  std::set<double> delays;
  double k_total = 0.0;
  double n_total = 0.0;
  double exposure = 0.0;
  for (const auto& o : observations) {
    if (!(o.delay > 0.0) || !std::isfinite(o.delay)) throw std::invalid_argument("fit_lifetime: delays must be positive");
    if (!(o.trials >= 0.0) || !(o.decayed >= 0.0) || o.decayed > o.trials) {
      throw std::invalid_argument("fit_lifetime: need 0 <= decayed <= trials");
    }
    if (o.trials == 0.0) continue;
    delays.insert(o.delay);
    k_total += o.decayed;
    n_total += o.trials;
    exposure += o.trials * o.delay;
  }
  if (delays.size() < 2) throw std::invalid_argument("fit_lifetime: need observations at two or more delays");
  if (k_total == 0.0 || k_total == n_total) {
    throw std::invalid_argument("fit_lifetime: all-decayed or none-decayed data do not identify tau");
  }

  double lambda = k_total / exposure;
  double information = 0.0;
  std::size_t it = 0;
  for (; it < 200; ++it) {
    double score = 0.0;
    information = 0.0;
    for (const auto& o : observations) {
      if (o.trials == 0.0) continue;
      const double survive = std::exp(-lambda * o.delay);
      const double p = -std::expm1(-lambda * o.delay);
      score += o.delay * (o.decayed - o.trials * p) / p;
      information += o.trials * o.delay * o.delay * survive / p;
    }
    double step = score / information;
    while (lambda + step <= 0.0) step *= 0.5;
    lambda += step;
    if (std::abs(step) <= 1e-14 * lambda) break;
  }
  LifetimeFit fit;
  fit.tau = 1.0 / lambda;
  fit.tau_stderr = (1.0 / std::sqrt(information)) / (lambda * lambda);
  fit.iterations = it + 1;
  return fit;
}

std::vector<LifetimeObservation> bin_lifetime_samples(const std::vector<std::pair<double, bool>>& samples) {
  std::map<double, LifetimeObservation> bins;
  for (const auto& [delay, decayed] : samples) {
    auto& b = bins.try_emplace(delay, LifetimeObservation{delay, 0.0, 0.0}).first->second;
    b.trials += 1.0;
    if (decayed) b.decayed += 1.0;
  }
  std::vector<LifetimeObservation> out;
  for (const auto& [delay, b] : bins) out.push_back(b);
  return out;
}

std::vector<std::pair<double, bool>> simulate_lifetime_samples(double tau, const std::vector<double>& delays,
                                                               std::size_t count, std::uint64_t seed) {
  if (delays.empty()) throw std::invalid_argument("simulate_lifetime_samples: no delays");
  std::vector<std::pair<double, bool>> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double delay = delays[i % delays.size()];
    Rng rng = stream_rng(seed, i);
    out.emplace_back(delay, uniform01(rng) < decay_probability(delay, tau));
  }
  return out;
}

}  // namespace spamsim
