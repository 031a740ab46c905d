#include "spamsim/protocol.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace spamsim {
namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

std::string format_duration(const std::optional<double>& d) {
  return d ? " (" + std::to_string(*d * 1e6) + " us)" : std::string();
}

}  // namespace

std::string_view to_string(DetectLabel label) {
  static constexpr std::array<std::string_view, kDetectionCount> names = {"R0", "R1", "R2", "R3", "R4", "R5"};
  return names[index_of(label)];
}

std::string_view to_string(FlagReason reason) {
  switch (reason) {
    case FlagReason::None:
      return "None";
    case FlagReason::R0Dark:
      return "R0Dark";
    case FlagReason::R1Bright:
      return "R1Bright";
    case FlagReason::R2Bright:
      return "R2Bright";
    case FlagReason::R3R4Dark:
      return "R3R4Dark";
    case FlagReason::R3BrightR4Dark:
      return "R3BrightR4Dark";
    case FlagReason::R5Dark:
      return "R5Dark";
  }
  throw std::invalid_argument("unknown flag reason");
}

std::string describe(const SequenceStep& s) {
  return std::visit(
      overloaded{
          [](const step::Cool& c) { return "Cool" + format_duration(c.duration); },
          [](const step::Detect& d) { return "Detect " + std::string(to_string(d.label)); },
          [](const step::Pump&) { return std::string("Pump"); },
          [](const step::Transfer& t) {
            return "Transfer " + t.from.to_string() + " -> " + t.to.to_string() + format_duration(t.duration);
          },
          [](const step::Deshelve&) { return std::string("Deshelve"); },
          [](const step::Rotate& r) { return "Rotate " + std::to_string(r.angle); },
      },
      s);
}

void Sequence::validate(const ErrorModel& model) const {
  std::size_t next_label = 0;
  for (const auto& s : steps) {
    if (const auto* d = std::get_if<step::Detect>(&s)) {
      if (index_of(d->label) != next_label) {
        throw std::invalid_argument("detection steps must be R0..R5 in order, each exactly once");
      }
      ++next_label;
    } else if (const auto* t = std::get_if<step::Transfer>(&s)) {
      if (!transition_allowed(t->from, t->to)) {
        throw std::invalid_argument("transfer within one manifold: " + describe(s));
      }
      model.pulse(t->from, t->to);
      if (t->duration && !(*t->duration >= 0.0)) throw std::invalid_argument("negative transfer duration");
    }
  }
  if (next_label != kDetectionCount) throw std::invalid_argument("sequence is missing detection steps");
  if (retry_from >= steps.size() || measurement_begin > steps.size()) {
    throw std::invalid_argument("sequence markers out of range");
  }
}

std::size_t Sequence::protocol_step_count() const {
  std::size_t n = 0;
  for (const auto& s : steps) {
    if (!std::holds_alternative<step::Cool>(s) && !std::holds_alternative<step::Deshelve>(s) &&
        !std::holds_alternative<step::Rotate>(s)) {
      ++n;
    }
  }
  return n;
}

Sequence build_sequence(const QubitEncoding& encoding, Preparation prepare, QubitValue origin) {
  if (prepare == Preparation::Zero) origin = QubitValue::Zero;
  if (prepare == Preparation::One) origin = QubitValue::One;
  const bool superposition = prepare == Preparation::SuperpositionViaRotation;

  const StateLabel s20 = ground_state(2, 0);
  const StateLabel s10 = ground_state(1, 0);
  const StateLabel d2m1 = metastable_state(2, -1);
  const StateLabel d2p1 = metastable_state(2, 1);
  const StateLabel d1m1 = metastable_state(1, -1);

  Sequence seq{encoding, prepare, origin, {}, 0, 0};
  auto& st = seq.steps;
  auto transfer = [&st](StateLabel from, StateLabel to) { st.push_back(step::Transfer{from, to, std::nullopt}); };
  auto detect = [&st](DetectLabel label) { st.push_back(step::Detect{label}); };

  st.push_back(step::Cool{});
  detect(DetectLabel::R0);
  seq.retry_from = st.size();
  st.push_back(step::Cool{});
  st.push_back(step::Pump{});

  switch (encoding.name) {
    case EncodingName::Optical: {
      // |0> = D(2,-1), |1> = S(2,0); |1> is shelved through D(1,-1).
      transfer(s20, origin == QubitValue::Zero ? d2m1 : d1m1);
      detect(DetectLabel::R1);
      if (origin == QubitValue::One) transfer(d1m1, s20);
      seq.measurement_begin = st.size();
      if (superposition) st.push_back(step::Rotate{std::numbers::pi / 2});
      if (origin == QubitValue::One || superposition) transfer(s20, d1m1);
      detect(DetectLabel::R2);
      transfer(d2m1, s20);
      detect(DetectLabel::R3);
      transfer(d1m1, s20);
      detect(DetectLabel::R4);
      break;
    }
    case EncodingName::Metastable: {
      transfer(s20, origin == QubitValue::Zero ? d2m1 : d1m1);
      detect(DetectLabel::R1);
      seq.measurement_begin = st.size();
      if (superposition) st.push_back(step::Rotate{std::numbers::pi / 2});
      detect(DetectLabel::R2);
      transfer(d2m1, s20);
      detect(DetectLabel::R3);
      transfer(d1m1, s20);
      detect(DetectLabel::R4);
      break;
    }
    case EncodingName::Ground: {
      transfer(s20, d2m1);
      detect(DetectLabel::R1);
      transfer(d2m1, origin == QubitValue::Zero ? s20 : s10);
      seq.measurement_begin = st.size();
      if (superposition) st.push_back(step::Rotate{std::numbers::pi / 2});
      transfer(s20, d2p1);
      transfer(s10, d1m1);
      detect(DetectLabel::R2);
      transfer(d2p1, s20);
      detect(DetectLabel::R3);
      // Read back into F=1 over the 0.98% transition (see README).
      transfer(d1m1, s10);
      detect(DetectLabel::R4);
      break;
    }
  }
  st.push_back(step::Deshelve{});
  detect(DetectLabel::R5);
  return seq;
}

// ---------------------------------------------------------------------------

FlagVerdict evaluate_flags(const DetectionOutcomes& o, bool strict) {
  auto is = [&o](DetectLabel l, Outcome v) { return o[index_of(l)] == v; };
  using enum Outcome;
  if (is(DetectLabel::R0, Dark)) return {true, FlagReason::R0Dark, std::nullopt};
  if (is(DetectLabel::R1, Bright)) return {true, FlagReason::R1Bright, std::nullopt};
  if (is(DetectLabel::R2, Bright)) return {true, FlagReason::R2Bright, std::nullopt};
  if (is(DetectLabel::R3, Dark) && is(DetectLabel::R4, Dark)) return {true, FlagReason::R3R4Dark, std::nullopt};
  if (strict && is(DetectLabel::R3, Bright) && is(DetectLabel::R4, Dark)) {
    return {true, FlagReason::R3BrightR4Dark, std::nullopt};
  }
  if (is(DetectLabel::R5, Dark)) return {true, FlagReason::R5Dark, std::nullopt};
  return {false, FlagReason::None, raw_readout(o)};
}

FlagVerdict evaluate_flags(const std::array<std::optional<Outcome>, kDetectionCount>& outcomes, bool strict) {
  DetectionOutcomes o{};
  for (std::size_t i = 0; i < kDetectionCount; ++i) {
    if (!outcomes[i]) {
      throw std::invalid_argument("missing detection outcome " + std::string(to_string(static_cast<DetectLabel>(i))));
    }
    o[i] = *outcomes[i];
  }
  return evaluate_flags(o, strict);
}

// ---------------------------------------------------------------------------

ShotEngine::ShotEngine(Sequence sequence, const ErrorModel& model, ShotOptions options)
    : sequence_(std::move(sequence)), model_(model), options_(options), sampler_(model.detection()) {
  sequence_.validate(model_);
  if (options_.max_attempts < 1) throw std::invalid_argument("max_attempts must be at least 1");
  for (const auto& s : sequence_.steps) {
    const TransferPulse* pulse = nullptr;
    const double duration = std::visit(
        overloaded{
            [&](const step::Cool& c) { return c.duration.value_or(model_.durations().cooling); },
            [&](const step::Detect&) { return model_.detection().total_duration; },
            [&](const step::Pump&) { return model_.pump().duration; },
            [&](const step::Transfer& t) {
              pulse = &model_.pulse(t.from, t.to);
              return t.duration.value_or(pulse->t_pi);
            },
            [&](const step::Deshelve&) { return model_.durations().deshelve; },
            [&](const step::Rotate&) { return 0.0; },
        },
        s);
    durations_.push_back(duration);
    pulses_.push_back(pulse);
  }
}

ShotRecord ShotEngine::run(Rng& rng, std::uint64_t index) {
  sampler_.reset();
  ShotRecord rec;
  rec.index = index;
  rec.prepared = sequence_.origin;

  const auto& decay = model_.decay();
  const auto& detection = model_.detection();
  const QubitEncoding& enc = sequence_.encoding;

  StateLabel ion = StateLabel::wrong_ground();
  if (model_.loss_probability_per_shot() > 0.0 && uniform01(rng) < model_.loss_probability_per_shot()) {
    ion = StateLabel::lost();
  }

  // Pending projection after a rotation: the ion sits in `rotated_from` and
  // stays there with probability `stay_probability` when projected.
  bool pending = false;
  QubitValue rotated_from = QubitValue::Zero;
  double stay_probability = 1.0;

  const auto& steps = sequence_.steps;
  std::size_t i = 0;
  while (i < steps.size()) {
    const SequenceStep& s = steps[i];
    const double duration = durations_[i];
    if (pending && !std::holds_alternative<step::Cool>(s)) {
      const bool stay = uniform01(rng) < stay_probability;
      const QubitValue result =
          stay ? rotated_from : (rotated_from == QubitValue::Zero ? QubitValue::One : QubitValue::Zero);
      ion = enc.state_of(result);
      rec.projected = result;
      pending = false;
    }

    bool restart = false;
    if (const auto* d = std::get_if<step::Detect>(&s)) {
      const DetectionResult r = detect(ion, detection, decay, sampler_, rng);
      ion = r.post_state;
      rec.outcomes[index_of(d->label)] = r.outcome;
      rec.counts[index_of(d->label)] = r.counts;
      if (d->label == DetectLabel::R1 && r.outcome == Outcome::Bright && rec.attempts < options_.max_attempts) {
        ++rec.attempts;
        restart = true;
      }
    } else if (std::holds_alternative<step::Rotate>(s)) {
      if (!pending && (ion == enc.zero || ion == enc.one)) {
        pending = true;
        rotated_from = ion == enc.zero ? QubitValue::Zero : QubitValue::One;
        const double c = std::cos(0.5 * std::get<step::Rotate>(s).angle);
        stay_probability = c * c;
      }
    } else {
      ion = apply_decay(ion, duration, decay, rng).state;
      if (std::holds_alternative<step::Pump>(s)) {
        ion = apply_pump(ion, model_.pump(), rng);
      } else if (std::holds_alternative<step::Transfer>(s)) {
        ion = apply_transfer(ion, *pulses_[i], duration, rng);
      } else if (std::holds_alternative<step::Deshelve>(s)) {
        if (ion.in_metastable()) ion = StateLabel::wrong_ground();
      }
    }

    if (options_.record_trace) rec.trace.push_back({i, ion});
    i = restart ? sequence_.retry_from : i + 1;
  }

  const FlagVerdict verdict = evaluate_flags(rec.outcomes, options_.strict_flags);
  rec.flagged = verdict.flagged;
  rec.reason = verdict.reason;
  rec.inferred = verdict.inferred;
  return rec;
}

ShotRecord run_shot(const Sequence& sequence, const ErrorModel& model, Rng& rng, const ShotOptions& options) {
  ShotEngine engine(sequence, model, options);
  return engine.run(rng);
}

}  // namespace spamsim
