#include "spamsim/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>

namespace spamsim {
namespace {

constexpr std::uint64_t kBlockSize = 8192;

// Calls work(worker, begin, end) for consecutive blocks of [0, total) on
// `threads` workers. Blocks are claimed dynamically; callers must combine
// per-worker results in an order-independent way.
template <class Work>
void parallel_blocks(std::uint64_t total, unsigned threads, Work&& work) {
  const std::uint64_t blocks = (total + kBlockSize - 1) / kBlockSize;
  threads = static_cast<unsigned>(std::min<std::uint64_t>(std::max(1U, threads), std::max<std::uint64_t>(blocks, 1)));
  std::atomic<std::uint64_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto body = [&](unsigned worker) {
    try {
      for (std::uint64_t b = next++; b < blocks; b = next++) {
        const std::uint64_t begin = b * kBlockSize;
        work(worker, begin, std::min(total, begin + kBlockSize));
      }
    } catch (...) {
      std::lock_guard lock(error_mutex);
      if (!error) error = std::current_exception();
      next = blocks;
    }
  };
  if (threads == 1) {
    body(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < threads; ++w) pool.emplace_back(body, w);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);
}

unsigned worker_count(unsigned threads) { return std::max(1U, threads); }

}  // namespace

std::string_view to_string(RunMode mode) {
  return mode == RunMode::PostSelect ? "post-select" : "rus";
}

RunMode parse_run_mode(std::string_view text) {
  if (text == "post-select" || text == "PostSelect") return RunMode::PostSelect;
  if (text == "rus" || text == "RepeatUntilSuccess") return RunMode::RepeatUntilSuccess;
  throw std::invalid_argument("unknown mode '" + std::string(text) + "' (expected post-select or rus)");
}

void ExperimentConfig::validate() const {
  if (shots < 1) throw std::invalid_argument("shots must be at least 1");
  if (max_attempts < 1) throw std::invalid_argument("max_attempts must be at least 1");
  if (states.empty() || states.size() > 2) throw std::invalid_argument("states must list one or two qubit values");
  if (states.size() == 2 && states[0] == states[1]) throw std::invalid_argument("states must be distinct");
  if (!(wilson_z > 0.0)) throw std::invalid_argument("wilson_z must be positive");
  if (histogram_bin_width < 1) throw std::invalid_argument("histogram_bin_width must be at least 1");
}

QubitValue ExperimentConfig::state_of_shot(std::uint64_t index) const {
  if (states.size() == 1) return states[0];
  return interleave ? states[index % 2] : states[index < shots ? 0 : 1];
}

ExperimentResult run_experiment(const ExperimentConfig& config, const ErrorModel& model) {
  config.validate();
  const QubitEncoding& encoding = encoding_catalog(config.encoding);
  ShotOptions options;
  options.strict_flags = config.strict_flags;
  options.max_attempts = config.mode == RunMode::RepeatUntilSuccess ? config.max_attempts : 1;

  const unsigned workers = worker_count(config.threads);
  std::vector<SummaryAccumulator> partial(workers, SummaryAccumulator(config.histogram_bin_width));
  const std::uint64_t total = config.total_shots();
  const std::uint64_t blocks = (total + kBlockSize - 1) / kBlockSize;
  std::vector<std::vector<ShotRecord>> block_records(config.keep_records ? blocks : 0);

  parallel_blocks(total, workers, [&](unsigned worker, std::uint64_t begin, std::uint64_t end) {
    // Engines are cheap to build and not shareable, so each block makes its own.
    ShotEngine zero(build_sequence(encoding, Preparation::Zero), model, options);
    ShotEngine one(build_sequence(encoding, Preparation::One), model, options);
    auto& acc = partial[worker];
    std::vector<ShotRecord>* keep = config.keep_records ? &block_records[begin / kBlockSize] : nullptr;
    for (std::uint64_t i = begin; i < end; ++i) {
      Rng rng = stream_rng(config.seed, i);
      ShotEngine& engine = config.state_of_shot(i) == QubitValue::Zero ? zero : one;
      ShotRecord rec = engine.run(rng, i);
      acc.add(rec);
      if (keep) keep->push_back(std::move(rec));
    }
  });

  ExperimentResult result{SummaryAccumulator(config.histogram_bin_width), {}, {}};
  for (const auto& p : partial) result.tallies.merge(p);
  result.summary = summarize(result.tallies, config.wilson_z);
  for (auto& b : block_records) {
    std::move(b.begin(), b.end(), std::back_inserter(result.records));
  }
  return result;
}

// ---------------------------------------------------------------------------

std::vector<std::size_t> scanned_steps(const Sequence& sequence, BiasCurve curve) {
  const StateLabel s20 = ground_state(2, 0);
  const StateLabel d2m1 = metastable_state(2, -1);
  const StateLabel d2p1 = metastable_state(2, 1);
  const StateLabel d1m1 = metastable_state(1, -1);
  std::vector<std::pair<StateLabel, StateLabel>> pulses;
  switch (curve) {
    case BiasCurve::Optical0:
    case BiasCurve::Metastable0:
      pulses = {{d2m1, s20}};
      break;
    case BiasCurve::Optical1:
      pulses = {{s20, d1m1}, {d1m1, s20}};
      break;
    case BiasCurve::Ground0:
      pulses = {{s20, d2p1}, {d2p1, s20}};
      break;
  }
  if (sequence.encoding.name != encoding_of(curve)) {
    throw std::invalid_argument("sequence encoding does not match bias curve " + std::string(to_string(curve)));
  }
  std::vector<std::size_t> out;
  for (std::size_t i = sequence.measurement_begin; i < sequence.steps.size(); ++i) {
    if (const auto* t = std::get_if<step::Transfer>(&sequence.steps[i])) {
      if (std::find(pulses.begin(), pulses.end(), std::pair{t->from, t->to}) != pulses.end()) out.push_back(i);
    }
  }
  return out;
}

Sequence bias_sequence(BiasCurve curve, QubitValue origin, double t_over_tpi, const ErrorModel& model) {
  if (!(t_over_tpi >= 0.0)) throw std::invalid_argument("pulse duration fraction must be non-negative");
  Sequence seq = build_sequence(encoding_catalog(encoding_of(curve)), Preparation::SuperpositionViaRotation, origin);
  for (std::size_t i : scanned_steps(seq, curve)) {
    auto& t = std::get<step::Transfer>(seq.steps[i]);
    t.duration = t_over_tpi * model.pulse(t.from, t.to).t_pi;
  }
  return seq;
}

std::vector<BiasPoint> run_bias_scan(const BiasScanConfig& config, const ErrorModel& model) {
  if (config.shots_per_point < 1) throw std::invalid_argument("shots_per_point must be at least 1");
  if (config.t_grid.empty()) throw std::invalid_argument("empty duration grid");
  const ErrorModel scan_model = model.with_static_errors_disabled();
  const unsigned workers = worker_count(config.threads);
  std::vector<BiasPoint> out;
  for (std::size_t j = 0; j < config.t_grid.size(); ++j) {
    const double r = config.t_grid[j];
    const Sequence from_zero = bias_sequence(config.curve, QubitValue::Zero, r, scan_model);
    const Sequence from_one = bias_sequence(config.curve, QubitValue::One, r, scan_model);
    const std::uint64_t point_seed =
        splitmix64(config.seed ^ splitmix64((static_cast<std::uint64_t>(config.curve) << 32) + j));
    std::vector<std::array<std::uint64_t, 2>> counts(workers, {0, 0});  // accepted, bright
    parallel_blocks(config.shots_per_point, workers, [&](unsigned worker, std::uint64_t begin, std::uint64_t end) {
      ShotEngine zero(from_zero, scan_model);
      ShotEngine one(from_one, scan_model);
      for (std::uint64_t i = begin; i < end; ++i) {
        Rng rng = stream_rng(point_seed, i);
        const ShotRecord rec = (i % 2 == 0 ? zero : one).run(rng, i);
        if (rec.flagged) continue;
        ++counts[worker][0];
        if (rec.inferred == QubitValue::Zero) ++counts[worker][1];
      }
    });
    std::uint64_t accepted = 0;
    std::uint64_t bright = 0;
    for (const auto& c : counts) {
      accepted += c[0];
      bright += c[1];
    }
    BiasPoint p{r, 0.0, bias_closed_form(bias_acceptance(config.curve, r).gamma(), 0.5), 0.0, accepted,
                config.shots_per_point};
    if (accepted > 0) {
      const double pb = static_cast<double>(bright) / static_cast<double>(accepted);
      p.measured_bias = 2.0 * pb - 1.0;  // <Z> = 0 for the equal superposition
      p.standard_error = 2.0 * std::sqrt(pb * (1.0 - pb) / static_cast<double>(accepted));
    } else {
      p.measured_bias = std::nan("");
      p.standard_error = std::nan("");
    }
    out.push_back(p);
  }
  return out;
}

std::vector<std::int64_t> simulate_counts(const DetectionModel& model, double fluorescing, std::size_t samples,
                                          std::uint64_t seed) {
  CountSampler sampler(model);
  std::vector<std::int64_t> out;
  out.reserve(samples);
  for (std::size_t i = 0; i < samples; ++i) {
    Rng rng = stream_rng(seed, i);
    sampler.reset();
    out.push_back(sampler.sample(fluorescing, rng));
  }
  return out;
}

}  // namespace spamsim
