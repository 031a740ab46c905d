#include "spamsim/detection.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include <Eigen/Dense>
#include <unsupported/Eigen/NonLinearOptimization>

namespace spamsim {

void DetectionModel::validate() const {
  if (!(mean_dark >= 0.0)) throw std::invalid_argument("mean_dark must be non-negative");
  if (!(mean_bright > mean_dark)) throw std::invalid_argument("mean_bright must exceed mean_dark");
  if (!(read_noise >= 0.0)) throw std::invalid_argument("read_noise must be non-negative");
  if (!(exposure > 0.0)) throw std::invalid_argument("exposure must be positive");
  if (!(total_duration >= exposure)) throw std::invalid_argument("total_duration must be >= exposure");
}

CountSampler::CountSampler(const DetectionModel& model)
    : model_(model),
      bright_(model.mean_bright > 0.0 ? model.mean_bright : 1.0),
      dark_(model.mean_dark > 0.0 ? model.mean_dark : 1.0),
      noise_(0.0, model.read_noise > 0.0 ? model.read_noise : 1.0) {}

void CountSampler::reset() {
  bright_.reset();
  dark_.reset();
  noise_.reset();
}

std::int64_t CountSampler::poisson(double mean, Rng& rng) {
  if (mean <= 0.0) return 0;
  if (mean == model_.mean_bright) return bright_(rng);
  if (mean == model_.mean_dark) return dark_(rng);
  std::poisson_distribution<std::int64_t> dist(mean);
  return dist(rng);
}

std::int64_t CountSampler::sample(double f, Rng& rng) {
  if (!(f >= 0.0 && f <= 1.0)) throw std::invalid_argument("fluorescing fraction must lie in [0, 1]");
  const double mean = f == 1.0 ? model_.mean_bright : f == 0.0 ? model_.mean_dark
                                                               : f * model_.mean_bright + (1.0 - f) * model_.mean_dark;
  double value = static_cast<double>(poisson(mean, rng));
  if (model_.read_noise > 0.0) value += noise_(rng);
  return std::lround(value);
}

std::int64_t sample_counts(double fluorescing_fraction, const DetectionModel& model, Rng& rng) {
  CountSampler sampler(model);
  return sampler.sample(fluorescing_fraction, rng);
}

double fluorescing_fraction(double decay_time, const DetectionModel& model) {
  return std::clamp((model.exposure - decay_time) / model.exposure, 0.0, 1.0);
}

DetectionResult detect(const StateLabel& state, const DetectionModel& model, const DecayChannel& decay,
                       CountSampler& sampler, Rng& rng) {
  double f = 0.0;
  StateLabel post = state;
  std::optional<double> decay_time;
  if (state.fluoresces()) {
    f = 1.0;
  } else if (state.in_metastable() && std::isfinite(decay.lifetime)) {
    const double t = -decay.lifetime * std::log1p(-uniform01(rng));
    if (t < model.total_duration) {
      decay_time = t;
      f = fluorescing_fraction(t, model);
      post = StateLabel::wrong_ground();
    }
  }
  const std::int64_t counts = sampler.sample(f, rng);
  return {classify(counts, model.threshold), post, counts, decay_time};
}

DetectionResult detect(const StateLabel& state, const DetectionModel& model, const DecayChannel& decay, Rng& rng) {
  CountSampler sampler(model);
  return detect(state, model, decay, sampler, rng);
}

namespace {

// P(round(K + noise) <= threshold) for K ~ Poisson(mean), noise ~ N(0, sigma^2).
double probability_at_or_below(double mean, double sigma, std::int64_t threshold) {
  const double cut = static_cast<double>(threshold) + 0.5;
  auto below = [&](double k) {
    if (sigma <= 0.0) return k < cut ? 1.0 : 0.0;
    return 0.5 * std::erfc(-(cut - k) / (sigma * std::numbers::sqrt2));
  };
  if (mean <= 0.0) return below(0.0);
  const double spread = 40.0 * std::sqrt(mean) + 50.0;
  const auto lo = static_cast<std::int64_t>(std::max(0.0, std::floor(mean - spread)));
  const auto hi = static_cast<std::int64_t>(std::ceil(mean + spread));
  const double log_mean = std::log(mean);
  double total = 0.0;
  for (std::int64_t k = lo; k <= hi; ++k) {
    const double kd = static_cast<double>(k);
    const double pmf = std::exp(kd * log_mean - mean - std::lgamma(kd + 1.0));
    total += pmf * below(kd);
  }
  return total;
}

}  // namespace

OpticalErrors optical_error_rates(const DetectionModel& model, std::int64_t threshold) {
  const double bright_error = probability_at_or_below(model.mean_bright, model.read_noise, threshold);
  const double dark_error = 1.0 - probability_at_or_below(model.mean_dark, model.read_noise, threshold);
  return {bright_error, std::max(0.0, dark_error)};
}

OpticalErrors optical_error_rates(const DetectionModel& model) {
  return optical_error_rates(model, model.threshold);
}

// ---------------------------------------------------------------------------

std::uint64_t CountHistogram::total() const {
  return std::accumulate(frequency.begin(), frequency.end(), std::uint64_t{0});
}

std::int64_t CountHistogram::bin_width() const {
  return bin_low.size() < 2 ? 1 : bin_low[1] - bin_low[0];
}

void CountHistogram::validate() const {
  if (bin_low.size() != frequency.size()) throw std::invalid_argument("histogram bins and frequencies differ in length");
  if (bin_low.empty()) throw std::invalid_argument("histogram has no bins");
  const std::int64_t width = bin_width();
  if (width <= 0) throw std::invalid_argument("histogram bins must be increasing");
  for (std::size_t i = 1; i < bin_low.size(); ++i) {
    if (bin_low[i] - bin_low[i - 1] != width) throw std::invalid_argument("histogram bins must be uniform");
  }
}

CountHistogram CountHistogram::from_samples(const std::vector<std::int64_t>& counts, std::int64_t width,
                                            HistogramLabel label) {
  if (width <= 0) throw std::invalid_argument("bin width must be positive");
  if (counts.empty()) throw std::invalid_argument("no samples");
  auto floor_div = [width](std::int64_t v) { return v >= 0 ? v / width : -((-v + width - 1) / width); };
  const auto [mn, mx] = std::minmax_element(counts.begin(), counts.end());
  const std::int64_t first = floor_div(*mn);
  const std::int64_t last = floor_div(*mx);
  CountHistogram h;
  h.label = label;
  for (std::int64_t b = first; b <= last; ++b) h.bin_low.push_back(b * width);
  h.frequency.assign(h.bin_low.size(), 0);
  for (auto c : counts) ++h.frequency[static_cast<std::size_t>(floor_div(c) - first)];
  return h;
}

GaussianFit fit_moments(const CountHistogram& histogram) {
  histogram.validate();
  const double n = static_cast<double>(histogram.total());
  if (n <= 0.0) throw std::invalid_argument("histogram is empty");
  const double width = static_cast<double>(histogram.bin_width());
  const double centre_shift = 0.5 * (width - 1.0);
  double mean = 0.0;
  for (std::size_t i = 0; i < histogram.bin_low.size(); ++i) {
    mean += static_cast<double>(histogram.frequency[i]) * (static_cast<double>(histogram.bin_low[i]) + centre_shift);
  }
  mean /= n;
  double var = 0.0;
  for (std::size_t i = 0; i < histogram.bin_low.size(); ++i) {
    const double d = static_cast<double>(histogram.bin_low[i]) + centre_shift - mean;
    var += static_cast<double>(histogram.frequency[i]) * d * d;
  }
  var /= n;
  // Spread of integers inside a bin, floored at the unit quantisation variance.
  var += (width * width - 1.0) / 12.0;
  var = std::max(var, 1.0 / 12.0);
  return {mean, std::sqrt(var)};
}

namespace {

struct GaussianResidual {
  using Scalar = double;
  using InputType = Eigen::VectorXd;
  using ValueType = Eigen::VectorXd;
  using JacobianType = Eigen::MatrixXd;
  enum { InputsAtCompileTime = Eigen::Dynamic, ValuesAtCompileTime = Eigen::Dynamic };

  std::vector<double> x;
  std::vector<double> y;

  int inputs() const { return 3; }
  int values() const { return static_cast<int>(x.size()); }

  // params: amplitude, mean, sigma
  int operator()(const Eigen::VectorXd& p, Eigen::VectorXd& fvec) const {
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double z = (x[i] - p[1]) / p[2];
      fvec[static_cast<Eigen::Index>(i)] = p[0] * std::exp(-0.5 * z * z) - y[i];
    }
    return 0;
  }
  int df(const Eigen::VectorXd& p, Eigen::MatrixXd& jac) const {
    for (std::size_t i = 0; i < x.size(); ++i) {
      const auto r = static_cast<Eigen::Index>(i);
      const double z = (x[i] - p[1]) / p[2];
      const double g = std::exp(-0.5 * z * z);
      jac(r, 0) = g;
      jac(r, 1) = p[0] * g * z / p[2];
      jac(r, 2) = p[0] * g * z * z / p[2];
    }
    return 0;
  }
};

}  // namespace

GaussianFit fit_least_squares(const CountHistogram& histogram) {
  const GaussianFit seed = fit_moments(histogram);
  if (histogram.bin_low.size() < 3) return seed;
  const double width = static_cast<double>(histogram.bin_width());
  GaussianResidual functor;
  for (std::size_t i = 0; i < histogram.bin_low.size(); ++i) {
    functor.x.push_back(static_cast<double>(histogram.bin_low[i]) + 0.5 * (width - 1.0));
    functor.y.push_back(static_cast<double>(histogram.frequency[i]));
  }
  Eigen::VectorXd p(3);
  p << *std::max_element(functor.y.begin(), functor.y.end()), seed.mean, seed.sigma;
  Eigen::LevenbergMarquardt<GaussianResidual> solver(functor);
  solver.minimize(p);
  if (!std::isfinite(p[1]) || !std::isfinite(p[2]) || p[2] == 0.0) return seed;
  return {p[1], std::abs(p[2])};
}

double gaussian_crossing(const GaussianFit& a, const GaussianFit& b) {
  const GaussianFit& lo = a.mean <= b.mean ? a : b;
  const GaussianFit& hi = a.mean <= b.mean ? b : a;
  const double sl2 = lo.sigma * lo.sigma;
  const double sh2 = hi.sigma * hi.sigma;
  // sh2 (x - mu_lo)^2 - sl2 (x - mu_hi)^2 = 2 sl2 sh2 ln(sigma_hi / sigma_lo)
  const double qa = sh2 - sl2;
  const double qb = -2.0 * (sh2 * lo.mean - sl2 * hi.mean);
  const double qc = sh2 * lo.mean * lo.mean - sl2 * hi.mean * hi.mean -
                    2.0 * sl2 * sh2 * std::log(hi.sigma / lo.sigma);
  const double midpoint = 0.5 * (lo.mean + hi.mean);
  if (std::abs(qa) <= 1e-12 * (sh2 + sl2)) return -qc / qb;
  const double disc = qb * qb - 4.0 * qa * qc;
  if (disc < 0.0) return midpoint;
  const double q = -0.5 * (qb + std::copysign(std::sqrt(disc), qb));
  const double roots[2] = {q / qa, qc / q};
  double best = midpoint;
  double best_distance = INFINITY;
  for (double r : roots) {
    if (!std::isfinite(r)) continue;
    const bool inside = r >= lo.mean && r <= hi.mean;
    const double distance = inside ? 0.0 : std::abs(r - midpoint);
    if (distance < best_distance) {
      best = r;
      best_distance = distance;
    }
  }
  return best;
}

ThresholdCalibration calibrate_threshold(const CountHistogram& bright, const CountHistogram& dark, FitMethod method) {
  if (bright.total() == 0 || dark.total() == 0) throw std::invalid_argument("calibration histograms must be non-empty");
  auto fit = [method](const CountHistogram& h) {
    return method == FitMethod::Moments ? fit_moments(h) : fit_least_squares(h);
  };
  GaussianFit fb = fit(bright);
  GaussianFit fd = fit(dark);
  if (fb.mean < fd.mean) std::swap(fb, fd);
  const double combined = std::hypot(fb.sigma, fd.sigma);
  if (fb.mean - fd.mean < combined) {
    throw InseparableDistributions("bright and dark count distributions overlap (separation " +
                                   std::to_string(fb.mean - fd.mean) + " < combined sigma " +
                                   std::to_string(combined) + ")");
  }
  const double crossing = gaussian_crossing(fd, fb);
  return {static_cast<std::int64_t>(std::llround(crossing)), crossing, fb, fd};
}

}  // namespace spamsim
