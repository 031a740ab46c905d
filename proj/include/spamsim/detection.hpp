#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <vector>

#include "spamsim/atomic_model.hpp"
#include "spamsim/channels.hpp"
#include "spamsim/rng.hpp"

namespace spamsim {

enum class Outcome : std::uint8_t { Dark, Bright };

/// Photon-count model of one population-detection pulse.
///
/// Means are offset-subtracted camera counts collected over the exposure.
/// The exposure opens at the start of the pulse; the remaining
/// total_duration - exposure is readout dead time during which the ion is
/// still illuminated.
struct DetectionModel {
  double mean_bright = 318.18;
  double mean_dark = 0.0;
  double read_noise = 30.0;
  double offset = 100.0;  // informational; means are already net of it
  double exposure = 400e-6;
  double total_duration = 458.6e-6;
  std::int64_t threshold = 161;

  void validate() const;
};

/// counts > threshold is Bright; ties are Dark.
constexpr Outcome classify(std::int64_t counts, std::int64_t threshold) {
  return counts > threshold ? Outcome::Bright : Outcome::Dark;
}

/// Reusable sampler for the count distribution. Caches the bright and dark
/// Poisson distributions; call reset() before each independent shot so no
/// cached normal deviate leaks between shots.
class CountSampler {
 public:
  explicit CountSampler(const DetectionModel& model);

  /// Poisson(f*mean_bright + (1-f)*mean_dark) plus Gaussian read noise,
  /// rounded to the nearest integer.
  std::int64_t sample(double fluorescing_fraction, Rng& rng);
  void reset();

 private:
  std::int64_t poisson(double mean, Rng& rng);

  DetectionModel model_;
  std::poisson_distribution<std::int64_t> bright_;
  std::poisson_distribution<std::int64_t> dark_;
  std::normal_distribution<double> noise_;
};

std::int64_t sample_counts(double fluorescing_fraction, const DetectionModel& model, Rng& rng);

struct DetectionResult {
  Outcome outcome;
  StateLabel post_state;
  std::int64_t counts;
  std::optional<double> decay_time;  // set when a B state decayed during the pulse
};

/// One detection pulse. A states fluoresce for the whole exposure; Lost and
/// undecayed B states do not. A B state decaying at t_dec fluoresces for the
/// part of the exposure after t_dec and leaves the pulse in WrongGround.
DetectionResult detect(const StateLabel& state, const DetectionModel& model, const DecayChannel& decay,
                       CountSampler& sampler, Rng& rng);
DetectionResult detect(const StateLabel& state, const DetectionModel& model, const DecayChannel& decay, Rng& rng);

/// Fraction of the exposure spent fluorescing after a decay at t_dec.
double fluorescing_fraction(double decay_time, const DetectionModel& model);

struct OpticalErrors {
  double bright_error;  // 1 - P(bright | A)
  double dark_error;    // 1 - P(dark | B, no decay)
};

/// Exact misclassification probabilities of the count model at its threshold,
/// summing the Poisson pmf against the Gaussian read-noise CDF.
OpticalErrors optical_error_rates(const DetectionModel& model);
OpticalErrors optical_error_rates(const DetectionModel& model, std::int64_t threshold);

// ---------------------------------------------------------------------------
// Histograms and threshold calibration

enum class HistogramLabel { Bright, Dark, Unlabeled };

/// Integer-count histogram with uniform bins [bin_low, bin_low + width).
struct CountHistogram {
  std::vector<std::int64_t> bin_low;
  std::vector<std::uint64_t> frequency;
  HistogramLabel label = HistogramLabel::Unlabeled;

  std::uint64_t total() const;
  std::int64_t bin_width() const;  // 1 for a single bin
  void validate() const;

  static CountHistogram from_samples(const std::vector<std::int64_t>& counts, std::int64_t width,
                                     HistogramLabel label);
};

struct GaussianFit {
  double mean;
  double sigma;
};

enum class FitMethod { Moments, LeastSquares };

struct ThresholdCalibration {
  std::int64_t threshold;
  double crossing;  // real-valued equal-density point
  GaussianFit bright;
  GaussianFit dark;
};

class InseparableDistributions : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Sample mean and variance of a histogram (bins represented by the mean of
/// the integers they hold).
GaussianFit fit_moments(const CountHistogram& histogram);
/// Least-squares fit of a scaled Gaussian to the bin frequencies, seeded by
/// the moments.
GaussianFit fit_least_squares(const CountHistogram& histogram);

/// Point between the two means where the Gaussian densities are equal.
double gaussian_crossing(const GaussianFit& a, const GaussianFit& b);

/// Fits both histograms and places the threshold at the rounded crossing.
/// The histogram with the larger fitted mean is treated as bright, so
/// swapping the arguments gives the same threshold. Throws
/// InseparableDistributions when the means are closer than
/// sqrt(sigma_b^2 + sigma_d^2).
ThresholdCalibration calibrate_threshold(const CountHistogram& bright, const CountHistogram& dark,
                                         FitMethod method = FitMethod::Moments);

}  // namespace spamsim
