#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "spamsim/detection.hpp"

using namespace spamsim;

namespace {

const DecayChannel kNoDecay{std::numeric_limits<double>::infinity()};

// Bisection on the log-density difference; independent of the closed-form
// quadratic used by the library.
double crossing_by_bisection(double mu_d, double s_d, double mu_b, double s_b) {
  auto log_density = [](double x, double mu, double s) { return -std::log(s) - 0.5 * std::pow((x - mu) / s, 2); };
  auto f = [&](double x) { return log_density(x, mu_b, s_b) - log_density(x, mu_d, s_d); };
  double lo = mu_d;
  double hi = mu_b;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if ((f(mid) > 0.0) == (f(hi) > 0.0)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return 0.5 * (lo + hi);
}

CountHistogram gaussian_histogram(double mu, double sigma, std::int64_t lo, std::int64_t hi, double scale,
                                  HistogramLabel label) {
  CountHistogram h;
  h.label = label;
  for (std::int64_t x = lo; x <= hi; ++x) {
    h.bin_low.push_back(x);
    h.frequency.push_back(static_cast<std::uint64_t>(std::llround(scale * std::exp(-0.5 * std::pow((x - mu) / sigma, 2)))));
  }
  return h;
}

}  // namespace

TEST(Classify, TieIsDarkAndMonotone) {
  EXPECT_EQ(classify(161, 161), Outcome::Dark);
  EXPECT_EQ(classify(162, 161), Outcome::Bright);
  Outcome prev = Outcome::Dark;
  for (std::int64_t c = -200; c < 600; ++c) {
    const Outcome o = classify(c, 161);
    EXPECT_FALSE(prev == Outcome::Bright && o == Outcome::Dark);
    prev = o;
  }
}

TEST(DetectionModel, ValidateRejectsNonsense) {
  DetectionModel m;
  EXPECT_NO_THROW(m.validate());
  m.mean_bright = 0.0;
  EXPECT_THROW(m.validate(), std::invalid_argument);
  m = DetectionModel{};
  m.total_duration = m.exposure / 2;
  EXPECT_THROW(m.validate(), std::invalid_argument);
}

// The default count parameters reproduce the reference optical errors.
TEST(OpticalErrors, DefaultsReproduceReferenceRates) {
  const auto e = optical_error_rates(DetectionModel{});
  EXPECT_NEAR(e.bright_error, 3.2e-6, 0.1e-6);
  EXPECT_LT(e.dark_error, 1e-7);
}

TEST(OpticalErrors, MatchesSampling) {
  DetectionModel m;
  m.mean_bright = 40.0;
  m.read_noise = 6.0;
  m.threshold = 18;
  const auto exact = optical_error_rates(m);
  CountSampler sampler(m);
  Rng rng(21);
  const int n = 200000;
  int bright_miss = 0;
  int dark_miss = 0;
  for (int i = 0; i < n; ++i) {
    bright_miss += classify(sampler.sample(1.0, rng), m.threshold) == Outcome::Dark;
    dark_miss += classify(sampler.sample(0.0, rng), m.threshold) == Outcome::Bright;
  }
  auto se = [n](double p) { return std::sqrt(p * (1 - p) / n); };
  EXPECT_NEAR(bright_miss / double(n), exact.bright_error, 4 * se(exact.bright_error) + 1e-6);
  EXPECT_NEAR(dark_miss / double(n), exact.dark_error, 4 * se(exact.dark_error) + 1e-6);
}

TEST(SampleCounts, MeanAndVariance) {
  const DetectionModel m;
  CountSampler sampler(m);
  Rng rng(2);
  const int n = 100000;
  double sum = 0.0;
  double sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double c = static_cast<double>(sampler.sample(1.0, rng));
    sum += c;
    sq += c * c;
  }
  const double mean = sum / n;
  const double var = sq / n - mean * mean;
  const double expected_var = m.mean_bright + m.read_noise * m.read_noise + 1.0 / 12.0;
  EXPECT_NEAR(mean, m.mean_bright, 4 * std::sqrt(expected_var / n));
  EXPECT_NEAR(var, expected_var, 0.03 * expected_var);
}

TEST(SampleCounts, ResetMakesStreamsReproducible) {
  const DetectionModel m;
  CountSampler a(m);
  CountSampler b(m);
  Rng r1(9);
  a.sample(1.0, r1);  // leaves a cached normal deviate behind
  a.reset();
  Rng r2(10);
  Rng r3(10);
  EXPECT_EQ(a.sample(1.0, r2), b.sample(1.0, r3));
  EXPECT_THROW(a.sample(1.5, r2), std::invalid_argument);
}

TEST(Detect, GroundAndLost) {
  const DetectionModel m;
  Rng rng(4);
  for (int i = 0; i < 1000; ++i) {
    const auto r = detect(ground_state(2, 0), m, DecayChannel{}, rng);
    EXPECT_EQ(r.post_state, ground_state(2, 0));
    EXPECT_FALSE(r.decay_time.has_value());
  }
  int bright = 0;
  for (int i = 0; i < 1000; ++i) bright += detect(StateLabel::lost(), m, DecayChannel{}, rng).outcome == Outcome::Bright;
  EXPECT_EQ(bright, 0);
}

TEST(Detect, MetastableWithoutDecayIsDarkAndPreserved) {
  const DetectionModel m;
  Rng rng(6);
  for (int i = 0; i < 2000; ++i) {
    const auto r = detect(metastable_state(2, -1), m, kNoDecay, rng);
    EXPECT_EQ(r.outcome, Outcome::Dark);
    EXPECT_EQ(r.post_state, metastable_state(2, -1));
  }
}

// Decay only ever moves B to A; early decays read bright, late ones dark.
TEST(Detect, DecayDuringPulse) {
  const DetectionModel m;
  const DecayChannel fast{m.total_duration};  // ~63% decay within the pulse
  Rng rng(8);
  int decayed = 0;
  const int n = 50000;
  for (int i = 0; i < n; ++i) {
    const auto r = detect(metastable_state(1, -1), m, fast, rng);
    if (r.decay_time) {
      ++decayed;
      EXPECT_EQ(r.post_state, StateLabel::wrong_ground());
      EXPECT_LT(*r.decay_time, m.total_duration);
      if (*r.decay_time < 0.05 * m.exposure) {
        EXPECT_EQ(r.outcome, Outcome::Bright);
      }
      if (*r.decay_time > 0.95 * m.exposure) {
        EXPECT_EQ(r.outcome, Outcome::Dark);
      }
    } else {
      EXPECT_EQ(r.post_state, metastable_state(1, -1));
    }
  }
  const double p = 1.0 - std::exp(-1.0);
  EXPECT_NEAR(decayed / double(n), p, 4 * std::sqrt(p * (1 - p) / n));
}

TEST(FluorescingFraction, LinearOverExposure) {
  const DetectionModel m;
  EXPECT_DOUBLE_EQ(fluorescing_fraction(0.0, m), 1.0);
  EXPECT_DOUBLE_EQ(fluorescing_fraction(m.exposure / 4, m), 0.75);
  EXPECT_DOUBLE_EQ(fluorescing_fraction(m.exposure, m), 0.0);
  EXPECT_DOUBLE_EQ(fluorescing_fraction(m.total_duration, m), 0.0);
}

TEST(Histogram, FromSamplesAndValidate) {
  const auto h = CountHistogram::from_samples({-3, -1, 0, 4, 4, 9}, 5, HistogramLabel::Dark);
  ASSERT_EQ(h.bin_low, (std::vector<std::int64_t>{-5, 0, 5}));
  EXPECT_EQ(h.frequency, (std::vector<std::uint64_t>{2, 3, 1}));
  EXPECT_EQ(h.total(), 6U);
  CountHistogram bad;
  bad.bin_low = {0, 2, 3};
  bad.frequency = {1, 1, 1};
  EXPECT_THROW(bad.validate(), std::invalid_argument);
}

TEST(FitMoments, RecoversMeanAndSigma) {
  const auto h = gaussian_histogram(100.0, 12.0, 20, 180, 1e4, HistogramLabel::Bright);
  const auto fit = fit_moments(h);
  EXPECT_NEAR(fit.mean, 100.0, 0.01);
  EXPECT_NEAR(fit.sigma, 12.0, 0.05);
}

TEST(FitLeastSquares, RecoversMeanAndSigma) {
  auto h = gaussian_histogram(100.0, 12.0, 20, 180, 1e4, HistogramLabel::Bright);
  const auto fit = fit_least_squares(h);
  EXPECT_NEAR(fit.mean, 100.0, 0.01);
  EXPECT_NEAR(fit.sigma, 12.0, 0.05);
}

TEST(GaussianCrossing, EqualSigmaMidpoint) {
  EXPECT_NEAR(gaussian_crossing({0.0, 2.0}, {10.0, 2.0}), 5.0, 1e-12);
}

TEST(GaussianCrossing, UnequalSigmaMatchesBisectionOracle) {
  const double oracle = crossing_by_bisection(20.0, 15.0, 320.0, 60.0);
  EXPECT_NEAR(gaussian_crossing({20.0, 15.0}, {320.0, 60.0}), oracle, 1e-9);
  EXPECT_NEAR(gaussian_crossing({320.0, 60.0}, {20.0, 15.0}), oracle, 1e-9);
  for (double sb : {10.0, 30.0, 45.0, 90.0}) {
    EXPECT_NEAR(gaussian_crossing({0.0, 30.0}, {318.0, sb}), crossing_by_bisection(0.0, 30.0, 318.0, sb), 1e-8);
  }
}

TEST(CalibrateThreshold, SymmetricAndSwapInvariant) {
  const auto dark = gaussian_histogram(0.0, 3.0, -20, 20, 1000, HistogramLabel::Dark);
  const auto bright = gaussian_histogram(10.0, 3.0, -10, 30, 1000, HistogramLabel::Bright);
  EXPECT_EQ(calibrate_threshold(bright, dark).threshold, 5);
  EXPECT_EQ(calibrate_threshold(dark, bright).threshold, 5);
  const auto minus = gaussian_histogram(-5.0, 1.5, -15, 5, 1000, HistogramLabel::Dark);
  const auto plus = gaussian_histogram(5.0, 1.5, -5, 15, 1000, HistogramLabel::Bright);
  EXPECT_EQ(calibrate_threshold(plus, minus).threshold, 0);
}

TEST(CalibrateThreshold, UnequalWidthsAgreeWithOracle) {
  const auto dark = gaussian_histogram(20.0, 15.0, -60, 100, 1e4, HistogramLabel::Dark);
  const auto bright = gaussian_histogram(320.0, 60.0, 20, 620, 1e4, HistogramLabel::Bright);
  const auto c = calibrate_threshold(bright, dark);
  const double oracle = crossing_by_bisection(20.0, 15.0, 320.0, 60.0);
  EXPECT_LE(std::abs(static_cast<double>(c.threshold) - oracle), 1.0);
  const auto lsq = calibrate_threshold(bright, dark, FitMethod::LeastSquares);
  EXPECT_LE(std::abs(static_cast<double>(lsq.threshold) - oracle), 1.0);
}

TEST(CalibrateThreshold, IdenticalHistogramsAreInseparable) {
  const auto h = gaussian_histogram(50.0, 10.0, 0, 100, 100, HistogramLabel::Bright);
  EXPECT_THROW(calibrate_threshold(h, h), InseparableDistributions);
}
