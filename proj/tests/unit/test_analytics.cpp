#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "spamsim/analytics.hpp"

using namespace spamsim;

namespace {

// Wilson bounds are the roots in p of (phat - p)^2 = z^2 p (1 - p) / n.
std::pair<double, double> wilson_oracle(double k, double n, double z) {
  const double ph = k / n;
  const double a = 1.0 + z * z / n;
  const double b = -(2.0 * ph + z * z / n);
  const double c = ph * ph;
  const double d = std::sqrt(b * b - 4 * a * c);
  return {(-b - d) / (2 * a), (-b + d) / (2 * a)};
}

Sequence seq(EncodingName e, QubitValue v) {
  return build_sequence(encoding_catalog(e), v == QubitValue::Zero ? Preparation::Zero : Preparation::One);
}

constexpr double kPump = 0.0080, kA = 0.0138, kB = 0.0473, kC = 0.0310, kD = 0.0111, kE = 0.0098;

}  // namespace

TEST(Wilson, ReferenceValue) {
  const auto i = wilson_interval(5, 10, 1.96);
  EXPECT_NEAR(i.lo, 0.2366, 5e-5);
  EXPECT_NEAR(i.hi, 0.7634, 5e-5);
  const auto [lo, hi] = wilson_oracle(5, 10, 1.96);
  EXPECT_NEAR(i.lo, lo, 1e-12);
  EXPECT_NEAR(i.hi, hi, 1e-12);
}

TEST(Wilson, MatchesQuadraticOracle) {
  for (std::uint64_t n : {1ULL, 7ULL, 100ULL, 12345ULL, 1000000ULL}) {
    for (std::uint64_t k : std::vector<std::uint64_t>{0, 1, n / 3, n / 2, n}) {
      if (k > n) continue;
      for (double z : {1.0, 1.96, 3.0}) {
        const auto i = wilson_interval(k, n, z);
        const auto [lo, hi] = wilson_oracle(double(k), double(n), z);
        EXPECT_NEAR(i.lo, std::max(0.0, lo), 1e-9);
        EXPECT_NEAR(i.hi, std::min(1.0, hi), 1e-9);
        EXPECT_LE(i.lo, double(k) / n);
        EXPECT_GE(i.hi, double(k) / n);
      }
    }
  }
}

TEST(Wilson, EdgesAndErrors) {
  EXPECT_DOUBLE_EQ(wilson_interval(10, 10, 1.0).hi, 1.0);
  EXPECT_DOUBLE_EQ(wilson_interval(0, 1000000, 1.0).lo, 0.0);
  EXPECT_THROW(wilson_interval(0, 0, 1.0), std::invalid_argument);
  EXPECT_THROW(wilson_interval(3, 2, 1.0), std::invalid_argument);
  EXPECT_THROW(wilson_interval(1, 2, 0.0), std::invalid_argument);
}

TEST(Wilson, WidthShrinksAsRootN) {
  const double w1 = [] { auto i = wilson_interval(300, 1000, 1.0); return i.hi - i.lo; }();
  const double w2 = [] { auto i = wilson_interval(30000, 100000, 1.0); return i.hi - i.lo; }();
  EXPECT_NEAR(w1 / w2, 10.0, 0.05);
}

TEST(PredictRejection, FirstOrderSums) {
  const auto m = ErrorModel::reference_defaults();
  EXPECT_NEAR(predict_rejection(seq(EncodingName::Metastable, QubitValue::Zero), m), kPump + 2 * kA, 1e-12);
  EXPECT_NEAR(predict_rejection(seq(EncodingName::Metastable, QubitValue::One), m), kPump + 2 * kB, 1e-12);
  EXPECT_NEAR(predict_rejection(seq(EncodingName::Optical, QubitValue::Zero), m), kPump + 2 * kA, 1e-12);
  // The failed |1> unshelving pulse is caught by the readout, not flagged.
  EXPECT_NEAR(predict_rejection(seq(EncodingName::Optical, QubitValue::One), m), kPump + 3 * kB, 1e-12);
  EXPECT_NEAR(predict_rejection(seq(EncodingName::Ground, QubitValue::Zero), m), kPump + 2 * kA + 2 * kC, 1e-12);
  EXPECT_NEAR(predict_rejection(seq(EncodingName::Ground, QubitValue::One), m), kPump + kA + kD + 2 * kE, 1e-12);
}

TEST(PredictRejection, ExactMatchesHandDerivedProducts) {
  const auto m = ErrorModel::reference_defaults();
  const double p = 1 - kPump;
  auto ok = [](double e) { return 1 - e; };
  EXPECT_NEAR(predict_rejection_exact(seq(EncodingName::Metastable, QubitValue::Zero), m), 1 - p * ok(kA) * ok(kA), 1e-12);
  EXPECT_NEAR(predict_rejection_exact(seq(EncodingName::Metastable, QubitValue::One), m), 1 - p * ok(kB) * ok(kB), 1e-12);
  EXPECT_NEAR(predict_rejection_exact(seq(EncodingName::Optical, QubitValue::Zero), m), 1 - p * ok(kA) * ok(kA), 1e-12);
  // Either the unshelve works and both readout pulses must, or it fails and
  // only the final readout pulse matters.
  const double o1 = p * ok(kB) * (ok(kB) * ok(kB) * ok(kB) + kB * ok(kB));
  EXPECT_NEAR(predict_rejection_exact(seq(EncodingName::Optical, QubitValue::One), m), 1 - o1, 1e-12);
  EXPECT_NEAR(predict_rejection_exact(seq(EncodingName::Ground, QubitValue::Zero), m),
              1 - p * ok(kA) * ok(kA) * ok(kC) * ok(kC), 1e-12);
  EXPECT_NEAR(predict_rejection_exact(seq(EncodingName::Ground, QubitValue::One), m),
              1 - p * ok(kA) * ok(kD) * ok(kE) * ok(kE), 1e-12);
}

TEST(PredictRejection, ZeroRatesAndSingleEvent) {
  const auto off = ErrorModel::reference_defaults().with_static_errors_disabled();
  for (auto e : {EncodingName::Optical, EncodingName::Metastable, EncodingName::Ground}) {
    for (auto v : {QubitValue::Zero, QubitValue::One}) {
      EXPECT_DOUBLE_EQ(predict_rejection(seq(e, v), off), 0.0);
      EXPECT_DOUBLE_EQ(predict_rejection_exact(seq(e, v), off), 0.0);
    }
  }
  const auto pump_only = off.with_pump_error(0.123);
  EXPECT_DOUBLE_EQ(predict_rejection_exact(seq(EncodingName::Metastable, QubitValue::Zero), pump_only), 0.123);
}

TEST(PredictRejection, FirstOrderAndExactAgreeToPairwiseProducts) {
  const auto m = ErrorModel::reference_defaults();
  for (bool decay : {false, true}) {
    for (auto e : {EncodingName::Optical, EncodingName::Metastable, EncodingName::Ground}) {
      for (auto v : {QubitValue::Zero, QubitValue::One}) {
        const PredictOptions opts{decay, false};
        const auto events = rejection_events(seq(e, v), m, opts);
        double pairwise = 0.0;
        for (std::size_t i = 0; i < events.size(); ++i) {
          for (std::size_t j = i + 1; j < events.size(); ++j) pairwise += events[i].probability * events[j].probability;
        }
        const double first = predict_rejection(seq(e, v), m, opts);
        const double exact = predict_rejection_exact(seq(e, v), m, opts);
        EXPECT_LE(std::abs(first - exact), pairwise + 1e-15);
        EXPECT_LE(exact, first + 1e-15);
      }
    }
  }
}

TEST(PredictRejection, DecayAddsSmallContribution) {
  const auto m = ErrorModel::reference_defaults();
  const auto s = seq(EncodingName::Metastable, QubitValue::One);
  const double without = predict_rejection(s, m);
  const double with = predict_rejection(s, m, {true, false});
  EXPECT_GT(with, without);
  EXPECT_LT(with - without, 1e-4);
}

TEST(PredictRejection, RejectsRotation) {
  const auto s = build_sequence(encoding_catalog(EncodingName::Metastable), Preparation::SuperpositionViaRotation);
  EXPECT_THROW(predict_rejection(s, ErrorModel::reference_defaults()), std::invalid_argument);
}

TEST(PredictRejection, TooManyEvents) {
  auto m = ErrorModel::reference_defaults().with_loss(0.01);
  auto s = seq(EncodingName::Metastable, QubitValue::Zero);
  for (int i = 0; i < 20; ++i) s.steps.insert(s.steps.begin() + 4, step::Transfer{ground_state(1, 0), metastable_state(2, -1), std::nullopt});
  EXPECT_THROW(predict_rejection_exact(s, m), std::invalid_argument);
  EXPECT_NO_THROW(predict_rejection(s, m));
}

TEST(DetectionBudget, Examples) {
  const auto b = detection_error_budget(3.2e-6, 0.0, 1.4e-5);
  EXPECT_NEAR(b.average, 8.6e-6, 1e-10);
  EXPECT_DOUBLE_EQ(b.bright_total, 3.2e-6);
  const auto z = detection_error_budget(0, 0, 0);
  EXPECT_EQ(z.average, 0.0);
  EXPECT_EQ(z.dark_total, 0.0);
  EXPECT_DOUBLE_EQ(detection_error_budget(0, 0, 0.25).average, 0.125);
  EXPECT_THROW(detection_error_budget(-1, 0, 0), std::invalid_argument);
}

TEST(Bias, ClosedFormExamples) {
  for (double p0 : {0.0, 0.2, 0.5, 0.9, 1.0}) EXPECT_NEAR(bias_closed_form(1.0, p0), 0.0, 1e-15);
  EXPECT_NEAR(bias_closed_form(2.0, 0.5), 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(bias_closed_form(1.7, 1.0), 0.0, 1e-15);
  EXPECT_NEAR(bias_closed_form(0.3, 0.0), 0.0, 1e-15);
  EXPECT_THROW(bias_closed_form(0.0, 0.5), std::invalid_argument);
  EXPECT_THROW(bias_closed_form(1.0, 1.5), std::invalid_argument);
}

TEST(Bias, RelabelingSymmetry) {
  for (double g : {0.5, 0.8, 1.3, 2.0}) {
    for (double p0 : {0.1, 0.35, 0.5, 0.77}) {
      EXPECT_NEAR(bias_closed_form(1.0 / g, 1.0 - p0), -bias_closed_form(g, p0), 1e-14);
    }
  }
}

TEST(Bias, CorrectionExamples) {
  EXPECT_NEAR(correct_bias(0.3, 1.0, 0.0).p0, 0.3, 1e-15);
  const auto c = correct_bias(0.5, 0.9, 0.1);
  EXPECT_NEAR(c.p0, 0.5, 1e-15);
  EXPECT_NEAR(c.z, 0.0, 1e-15);
  EXPECT_THROW(correct_bias(0.5, 0.4, 0.4), std::invalid_argument);
}

TEST(Bias, CorrectionInvertsForwardModel) {
  for (double p0 : {0.0, 0.15, 0.5, 0.8, 1.0}) {
    for (auto [g0, g1] : {std::pair{0.93, 0.02}, std::pair{0.6, 0.1}, std::pair{0.99, 0.0}}) {
      const double p_ba = g0 * p0 + g1 * (1 - p0);
      const auto c = correct_bias(p_ba, g0, g1);
      EXPECT_NEAR(c.p0, p0, 1e-12);
      EXPECT_NEAR(c.z, 2 * p0 - 1, 1e-12);
    }
  }
}

TEST(Bias, SimplifiedCorrectionUndoesAcceptance) {
  // Perfect readout, acceptance 0.6 for |0> and 0.9 for |1>.
  const double p0 = 0.4, a0 = 0.6, a1 = 0.9;
  const double pa = a0 * p0 + a1 * (1 - p0);
  const double pb_a = a0 * p0 / pa;
  const auto c = correct_bias_simplified(pb_a, pa, a0, a1);
  EXPECT_NEAR(c.p0, p0, 1e-12);
  EXPECT_NEAR(c.p1, 1 - p0, 1e-12);
}

TEST(Bias, AcceptanceForms) {
  EXPECT_NEAR(bias_acceptance(BiasCurve::Optical0, 0.5).given_zero, 0.5, 1e-15);
  EXPECT_NEAR(bias_acceptance(BiasCurve::Ground0, 0.5).given_zero, 0.25, 1e-15);
  EXPECT_NEAR(bias_acceptance(BiasCurve::Optical1, 0.5).given_one, 0.25, 1e-15);
  EXPECT_DOUBLE_EQ(bias_acceptance(BiasCurve::Optical1, 0.5).given_zero, 1.0);
  for (auto c : all_bias_curves()) {
    EXPECT_NEAR(bias_acceptance(c, 1.0).gamma(), 1.0, 1e-15);
    EXPECT_EQ(parse_bias_curve(to_string(c)), c);
  }
}

TEST(Lifetime, NoiselessInversion) {
  std::vector<LifetimeObservation> obs;
  for (double t : {5.0, 10.0, 20.0, 30.0}) obs.push_back({t, 1000.0 * decay_probability(t, 27.2), 1000.0});
  const auto fit = fit_lifetime(obs);
  EXPECT_NEAR(fit.tau, 27.2, 1e-9);
  EXPECT_GT(fit.tau_stderr, 0.0);
  EXPECT_TRUE(fit.interval(2.0).contains(27.2));
}

TEST(Lifetime, UnidentifiableInputs) {
  EXPECT_THROW(fit_lifetime({{5.0, 10.0, 100.0}}), std::invalid_argument);
  EXPECT_THROW(fit_lifetime({{5.0, 10.0, 100.0}, {5.0, 12.0, 100.0}}), std::invalid_argument);
  EXPECT_THROW(fit_lifetime({{5.0, 0.0, 100.0}, {10.0, 0.0, 100.0}}), std::invalid_argument);
  EXPECT_THROW(fit_lifetime({{5.0, 100.0, 100.0}, {10.0, 100.0, 100.0}}), std::invalid_argument);
  EXPECT_THROW(fit_lifetime({{-5.0, 1.0, 100.0}, {10.0, 10.0, 100.0}}), std::invalid_argument);
}

TEST(Lifetime, SyntheticSamplesCovered) {
  int covered = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto samples = simulate_lifetime_samples(27.2, {5.0, 10.0, 20.0, 30.0}, 10000, seed);
    const auto fit = fit_lifetime(bin_lifetime_samples(samples));
    covered += fit.interval(2.0).contains(27.2);
  }
  EXPECT_GE(covered, 16);
}

TEST(Lifetime, BinningGroupsByDelay) {
  const auto bins = bin_lifetime_samples({{1.0, true}, {2.0, false}, {1.0, false}, {1.0, true}});
  ASSERT_EQ(bins.size(), 2U);
  EXPECT_DOUBLE_EQ(bins[0].delay, 1.0);
  EXPECT_DOUBLE_EQ(bins[0].decayed, 2.0);
  EXPECT_DOUBLE_EQ(bins[0].trials, 3.0);
}
