#include <cmath>
#include <set>

#include <gtest/gtest.h>

#include "atomgw/noise.hpp"

using namespace atomgw;

namespace {

const AtomSpecies sr = strontium87();
const double k_sr = sr.omega_a / c_light;

DetectorGeometry geometry(double delta_v) {
  DetectorGeometry g;
  g.L = 1e5;
  g.x1 = 1e4;
  g.x2 = 9e4;
  g.delta_v = delta_v;
  return g;
}

BudgetScenario working_point_budget() {
  BudgetScenario s;
  s.omega_a = sr.omega_a;
  s.mass = sr.mass;
  return s;
}

}  // namespace

TEST(RealizeNoise, ZeroConfigIsNoiseless) {
  const auto seq = make_mach_zehnder(geometry(0.0), 2, k_sr, 10.0);
  const auto r = realize_noise({}, seq, 1.0);
  for (std::size_t i = 0; i < seq.size(); ++i) {
    EXPECT_EQ(r.phase_offsets[i], 0.0);
    EXPECT_EQ(r.timing_offsets[i], 0.0);
    EXPECT_EQ(r.k_offsets[i], 0.0);
  }
  EXPECT_TRUE(r.primary.is_static());
  EXPECT_TRUE(r.secondary.is_static());
  const auto noisy = apply_noise(seq, r);
  EXPECT_EQ(noisy.sequence, seq);
}

TEST(RealizeNoise, DeterministicForSeed) {
  const auto seq = make_mach_zehnder(geometry(0.0), 3, k_sr, 10.0);
  NoiseConfig c;
  c.laser_phase_jitter = 0.5;
  c.delta_T_jitter = 1e-12;
  c.delta_k_asd = 1e-6;
  c.delta_a_asd = 1e-9;
  c.seed = 42;
  const auto a = realize_noise(c, seq, 1.0);
  const auto b = realize_noise(c, seq, 1.0);
  EXPECT_EQ(a.phase_offsets, b.phase_offsets);
  EXPECT_EQ(a.timing_offsets, b.timing_offsets);
  EXPECT_EQ(a.k_offsets, b.k_offsets);
  EXPECT_EQ(a.primary.offset(12.0), b.primary.offset(12.0));
  c.seed = 43;
  EXPECT_NE(realize_noise(c, seq, 1.0).phase_offsets, a.phase_offsets);
}

TEST(RealizeNoise, PhaseJitterHasRequestedSpread) {
  PulseSequence seq;
  seq.pulses.resize(10000);
  NoiseConfig c;
  c.laser_phase_jitter = 1.0;
  c.seed = 2024;
  const auto r = realize_noise(c, seq, 1.0);
  RunningStats s;
  for (double x : r.phase_offsets) s.add(x);
  EXPECT_NEAR(s.stats().stddev, 1.0, 0.03);
  EXPECT_NEAR(s.stats().mean, 0.0, 0.05);
}

TEST(RealizeNoise, TimingAndWavevectorAreSharedWithinFragmentAndLaser) {
  const auto seq = make_mach_zehnder(geometry(0.0), 3, k_sr, 10.0);
  NoiseConfig c;
  c.delta_T_jitter = 1e-12;
  c.delta_k_asd = 1e-6;
  c.seed = 5;
  const auto r = realize_noise(c, seq, 4.0);
  std::set<double> distinct_timing;
  for (std::size_t i = 0; i < seq.size(); ++i) {
    for (std::size_t j = 0; j < seq.size(); ++j) {
      const auto& a = seq.pulses[i];
      const auto& b = seq.pulses[j];
      if (a.fragment == b.fragment && a.source == b.source) {
        EXPECT_EQ(r.timing_offsets[i], r.timing_offsets[j]);
        EXPECT_EQ(r.k_offsets[i], r.k_offsets[j]);
      }
    }
    distinct_timing.insert(r.timing_offsets[i]);
  }
  EXPECT_GT(distinct_timing.size(), 1u);
}

TEST(RealizeNoise, RejectsNegativeAmplitudes) {
  NoiseConfig c;
  c.delta_T_jitter = -1.0;
  EXPECT_THROW(realize_noise(c, PulseSequence{}, 1.0), ValidationError);
  EXPECT_THROW(realize_noise({}, PulseSequence{}, 0.0), ValidationError);
}

TEST(SeedDerivation, TrialSeedsAreDistinct) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t t = 0; t < 1000; ++t) seen.insert(trial_seed(7, t));
  EXPECT_EQ(seen.size(), 1000u);
  EXPECT_EQ(trial_seed(7, 3), trial_seed(7, 3));
  EXPECT_NE(trial_seed(7, 3), trial_seed(8, 3));
}

TEST(NoiseTermPhase, ClosedFormExamples) {
  NoiseTermInputs in{300, 0.01, 2.70e15, 50.0, 0.01, sr.mass};
  EXPECT_NEAR(noise_term_phase(2, in, 1e-12), 2.7e-5, 0.01e-5);
  EXPECT_NEAR(noise_term_phase(3, in, two_pi * 1e5 / c_light), 6.3e-5, 0.05e-5);
  in.delta_v = 0.0;
  for (int t = 1; t <= 4; ++t) EXPECT_EQ(noise_term_phase(t, in, 1.0), 0.0);
  EXPECT_THROW(noise_term_phase(5, in, 1.0), ValidationError);
}

TEST(NoiseTermPhase, ParameterDependence) {
  const NoiseTermInputs base{10, 0.01, sr.omega_a, 20.0, 0.01, sr.mass};
  auto scaled = [&](int term, auto mutate) {
    NoiseTermInputs in = base;
    mutate(in);
    return noise_term_phase(term, in, 1.0) / noise_term_phase(term, base, 1.0);
  };
  EXPECT_DOUBLE_EQ(scaled(1, [](auto& in) { in.T *= 2; }), 4.0);
  EXPECT_DOUBLE_EQ(scaled(4, [](auto& in) { in.N *= 2; }), 4.0);
  EXPECT_DOUBLE_EQ(scaled(4, [](auto& in) { in.T *= 2; }), 2.0);
  EXPECT_DOUBLE_EQ(scaled(2, [](auto& in) { in.T *= 2; }), 1.0);
  for (int t = 1; t <= 4; ++t) EXPECT_DOUBLE_EQ(scaled(t, [](auto& in) { in.delta_v *= 3; }), 3.0);
}

TEST(BudgetReport, PaperScenarioWithinFactorTen) {
  const auto rows = budget_report(working_point_budget(), 1e-20);
  ASSERT_EQ(rows.size(), 4u);
  const double reference[4] = {1e-8, 1e-12, 1e5, 1e9};
  for (int i = 0; i < 4; ++i) {
    const double ratio = rows[i].requirement / reference[i];
    EXPECT_GT(ratio, 0.1) << "term " << i + 1;
    EXPECT_LT(ratio, 10.0) << "term " << i + 1;
    EXPECT_EQ(rows[i].term, i + 1);
  }
  EXPECT_STREQ(rows[0].unit, "g/sqrt(Hz)");
  EXPECT_STREQ(rows[1].unit, "s");
  EXPECT_NEAR(rows[0].phase_noise, 4.0 * 300 * sr.omega_a * 1e-20 * 1e6 / c_light, 1e-18);
}

TEST(BudgetReport, ExponentsAndFrequencyScaling) {
  auto s = working_point_budget();
  s.T = 0.0;  // antenna corner at each frequency
  s.frequency_hz = 0.01;
  const auto lo = budget_report(s, 1e-20);
  s.frequency_hz = 0.02;
  const auto hi = budget_report(s, 1e-20);
  const int expected[4] = {2, 0, 0, 1};
  for (int i = 0; i < 4; ++i) {
    EXPECT_EQ(lo[i].exponent, expected[i]);
    EXPECT_NEAR(hi[i].requirement / lo[i].requirement, std::pow(2.0, expected[i]), 1e-12);
  }
}

TEST(BudgetReport, RejectsBadInputs) {
  EXPECT_THROW(budget_report(working_point_budget(), 0.0), ValidationError);
  auto s = working_point_budget();
  s.frequency_hz = -1.0;
  EXPECT_THROW(budget_report(s, 1e-20), ValidationError);
}

TEST(Cancellation, LaserPhaseNoiseIsCommonMode) {
  const auto geo = geometry(0.0);
  const auto seq = make_mach_zehnder(geo, 2, k_sr, 10.0);
  NoiseConfig c;
  c.laser_phase_jitter = 1.0;
  c.seed = 11;
  const auto s = cancellation_experiment(seq, geo, sr, {}, {}, c, 50);
  EXPECT_GE(s.single_first.stddev, 1.0);
  EXPECT_LT(s.differential.stddev, 1e-9);
  EXPECT_EQ(s.differential.count, 50u);
  EXPECT_EQ(s.differential_samples.size(), 50u);
}

TEST(Cancellation, LargeOffsetsStillCancel) {
  const auto geo = geometry(0.0);
  const auto seq = make_mach_zehnder(geo, 2, k_sr, 10.0);
  NoiseConfig c;
  c.laser_phase_jitter = 1e3;
  c.seed = 3;
  const auto s = cancellation_experiment(seq, geo, sr, {}, {}, c, 10);
  EXPECT_GT(s.single_first.stddev, 100.0);
  EXPECT_LT(s.differential.stddev, 1e-12 * s.single_first.stddev + 1e-12);
}

TEST(Cancellation, TimingJitterMatchesClosedFormOrder) {
  const auto geo = geometry(0.01);
  const int N = 2;
  const auto seq = make_mach_zehnder(geo, N, k_sr, 10.0);
  NoiseConfig c;
  c.delta_T_jitter = 1e-12;
  c.seed = 99;
  const auto s = cancellation_experiment(seq, geo, sr, {}, {}, c, 200);
  const NoiseTermInputs in{N, geo.delta_v, sr.omega_a, 10.0, 0.0, sr.mass};
  const double predicted = noise_term_phase(2, in, c.delta_T_jitter);
  EXPECT_GT(s.differential.stddev, predicted / 10.0);
  EXPECT_LT(s.differential.stddev, predicted * 10.0);
}

TEST(Cancellation, RejectsZeroTrials) {
  const auto geo = geometry(0.0);
  const auto seq = make_mach_zehnder(geo, 1, k_sr, 10.0);
  EXPECT_THROW(cancellation_experiment(seq, geo, sr, {}, {}, {}, 0), ValidationError);
}

TEST(FitPowerLaw, RecoversExponentAndPrefactor) {
  const std::vector<double> x = {1, 2, 4, 8, 16};
  std::vector<double> y;
  for (double v : x) y.push_back(3.0 * v * v);
  const auto f = fit_power_law(x, y);
  EXPECT_NEAR(f.exponent, 2.0, 1e-12);
  EXPECT_NEAR(f.prefactor, 3.0, 1e-12);
  EXPECT_THROW(fit_power_law({1.0}, {1.0}), ValidationError);
  EXPECT_THROW(fit_power_law({1.0, 1.0}, {1.0, 2.0}), ValidationError);
  EXPECT_THROW(fit_power_law({1.0, 2.0}, {1.0, -2.0}), ValidationError);
}

TEST(RunningStats, MatchesTwoPassFormula) {
  RunningStats s;
  for (double x : {2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0}) s.add(x);
  EXPECT_DOUBLE_EQ(s.stats().mean, 5.0);
  EXPECT_NEAR(s.stats().stddev, std::sqrt(32.0 / 7.0), 1e-14);
}
