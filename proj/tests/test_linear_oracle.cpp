#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "eplab/linear_oracle.hpp"
#include "support/oracles.hpp"

using namespace eplab;

namespace {

const Params kRef{};

std::vector<double> logspace(double a, double b, int n) {
  std::vector<double> out;
  for (int i = 0; i < n; ++i) out.push_back(a * std::pow(b / a, i / (n - 1.0)));
  return out;
}

}  // namespace

TEST(Eigenvalues, ReferenceModeAgainstQuadraticFormula) {
  const auto [lp, lm] = longitudinal_eigenvalues(1.0, kRef);
  EXPECT_NEAR(lp.real(), -1.0, 1e-14);
  EXPECT_NEAR(lp.imag(), std::numbers::sqrt2, 1e-14);
  EXPECT_NEAR(lm.real(), -1.0, 1e-14);
  EXPECT_NEAR(lm.imag(), -std::numbers::sqrt2, 1e-14);
  const auto ref = oracle::quadratic_roots(1.0, 2.0, 3.0);
  EXPECT_NEAR(std::abs(lp - ref[0]), 0.0, 1e-14);
}

TEST(Eigenvalues, ZeroWavenumberDoubleRoot) {
  const auto [lp, lm] = longitudinal_eigenvalues(0.0, kRef);
  // psi_bar c rounds to 1 + 2^-52; the root is still reported as double.
  EXPECT_NEAR(lp.real(), -1.0, 1e-14);
  EXPECT_NEAR(lm.real(), -1.0, 1e-14);
  EXPECT_EQ(lp.imag(), 0.0);
  EXPECT_EQ(lm.imag(), 0.0);
}

TEST(Eigenvalues, HighWavenumberAsymptote) {
  for (double tau : {0.1, 0.5, 3.0}) {
    Params p = kRef;
    p.tau = tau;
    const auto [lp, lm] = longitudinal_eigenvalues(1e6, p);
    EXPECT_NEAR(lp.real(), -0.5 / tau, 1e-12);
  }
}

TEST(Eigenvalues, VietaAndResidualOnRandomParams) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 2000; ++i) {
    const Params p{0.1 + 3.0 * u(rng), 1.0 + 2.0 * u(rng), std::pow(10.0, -3.0 + 6.0 * u(rng)),
                   0.1 + 3.0 * u(rng)};
    const double kappa = 20.0 * u(rng);
    const auto [lp, lm] = longitudinal_eigenvalues(kappa, p);
    const double w2 = oracle_frequency_squared(kappa, p);
    EXPECT_LT(lp.real(), 0.0);
    EXPECT_LT(lm.real(), 0.0);
    EXPECT_GE(lp.real(), lm.real());
    EXPECT_NEAR((lp + lm).real(), -1.0 / p.tau, 1e-12 * (1.0 / p.tau));
    EXPECT_NEAR((lp * lm).real(), w2, 1e-12 * w2);
    EXPECT_LT(characteristic_residual(lp, kappa, p), 1e-12);
    EXPECT_LT(characteristic_residual(lm, kappa, p), 1e-12);
  }
}

TEST(Eigenvalues, PoissonCouplingSwitch) {
  const auto [lp, lm] = longitudinal_eigenvalues(0.0, kRef, {false});
  EXPECT_EQ(lp.real(), 0.0);
  EXPECT_NEAR(lm.real(), -2.0, 1e-15);
  EXPECT_NEAR(oracle_frequency_squared(1.0, kRef, {false}), 2.0, 1e-15);
}

TEST(Solenoidal, RateIsMinusInverseTau) {
  for (auto [tau, rate] : {std::pair{0.5, -2.0}, {1.0, -1.0}, {2.0, -0.5}}) {
    Params p = kRef;
    p.tau = tau;
    EXPECT_EQ(solenoidal_rate(p), rate);
  }
}

TEST(PredictedRate, Examples) {
  EXPECT_NEAR(predicted_decay_rate({{1.0, 2.0, 3.0}, false}, kRef), 1.0, 1e-14);
  EXPECT_NEAR(predicted_decay_rate({{}, true}, kRef), 2.0, 1e-14);
  Params slow = kRef;
  slow.tau = 0.1;
  const double lon = predicted_decay_rate({{1.0}, false}, slow);
  EXPECT_NEAR(predicted_decay_rate({{1.0}, true}, slow), std::min(lon, 10.0), 1e-14);
  EXPECT_THROW(predicted_decay_rate({{}, false}, kRef), EmptySet);
}

TEST(TauScaling, OracleValues) {
  const auto curve = tau_scaling_curve({0.1, 2.0}, 1.0, kRef);
  // Slow root of l^2 + 10 l + 3 = 0 by the textbook formula.
  const auto roots = oracle::quadratic_roots(1.0, 10.0, 3.0);
  EXPECT_NEAR(curve[0].mu, -roots[0].real(), 1e-12);
  EXPECT_NEAR(curve[0].mu, 0.309584240176570, 1e-14);
  EXPECT_NEAR(curve[0].mu, 0.3099, 1e-3);
  EXPECT_NEAR(curve[1].mu, 0.25, 1e-14);
  EXPECT_THROW(tau_scaling_curve({-1.0}, 1.0, kRef), RangeError);
}

TEST(TauScaling, LogLogSlopes) {
  const double small = loglog_slope(tau_scaling_curve(logspace(1e-3, 1e-2, 10), 1.0, kRef));
  const double large = loglog_slope(tau_scaling_curve(logspace(1e2, 1e3, 10), 1.0, kRef));
  EXPECT_NEAR(small, 1.0, 0.05);
  EXPECT_NEAR(large, -1.0, 0.05);
  EXPECT_THROW(loglog_slope({{1.0, 1.0}}), TooFewSamples);
}

TEST(TauScaling, SlowRootStableForTinyTau) {
  // For tau -> 0 the slow root approaches -w2 tau; the naive formula loses it.
  Params p = kRef;
  p.tau = 1e-9;
  const auto [lp, lm] = longitudinal_eigenvalues(1.0, p);
  EXPECT_NEAR(lp.real(), -3.0e-9, 1e-20);
}
