#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "eplab/littlewood_paley.hpp"
#include "eplab/model.hpp"

using namespace eplab;

namespace {

// Gaussian coefficients on every masked mode.
ScalarField masked_random(const Grid& g, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return inverse_transform(detail::random_spectrum(g, rng, 0.0, 1e300));
}

ScalarField diagonal_mode(const Grid& g) {
  return ScalarField::from_function(g, [](const auto& x) { return std::cos(2 * x[0] + 2 * x[1]); });
}

}  // namespace

TEST(Cutoffs, ProfileValues) {
  EXPECT_EQ(chi(0.0), 1.0);
  EXPECT_EQ(chi(0.75), 1.0);
  EXPECT_EQ(chi(4.0 / 3.0), 0.0);
  EXPECT_EQ(chi(2.0), 0.0);
  for (double r = 0.0; r < 4.0; r += 0.01) {
    EXPECT_GE(chi(r), 0.0);
    EXPECT_LE(chi(r), 1.0);
    EXPECT_GE(phi(r), 0.0);
    EXPECT_LE(phi(r), 1.0);
    if (r <= 0.75 || r >= 8.0 / 3.0) EXPECT_EQ(phi(r), 0.0) << r;
    if (r >= 4.0 / 3.0 && r <= 1.5) EXPECT_EQ(phi(r), 1.0) << r;
  }
  // Smooth step is monotone and symmetric about 1/2.
  for (double t = 0.01; t < 1.0; t += 0.01) {
    EXPECT_NEAR(smooth_step(t) + smooth_step(1.0 - t), 1.0, 1e-15);
    EXPECT_GE(smooth_step(t + 0.005), smooth_step(t));
  }
}

TEST(Cutoffs, PartitionAndRange) {
  for (int m : {16, 32, 128}) {
    const Grid g(2, m);
    const DyadicCutoffs cut(g);
    EXPECT_LE(cut.partition_residual(), 1e-14);
    // q_max is the last shell that touches the masked lattice.
    bool touches = false;
    bool beyond = false;
    for (std::size_t s = 0; s < g.spectral_size(); ++s) {
      if (!g.in_mask(s)) continue;
      touches |= phi(std::ldexp(g.kmag(s), -cut.q_max())) > 0.0;
      beyond |= phi(std::ldexp(g.kmag(s), -cut.q_max() - 1)) > 0.0;
    }
    EXPECT_TRUE(touches);
    EXPECT_FALSE(beyond);
    EXPECT_THROW(cut.multiplier(cut.q_max() + 1), RangeError);
    EXPECT_THROW(cut.multiplier(-2), RangeError);
  }
  EXPECT_EQ(DyadicCutoffs(Grid(2, 128)).q_max(), 6);
}

TEST(Cutoffs, CorruptedBlockBreaksPartition) {
  const DyadicCutoffs cut(Grid(2, 32));
  EXPECT_GT(cut.with_scaled_block(1, 1.01).partition_residual(), 1e-3);
}

TEST(Blocks, ConstantLivesInLowBlock) {
  const Grid g(2, 32);
  const auto f = ScalarField::constant(g, 3.0);
  const DyadicCutoffs cut(g);
  EXPECT_LT((block(cut, f, -1) - f).max_abs(), 1e-14);
  for (int q = 0; q <= cut.q_max(); ++q) EXPECT_LT(block(cut, f, q).max_abs(), 1e-14);
}

TEST(Blocks, PlateauModeInBlockOne) {
  const Grid g(2, 32);
  const DyadicCutoffs cut(g);
  const ScalarField f = diagonal_mode(g);
  for (int q = -1; q <= cut.q_max(); ++q) {
    const double err = q == 1 ? (block(cut, f, q) - f).max_abs() : block(cut, f, q).max_abs();
    EXPECT_LT(err, 1e-14) << q;
  }
  EXPECT_LT(low_pass(cut, f, 1).max_abs(), 1e-14);
}

TEST(Blocks, SupportOfEachBlock) {
  const Grid g(2, 64);
  const DyadicCutoffs cut(g);
  const Spectrum f = forward_transform(masked_random(g, 4));
  for (int q = -1; q <= cut.q_max(); ++q) {
    const Spectrum b = block(cut, f, q);
    for (std::size_t s = 0; s < b.size(); ++s) {
      if (b[s] == Complex(0.0)) continue;
      const double k = g.kmag(s);
      if (q < 0) {
        EXPECT_LT(k, 4.0 / 3.0);
      } else {
        EXPECT_GT(k, 0.75 * std::ldexp(1.0, q));
        EXPECT_LT(k, 8.0 / 3.0 * std::ldexp(1.0, q));
      }
    }
  }
}

TEST(Blocks, ReconstructionAndLowPass) {
  const Grid g(3, 16);
  const DyadicCutoffs cut(g);
  const ScalarField f = masked_random(g, 6);
  ScalarField sum(g);
  for (int q = -1; q <= cut.q_max(); ++q) sum += block(cut, f, q);
  EXPECT_LT((sum - f).l2_norm(), 1e-12 * f.l2_norm());
  EXPECT_LT((low_pass(cut, f, 0) - block(cut, f, -1)).max_abs(), 1e-14);
  EXPECT_LT((low_pass(cut, f, cut.q_max() + 1) - f).l2_norm(), 1e-12 * f.l2_norm());
  for (int q = 0; q <= cut.q_max(); ++q) {
    ScalarField rest = low_pass(cut, f, q);
    for (int p = q; p <= cut.q_max(); ++p) rest += block(cut, f, p);
    EXPECT_LT((rest - f).l2_norm(), 1e-12 * f.l2_norm());
  }
  EXPECT_THROW(low_pass(cut, f, cut.q_max() + 2), RangeError);
  EXPECT_THROW(low_pass(cut, f, -1), RangeError);
}

TEST(Blocks, AlmostOrthogonality) {
  const Grid g(2, 128);
  const DyadicCutoffs cut(g);
  const Spectrum f = forward_transform(masked_random(g, 7));
  for (int q = -1; q <= cut.q_max(); ++q) {
    for (int p = q + 2; p <= cut.q_max(); ++p) {
      EXPECT_LE(block(cut, block(cut, f, q), p).l2_norm(), 1e-12 * f.l2_norm());
    }
  }
}

TEST(Besov, ClosedFormSingleBlock) {
  const Grid g(2, 32);
  EXPECT_EQ(besov_norm(ScalarField(g), BesovIndex{2.0}), 0.0);
  // Complex mode e^{i(2x+2y)} has L2 norm 2 pi; its real part has 2 pi / sqrt 2.
  const ScalarField f = diagonal_mode(g);
  const double expect = 4.0 * 2.0 * std::numbers::pi / std::numbers::sqrt2;
  EXPECT_NEAR(besov_norm(f, BesovIndex{2.0}), expect, 1e-12 * expect);
  EXPECT_NEAR(besov_norm(f, BesovIndex{2.0}) * std::numbers::sqrt2, 25.132741228718345, 1e-10);
}

TEST(Besov, HomogeneityAndTriangle) {
  const Grid g(2, 64);
  const BesovIndex s{2.0};
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const ScalarField f = masked_random(g, seed);
    const ScalarField h = masked_random(g, seed + 100);
    EXPECT_NEAR(besov_norm(-2.5 * f, s), 2.5 * besov_norm(f, s), 1e-12 * besov_norm(f, s));
    EXPECT_LE(besov_norm(f + h, s), besov_norm(f, s) + besov_norm(h, s));
  }
}

TEST(Besov, RejectsOtherIndices) {
  const Grid g(2, 16);
  EXPECT_THROW(besov_norm(ScalarField(g), BesovIndex{1.0, 3, 1}), RangeError);
  EXPECT_THROW(besov_norm(ScalarField(g), BesovIndex{1.0, 2, 2}), RangeError);
}

TEST(Bony, ReconstructionOnRandomFields) {
  for (int dim : {2, 3}) {
    const Grid g(dim, dim == 2 ? 64 : 16);
    const DyadicCutoffs cut(g);
    const ScalarField f = masked_random(g, 30);
    const ScalarField h = masked_random(g, 31);
    const ScalarField exact = exact_product(f, h);
    const ScalarField split = paraproduct(cut, f, h) + paraproduct(cut, h, f) + remainder(cut, f, h);
    EXPECT_LE((split - exact).l2_norm(), 1e-10 * exact.l2_norm());
  }
}

TEST(Bony, ConstantFactor) {
  const Grid g(2, 32);
  const DyadicCutoffs cut(g);
  const ScalarField c = ScalarField::constant(g, 1.7);
  const ScalarField h = masked_random(g, 2);
  const ScalarField split = paraproduct(cut, c, h) + paraproduct(cut, h, c) + remainder(cut, c, h);
  EXPECT_LE((resample(split, g) - 1.7 * h).l2_norm(), 1e-12 * h.l2_norm());
}

TEST(Bony, ParaproductSpectralLocalization) {
  const Grid g(2, 128);
  const DyadicCutoffs cut(g);
  const Grid fine = g.padded();
  const DyadicCutoffs fine_cut(fine);
  const Spectrum f = forward_transform(masked_random(g, 40));
  const Spectrum h = forward_transform(masked_random(g, 41));
  for (int p = 1; p <= cut.q_max(); ++p) {
    const ScalarField prod = inverse_transform(resample(low_pass(cut, f, p - 1), fine)) *
                             inverse_transform(resample(block(cut, h, p), fine));
    const auto norms = block_norms(fine_cut, forward_transform(prod));
    for (int q = -1; q <= fine_cut.q_max(); ++q) {
      if (std::abs(p - q) >= 5) EXPECT_LE(norms[q + 1], 1e-12) << p << " " << q;
    }
  }
}

TEST(Bernstein, PureModeRatio) {
  const Grid g(2, 32);
  EXPECT_NEAR(bernstein_ratio(diagonal_mode(g), 1, 1), 2.0 * std::numbers::sqrt2, 1e-12);
  EXPECT_NEAR(bernstein_ratio(diagonal_mode(g), 1, 2), 8.0, 1e-12);
  EXPECT_THROW(bernstein_ratio(diagonal_mode(g), 3, 1), ZeroBlock);
}

TEST(Bernstein, ShellBounds) {
  const Grid g(2, 128);
  const DyadicCutoffs cut(g);
  const ScalarField f = masked_random(g, 50);
  for (int q = 0; q <= cut.q_max(); ++q) {
    for (int order = 1; order <= 3; ++order) {
      const double r = bernstein_ratio(cut, f, q, order);
      EXPECT_GE(r, std::pow(0.75 * std::ldexp(1.0, q), order));
      EXPECT_LE(r, std::pow(8.0 / 3.0 * std::ldexp(1.0, q), order));
    }
  }
  EXPECT_LE(bernstein_ratio(cut, f, -1, 1), 4.0 / 3.0);
}

TEST(Commutator, ConstantVelocityCommutes) {
  const Grid g(2, 32);
  VectorField u(g);
  u[0] = ScalarField::constant(g, 0.3);
  u[1] = ScalarField::constant(g, -1.1);
  const ScalarField f = masked_random(g, 60);
  for (int q = -1; q <= 3; ++q) EXPECT_LT(commutator_block(u, f, q).max_abs(), 1e-12);
}

TEST(Commutator, MatchesDefinition) {
  // u = grad f for a single mode f: evaluate u . Delta_q grad f and
  // Delta_q(u . grad f) directly from the trigonometric data.
  const Grid g(2, 32);
  const auto f = ScalarField::from_function(g, [](const auto& x) { return std::sin(3 * x[0]); });
  const VectorField u = gradient(f);
  // f lives in block 1 (|k| = 3) only, so u . Delta_1 grad f = |grad f|^2 and
  // Delta_1(|grad f|^2) = Delta_1(9/2 + 9/2 cos 6x) = 0 since |k| = 6 is in block 2.
  const auto expect = ScalarField::from_function(g, [](const auto& x) {
    const double c = 3 * std::cos(3 * x[0]);
    return c * c;
  });
  const ScalarField r1 = commutator_block(u, f, 1);
  EXPECT_LT((resample(r1, g) - expect).max_abs(), 1e-12);
  // Block 2 sees only the cos 6x part of u . grad f, with a minus sign.
  const auto expect2 = ScalarField::from_function(g, [](const auto& x) {
    return -4.5 * std::cos(6 * x[0]) * phi(6.0 / 4.0);
  });
  EXPECT_LT((resample(commutator_block(u, f, 2), g) - expect2).max_abs(), 1e-12);
}

TEST(Commutator, StableUnderRefinement) {
  auto measure = [](int m) {
    const Grid g(2, m);
    const DyadicCutoffs cut(g);
    VectorField u(g);
    u[0] = ScalarField::from_function(g, [](const auto& x) { return std::sin(x[1]) + 0.5 * std::cos(2 * x[0]); });
    u[1] = ScalarField::from_function(g, [](const auto& x) { return std::cos(3 * x[0] - x[1]); });
    const auto f = ScalarField::from_function(
        g, [](const auto& x) { return std::sin(4 * x[0] + x[1]) + std::cos(2 * x[1]); });
    double total = 0.0;
    for (int q = -1; q <= cut.q_max(); ++q) {
      total += std::exp2(2.0 * q) * commutator_block(cut, u, f, q).l2_norm();
    }
    return total;
  };
  const double coarse = measure(32);
  const double fine = measure(64);
  EXPECT_GT(coarse, 0.0);
  EXPECT_NEAR(coarse, fine, 1e-10 * fine);
}
