#pragma once

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <tuple>
#include <vector>

#include "eplab/spectral.hpp"

namespace eplab {

// Smooth transition 0 -> 1 on [0, 1] built from exp(-1/t), flat to all
// orders at both ends.
inline double smooth_step(double t) {
  auto g = [](double x) { return x > 0.0 ? std::exp(-1.0 / x) : 0.0; };
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  const double a = g(t);
  return a / (a + g(1.0 - t));
}

inline constexpr double kBallInner = 3.0 / 4.0;
inline constexpr double kBallOuter = 4.0 / 3.0;
inline constexpr double kShellInner = 3.0 / 4.0;
inline constexpr double kShellOuter = 8.0 / 3.0;

// Radial low-pass profile: 1 for |xi| <= 3/4, 0 for |xi| >= 4/3.
inline double chi(double r) {
  return smooth_step((kBallOuter - r) / (kBallOuter - kBallInner));
}

// Shell profile phi(xi) = chi(xi/2) - chi(xi), supported in 3/4 <= |xi| <= 8/3
// and identically 1 on 4/3 <= |xi| <= 3/2.
inline double phi(double r) { return chi(0.5 * r) - chi(r); }

// Sampled multipliers chi(k) and phi(2^-q k), q = 0..q_max, on one grid.
class DyadicCutoffs {
 public:
  explicit DyadicCutoffs(const Grid& grid) : grid_(grid) {
    const double kmax = grid.mask_kmax();
    q_max_ = -1;
    for (int q = 0; std::ldexp(kShellInner, q) < kmax; ++q) {
      for (std::size_t s = 0; s < grid.spectral_size(); ++s) {
        if (grid.in_mask(s) && phi(std::ldexp(grid.kmag(s), -q)) > 0.0) {
          q_max_ = q;
          break;
        }
      }
    }
    if (q_max_ < 0) {
      throw GridTooCoarse("no masked mode reaches the q = 0 shell; increase M");
    }
    mult_.assign(static_cast<std::size_t>(q_max_ + 2),
                 std::vector<double>(grid.spectral_size()));
    for (std::size_t s = 0; s < grid.spectral_size(); ++s) {
      const double r = grid.kmag(s);
      mult_[0][s] = chi(r);
      for (int q = 0; q <= q_max_; ++q) {
        mult_[static_cast<std::size_t>(q + 1)][s] =
            chi(std::ldexp(r, -q - 1)) - chi(std::ldexp(r, -q));
      }
    }
  }

  const Grid& grid() const noexcept { return grid_; }
  int q_max() const noexcept { return q_max_; }

  // Multiplier of block q; q = -1 is chi.
  const std::vector<double>& multiplier(int q) const {
    check_block(q);
    return mult_[static_cast<std::size_t>(q + 1)];
  }

  void check_block(int q) const {
    if (q < -1 || q > q_max_) {
      throw RangeError("block index " + std::to_string(q) + " outside [-1, " +
                       std::to_string(q_max_) + "]");
    }
  }

  // max over masked modes of |chi + sum_q phi_q - 1|.
  double partition_residual() const {
    double worst = 0.0;
    for (std::size_t s = 0; s < grid_.spectral_size(); ++s) {
      if (!grid_.in_mask(s)) continue;
      double sum = 0.0;
      for (const auto& m : mult_) sum += m[s];
      worst = std::max(worst, std::abs(sum - 1.0));
    }
    return worst;
  }

  // Copy with block q's multiplier scaled by factor. Test hook for negative
  // controls of the property suite.
  DyadicCutoffs with_scaled_block(int q, double factor) const {
    check_block(q);
    DyadicCutoffs out(*this);
    for (double& v : out.mult_[static_cast<std::size_t>(q + 1)]) v *= factor;
    return out;
  }

 private:
  Grid grid_;
  int q_max_ = -1;
  std::vector<std::vector<double>> mult_;
};

// Shared cutoffs per grid shape.
inline std::shared_ptr<const DyadicCutoffs> cutoffs_for(const Grid& grid) {
  using Key = std::tuple<int, int, double, int>;
  static std::mutex mutex;
  static std::map<Key, std::shared_ptr<const DyadicCutoffs>> cache;
  const Key key{grid.dim(), grid.points(), grid.length(), grid.retain_index()};
  std::lock_guard lock(mutex);
  auto& slot = cache[key];
  if (!slot) slot = std::make_shared<const DyadicCutoffs>(grid);
  return slot;
}

// Only (p, r) = (2, 1) is supported.
struct BesovIndex {
  double s = 0.0;
  int p = 2;
  int r = 1;

  void validate() const {
    if (p != 2 || r != 1) throw RangeError("only B^s_{2,1} is implemented");
    if (!std::isfinite(s)) throw RangeError("smoothness index must be finite");
  }
};

inline Spectrum block(const DyadicCutoffs& cut, const Spectrum& f, int q) {
  require_same_grid(cut.grid(), f.grid());
  const auto& w = cut.multiplier(q);
  Spectrum out(f.grid());
  for (std::size_t s = 0; s < f.size(); ++s) out[s] = w[s] * f[s];
  return out;
}

inline ScalarField block(const DyadicCutoffs& cut, const ScalarField& f, int q) {
  return inverse_transform(block(cut, forward_transform(f), q));
}

inline ScalarField block(const ScalarField& f, int q) {
  return block(*cutoffs_for(f.grid()), f, q);
}

// S_q f = sum_{p <= q-1} Delta_p f, 0 <= q <= q_max + 1.
inline Spectrum low_pass(const DyadicCutoffs& cut, const Spectrum& f, int q) {
  require_same_grid(cut.grid(), f.grid());
  if (q < 0 || q > cut.q_max() + 1) {
    throw RangeError("low-pass index " + std::to_string(q) + " outside [0, " +
                     std::to_string(cut.q_max() + 1) + "]");
  }
  Spectrum out(f.grid());
  for (int p = -1; p <= q - 1; ++p) {
    const auto& w = cut.multiplier(p);
    for (std::size_t s = 0; s < f.size(); ++s) out[s] += w[s] * f[s];
  }
  return out;
}

inline ScalarField low_pass(const DyadicCutoffs& cut, const ScalarField& f, int q) {
  return inverse_transform(low_pass(cut, forward_transform(f), q));
}

inline ScalarField low_pass(const ScalarField& f, int q) {
  return low_pass(*cutoffs_for(f.grid()), f, q);
}

// ||Delta_q f||_2 for q = -1..q_max (entry q + 1), straight from the
// coefficients via Parseval. Vector inputs sum the component energies.
inline std::vector<double> block_norms(const DyadicCutoffs& cut,
                                       const std::vector<const Spectrum*>& comps) {
  const Grid& g = cut.grid();
  std::vector<double> out(static_cast<std::size_t>(cut.q_max() + 2), 0.0);
  const double scale = g.cell_volume() / static_cast<double>(g.size());
  for (int q = -1; q <= cut.q_max(); ++q) {
    const auto& w = cut.multiplier(q);
    double e = 0.0;
    for (const Spectrum* f : comps) {
      require_same_grid(g, f->grid());
      for (std::size_t s = 0; s < g.spectral_size(); ++s) {
        if (w[s] != 0.0) e += g.weight(s) * std::norm(w[s] * (*f)[s]);
      }
    }
    out[static_cast<std::size_t>(q + 1)] = std::sqrt(e * scale);
  }
  return out;
}

inline std::vector<double> block_norms(const DyadicCutoffs& cut, const Spectrum& f) {
  return block_norms(cut, std::vector<const Spectrum*>{&f});
}

inline std::vector<double> block_norms(const DyadicCutoffs& cut,
                                       const std::vector<Spectrum>& v) {
  std::vector<const Spectrum*> ptrs;
  for (const auto& c : v) ptrs.push_back(&c);
  return block_norms(cut, ptrs);
}

// sum_q 2^{q s} b_q for block norms b_q indexed from q = -1.
inline double besov_sum(const std::vector<double>& norms, double s) {
  double total = 0.0;
  for (std::size_t i = 0; i < norms.size(); ++i) {
    total += std::exp2(s * (static_cast<double>(i) - 1.0)) * norms[i];
  }
  return total;
}

inline double besov_norm(const DyadicCutoffs& cut, const ScalarField& f,
                         const BesovIndex& index) {
  index.validate();
  return besov_sum(block_norms(cut, forward_transform(f)), index.s);
}

inline double besov_norm(const DyadicCutoffs& cut, const VectorField& v,
                         const BesovIndex& index) {
  index.validate();
  return besov_sum(block_norms(cut, forward_transform(v)), index.s);
}

inline double besov_norm(const ScalarField& f, const BesovIndex& index) {
  return besov_norm(*cutoffs_for(f.grid()), f, index);
}

inline double besov_norm(const VectorField& v, const BesovIndex& index) {
  return besov_norm(*cutoffs_for(v.grid()), v, index);
}

namespace detail {

// Inverse transform of a base-grid spectrum onto the padded grid.
inline ScalarField on_fine(const Spectrum& f, const Grid& fine) {
  return inverse_transform(resample(f, fine));
}

}  // namespace detail

// T_f g = sum_{q >= 1} S_{q-1} f Delta_q g, evaluated exactly on the padded
// grid. Terms with q - 1 < 0 vanish and belong to the remainder.
inline ScalarField paraproduct(const DyadicCutoffs& cut, const ScalarField& f,
                               const ScalarField& g) {
  require_same_grid(f.grid(), g.grid());
  require_same_grid(cut.grid(), f.grid());
  const Grid fine = f.grid().padded();
  const Spectrum fh = forward_transform(f);
  const Spectrum gh = forward_transform(g);
  ScalarField out(fine);
  for (int q = 1; q <= cut.q_max(); ++q) {
    out += detail::on_fine(low_pass(cut, fh, q - 1), fine) *
           detail::on_fine(block(cut, gh, q), fine);
  }
  return out;
}

// R(f, g) = sum_q Delta_q f (Delta_{q-1} + Delta_q + Delta_{q+1}) g.
inline ScalarField remainder(const DyadicCutoffs& cut, const ScalarField& f,
                             const ScalarField& g) {
  require_same_grid(f.grid(), g.grid());
  require_same_grid(cut.grid(), f.grid());
  const Grid fine = f.grid().padded();
  const Spectrum fh = forward_transform(f);
  const Spectrum gh = forward_transform(g);
  ScalarField out(fine);
  for (int q = -1; q <= cut.q_max(); ++q) {
    Spectrum near(g.grid());
    for (int p = std::max(-1, q - 1); p <= std::min(cut.q_max(), q + 1); ++p) {
      near += block(cut, gh, p);
    }
    out += detail::on_fine(block(cut, fh, q), fine) * detail::on_fine(near, fine);
  }
  return out;
}

inline ScalarField paraproduct(const ScalarField& f, const ScalarField& g) {
  return paraproduct(*cutoffs_for(f.grid()), f, g);
}

inline ScalarField remainder(const ScalarField& f, const ScalarField& g) {
  return remainder(*cutoffs_for(f.grid()), f, g);
}

// ||grad^order Delta_q f|| / ||Delta_q f||, where grad^order is the full
// tensor of derivatives of that order (Fourier symbol |k|^order).
inline double bernstein_ratio(const DyadicCutoffs& cut, const ScalarField& f, int q,
                              int order) {
  if (order < 0) throw RangeError("derivative order must be nonnegative");
  const Spectrum fh = forward_transform(f);
  const Spectrum b = block(cut, fh, q);
  const Grid& g = f.grid();
  double num = 0.0;
  double den = 0.0;
  for (std::size_t s = 0; s < g.spectral_size(); ++s) {
    const double e = g.weight(s) * std::norm(b[s]);
    den += e;
    num += e * std::pow(g.kmag(s), 2.0 * order);
  }
  if (!(den > 1e-28 * fh.energy())) {
    throw ZeroBlock("block " + std::to_string(q) + " of the field vanishes");
  }
  return std::sqrt(num / den);
}

inline double bernstein_ratio(const ScalarField& f, int q, int order) {
  return bernstein_ratio(*cutoffs_for(f.grid()), f, q, order);
}

// [u, Delta_q] . grad f = u . Delta_q grad f - Delta_q (u . grad f), with all
// products exact on the padded grid.
inline ScalarField commutator_block(const DyadicCutoffs& cut, const VectorField& u,
                                    const ScalarField& f, int q) {
  require_same_grid(u.grid(), f.grid());
  require_same_grid(cut.grid(), f.grid());
  cut.check_block(q);
  const Grid fine = f.grid().padded();
  const auto& fine_cut = *cutoffs_for(fine);
  const Spectrum fh = forward_transform(f);
  ScalarField localized(fine);
  ScalarField advect(fine);
  for (int a = 0; a < f.grid().dim(); ++a) {
    const Spectrum da = derivative(fh, a);
    const ScalarField ua = resample(u[a], fine);
    localized += ua * detail::on_fine(block(cut, da, q), fine);
    advect += ua * detail::on_fine(da, fine);
  }
  return localized - block(fine_cut, advect, q);
}

inline ScalarField commutator_block(const VectorField& u, const ScalarField& f, int q) {
  return commutator_block(*cutoffs_for(f.grid()), u, f, q);
}

}  // namespace eplab
