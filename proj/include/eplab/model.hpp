#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "eplab/params.hpp"
#include "eplab/spectral.hpp"

namespace eplab {

// (n - nbar, u, e): density perturbation, velocity and electric field
// grad Phi. The background is kept out of the stored field so that updates
// round relative to the perturbation, not to nbar.
struct PrimitiveState {
  ScalarField dn;
  VectorField u;
  VectorField e;

  ScalarField density(const Params& p) const {
    ScalarField n = dn;
    for (double& v : n) v += p.nbar;
    return n;
  }
};

// (m, u, e). m is the scaled sound-speed perturbation on the isentropic
// branch and sqrt(A) ln(n / nbar) on the isothermal one.
struct SymmetricState {
  ScalarField m;
  VectorField u;
  VectorField e;

  static SymmetricState equilibrium(const Grid& g) {
    return {ScalarField(g), VectorField(g), VectorField(g)};
  }
};

struct Tendencies {
  ScalarField m_t;
  VectorField u_t;
  VectorField e_t;
};

struct PrimitiveTendencies {
  ScalarField n_t;
  VectorField u_t;
  VectorField e_t;
};

struct ModelOptions {
  // Drop every quadratic and higher term (advection, pressure nonlinearity,
  // nonlinear flux). Used for exact linear test runs.
  bool linear = false;
};

// Pointwise maps. The isentropic forms are written through expm1/log1p so
// they are exact at equilibrium and accurate for small perturbations.
namespace pointwise {

inline double h(double m, const Params& p) {
  if (p.isothermal()) return p.nbar * std::expm1(m / std::sqrt(p.A));
  return p.nbar * std::expm1((2.0 / (p.gamma - 1.0)) * std::log1p(p.kappa() * m / p.psi_bar()));
}

inline double h_prime(double m, const Params& p) {
  if (p.isothermal()) return p.nbar / std::sqrt(p.A) * std::exp(m / std::sqrt(p.A));
  return p.nbar / p.psi_bar() *
         std::pow(1.0 + p.kappa() * m / p.psi_bar(), (3.0 - p.gamma) / (p.gamma - 1.0));
}

// m of a density perturbation dn = n - nbar; inverse of h.
inline double symmetric_of(double dn, const Params& p) {
  if (p.isothermal()) return std::sqrt(p.A) * std::log1p(dn / p.nbar);
  return p.psi_bar() / p.kappa() * std::expm1(p.kappa() * std::log1p(dn / p.nbar));
}

inline bool in_domain(double m, const Params& p) {
  return p.isothermal() || p.kappa() * m + p.psi_bar() > 0.0;
}

}  // namespace pointwise

namespace detail {

inline void require_domain(const ScalarField& m, const Params& p) {
  if (p.isothermal()) return;
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (!pointwise::in_domain(m[i], p)) {
      throw DomainViolation("(gamma-1)/2 m + psi_bar <= 0", i);
    }
  }
}

inline void require_positive(const ScalarField& n, double offset = 0.0) {
  for (std::size_t i = 0; i < n.size(); ++i) {
    if (!(offset + n[i] > 0.0)) throw NonPositiveDensity("density n <= 0", i);
  }
}

}  // namespace detail

// psi(n) = sqrt(p'(n)) = sqrt(A gamma n^(gamma-1)).
inline ScalarField sound_speed(const ScalarField& n, const Params& p) {
  detail::require_positive(n);
  return n.map([&](double v) { return std::sqrt(p.A * p.gamma * std::pow(v, p.gamma - 1.0)); });
}

inline ScalarField h_of(const ScalarField& m, const Params& p) {
  detail::require_domain(m, p);
  return m.map([&](double v) { return pointwise::h(v, p); });
}

inline SymmetricState to_symmetric(const PrimitiveState& s, const Params& p) {
  detail::require_positive(s.dn, p.nbar);
  return {s.dn.map([&](double v) { return pointwise::symmetric_of(v, p); }), s.u, s.e};
}

inline PrimitiveState from_symmetric(const SymmetricState& s, const Params& p) {
  return {h_of(s.m, p), s.u, s.e};
}

// Tendencies of the symmetrized system
//   m_t = -psi_bar div u - u.grad m - (gamma-1)/2 m div u
//   u_t = -psi_bar grad m - u/tau - u.grad u - (gamma-1)/2 m grad m + e
//   e_t = -grad Delta^{-1} div {(h(m) + nbar) u}
// with every nonlinear product filtered to the dealias mask. On the
// isothermal branch the (gamma-1)/2 terms vanish.
inline Tendencies rhs_symmetric(const SymmetricState& st, const Params& p,
                                const ModelOptions& opt = {}) {
  const Grid& g = st.m.grid();
  const int dim = g.dim();
  const double psi = p.psi_bar();
  const double kappa = p.kappa();
  const double inv_tau = 1.0 / p.tau;

  // Derivatives are taken on the mask only, so every tendency stays inside it
  // and the fastest linear frequency is psi_bar * mask_kmax.
  const Spectrum mh = dealias(forward_transform(st.m));
  std::vector<Spectrum> uh = forward_transform(st.u);
  for (auto& c : uh) c = dealias(std::move(c));

  VectorField grad_m(g);
  for (int a = 0; a < dim; ++a) grad_m[a] = inverse_transform(derivative(mh, a));

  // du[a][b] = d_b u_a
  std::vector<std::vector<ScalarField>> du(static_cast<std::size_t>(dim));
  ScalarField div_u(g);
  for (int a = 0; a < dim; ++a) {
    for (int b = 0; b < dim; ++b) {
      du[a].push_back(inverse_transform(derivative(uh[static_cast<std::size_t>(a)], b)));
    }
    div_u += du[a][a];
  }

  Tendencies out{(-psi) * div_u, VectorField(g), VectorField(g)};
  for (int a = 0; a < dim; ++a) {
    ScalarField& ut = out.u_t[a];
    ut = (-psi) * grad_m[a];
    ut.axpy(-inv_tau, st.u[a]);
    ut += st.e[a];
  }

  if (opt.linear) {
    std::vector<Spectrum> flux = uh;
    for (auto& f : flux) f *= p.nbar;
    out.e_t = inverse_transform(riesz_div_projection(flux));
    out.e_t *= -1.0;
    return out;
  }

  // Advective and (gamma-1)/2 terms of the m and u equations.
  ScalarField nl(g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    double s = kappa * st.m[i] * div_u[i];
    for (int a = 0; a < dim; ++a) s += st.u[a][i] * grad_m[a][i];
    nl[i] = s;
  }
  out.m_t -= inverse_transform(dealias(forward_transform(nl)));

  for (int a = 0; a < dim; ++a) {
    for (std::size_t i = 0; i < g.size(); ++i) {
      double s = kappa * st.m[i] * grad_m[a][i];
      for (int b = 0; b < dim; ++b) s += st.u[b][i] * du[a][b][i];
      nl[i] = s;
    }
    out.u_t[a] -= inverse_transform(dealias(forward_transform(nl)));
  }

  const ScalarField h = h_of(st.m, p);
  std::vector<Spectrum> flux;
  for (int a = 0; a < dim; ++a) {
    Spectrum f = dealias(forward_transform(h * st.u[a]));
    for (std::size_t s = 0; s < f.size(); ++s) f[s] += p.nbar * uh[static_cast<std::size_t>(a)][s];
    flux.push_back(std::move(f));
  }
  out.e_t = inverse_transform(riesz_div_projection(flux));
  out.e_t *= -1.0;
  return out;
}

// Tendencies of the original system
//   n_t = -div(n u)
//   u_t = -u.grad u - grad p(n)/n + e - u/tau
//   e_t = -grad Delta^{-1} div(n u)
// written for the perturbation n - nbar, with the flux split as nbar u + (n - nbar) u.
inline PrimitiveTendencies rhs_primitive(const PrimitiveState& st, const Params& p,
                                         const ModelOptions& opt = {}) {
  detail::require_positive(st.dn, p.nbar);
  const Grid& g = st.dn.grid();
  const int dim = g.dim();
  const double inv_tau = 1.0 / p.tau;

  const Spectrum nh = forward_transform(st.dn);
  const auto uh = forward_transform(st.u);
  VectorField grad_n(g);
  for (int a = 0; a < dim; ++a) grad_n[a] = inverse_transform(derivative(nh, a));

  PrimitiveTendencies out{ScalarField(g), VectorField(g), VectorField(g)};

  if (opt.linear) {
    const double dp = p.A * p.gamma * std::pow(p.nbar, p.gamma - 2.0);
    std::vector<Spectrum> flux = uh;
    for (auto& f : flux) f *= p.nbar;
    out.n_t = inverse_transform(divergence(flux));
    out.n_t *= -1.0;
    for (int a = 0; a < dim; ++a) {
      out.u_t[a] = (-dp) * grad_n[a];
      out.u_t[a].axpy(-inv_tau, st.u[a]);
      out.u_t[a] += st.e[a];
    }
    out.e_t = inverse_transform(riesz_div_projection(flux));
    out.e_t *= -1.0;
    return out;
  }

  std::vector<Spectrum> flux;
  for (int a = 0; a < dim; ++a) {
    Spectrum f = dealias(forward_transform(st.dn * st.u[a]));
    for (std::size_t s = 0; s < f.size(); ++s) f[s] += p.nbar * uh[static_cast<std::size_t>(a)][s];
    flux.push_back(std::move(f));
  }
  out.n_t = inverse_transform(divergence(flux));
  out.n_t *= -1.0;
  out.e_t = inverse_transform(riesz_div_projection(flux));
  out.e_t *= -1.0;

  // p'(n) / n = A gamma n^(gamma-2)
  const ScalarField dp =
      st.dn.map([&](double v) { return p.A * p.gamma * std::pow(p.nbar + v, p.gamma - 2.0); });
  ScalarField nl(g);
  for (int a = 0; a < dim; ++a) {
    std::vector<ScalarField> du;
    for (int b = 0; b < dim; ++b) du.push_back(inverse_transform(derivative(uh[static_cast<std::size_t>(a)], b)));
    for (std::size_t i = 0; i < g.size(); ++i) {
      double s = dp[i] * grad_n[a][i];
      for (int b = 0; b < dim; ++b) s += st.u[b][i] * du[static_cast<std::size_t>(b)][i];
      nl[i] = s;
    }
    out.u_t[a] = inverse_transform(dealias(forward_transform(nl)));
    out.u_t[a] *= -1.0;
    out.u_t[a].axpy(-inv_tau, st.u[a]);
    out.u_t[a] += st.e[a];
  }
  return out;
}

// ||div e - h(m)||_2 / (1 + ||h(m)||_2).
inline double constraint_residual(const SymmetricState& st, const Params& p) {
  const ScalarField h = h_of(st.m, p);
  return (divergence(st.e) - h).l2_norm() / (1.0 + h.l2_norm());
}

// Right-hand side of the vorticity balance implied by the u equation,
//   omega_t = -omega/tau - u.grad omega - omega div u + omega.grad u,
// the last term only in 3-D. Every product is dealiased.
inline VectorField vorticity_tendency(const SymmetricState& st, const Params& p,
                                      const ModelOptions& opt = {}) {
  const Grid& g = st.u.grid();
  const int dim = g.dim();
  VectorField w = curl(st.u);
  VectorField out = (-1.0 / p.tau) * w;
  if (opt.linear) return out;
  const ScalarField div_u = divergence(st.u);
  for (int c = 0; c < w.components(); ++c) {
    const VectorField grad_w = gradient(w[c]);
    ScalarField nl(g);
    for (std::size_t i = 0; i < g.size(); ++i) {
      double s = w[c][i] * div_u[i];
      for (int b = 0; b < dim; ++b) s += st.u[b][i] * grad_w[b][i];
      nl[i] = s;
    }
    if (dim == 3) {
      const VectorField grad_uc = gradient(st.u[c]);
      for (std::size_t i = 0; i < g.size(); ++i) {
        for (int b = 0; b < 3; ++b) nl[i] -= w[b][i] * grad_uc[b][i];
      }
    }
    out[c] -= dealias(nl);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Initial data

enum class InitTarget { m, n, u_longitudinal, u_solenoidal };

inline std::string to_string(InitTarget t) {
  switch (t) {
    case InitTarget::m: return "m";
    case InitTarget::n: return "n";
    case InitTarget::u_longitudinal: return "u-longitudinal";
    case InitTarget::u_solenoidal: return "u-solenoidal";
  }
  return "?";
}

inline std::optional<InitTarget> parse_target(const std::string& s) {
  if (s == "m") return InitTarget::m;
  if (s == "n") return InitTarget::n;
  if (s == "u-longitudinal") return InitTarget::u_longitudinal;
  if (s == "u-solenoidal") return InitTarget::u_solenoidal;
  return std::nullopt;
}

// A single Fourier mode: amplitude cos(k.x) for m and n - nbar,
// amplitude sin(k.x) k/|k| (longitudinal) or sin(k.x) k_perp/|k| (solenoidal)
// for u. The wavevector is in integer lattice units.
struct ModeSpec {
  InitTarget target = InitTarget::m;
  std::array<int, 3> wavevector{0, 0, 0};
  double amplitude = 0.0;

  friend bool operator==(const ModeSpec&, const ModeSpec&) = default;
};

// Gaussian random coefficients on band_min <= |k| <= band_max (physical
// wavenumbers, restricted to the dealias mask), rescaled to the given RMS
// amplitude.
struct RandomSpec {
  InitTarget target = InitTarget::m;
  std::uint64_t seed = 0;
  double amplitude = 0.0;
  double band_min = 1.0;
  double band_max = 4.0;

  friend bool operator==(const RandomSpec&, const RandomSpec&) = default;
};

struct InitSpec {
  std::vector<ModeSpec> modes;
  std::vector<RandomSpec> random;

  friend bool operator==(const InitSpec&, const InitSpec&) = default;
};

namespace detail {

inline std::array<double, 3> perpendicular(const std::array<double, 3>& k, int dim) {
  if (dim == 2) return {-k[1], k[0], 0.0};
  int axis = 0;
  for (int a = 1; a < 3; ++a) {
    if (std::abs(k[a]) < std::abs(k[axis])) axis = a;
  }
  std::array<double, 3> e{0.0, 0.0, 0.0};
  e[axis] = 1.0;
  std::array<double, 3> out{k[1] * e[2] - k[2] * e[1], k[2] * e[0] - k[0] * e[2],
                            k[0] * e[1] - k[1] * e[0]};
  const double norm = std::sqrt(out[0] * out[0] + out[1] * out[1] + out[2] * out[2]);
  const double kn = std::sqrt(k[0] * k[0] + k[1] * k[1] + k[2] * k[2]);
  for (double& v : out) v *= kn / norm;
  return out;
}

inline Spectrum random_spectrum(const Grid& g, std::mt19937_64& rng, double kmin, double kmax) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Spectrum c(g);
  for (std::size_t s = 0; s < g.spectral_size(); ++s) {
    const double re = normal(rng);
    const double im = normal(rng);
    if (g.in_mask(s) && g.kmag(s) > 0.0 && g.kmag(s) >= kmin && g.kmag(s) <= kmax) {
      c[s] = Complex(re, im);
    }
  }
  // Round trip through physical space to enforce Hermitian symmetry.
  return dealias(forward_transform(inverse_transform(c)));
}

inline double rms(const ScalarField& f) { return f.l2_norm() / std::sqrt(f.grid().volume()); }
inline double rms(const VectorField& v) { return v.l2_norm() / std::sqrt(v.grid().volume()); }

// Solves mean(h(m + s)) = 0 for the constant s by Newton iteration.
inline double mass_neutral_shift(const ScalarField& m, const Params& p) {
  double s = 0.0;
  for (int it = 0; it < 60; ++it) {
    double f = 0.0;
    double df = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i) {
      if (!pointwise::in_domain(m[i] + s, p)) {
        throw DomainViolation("initial data leaves the domain of h", i);
      }
      f += pointwise::h(m[i] + s, p);
      df += pointwise::h_prime(m[i] + s, p);
    }
    const double step = f / df;
    s -= step;
    if (std::abs(step) <= 1e-17 * (1.0 + std::abs(s))) break;
  }
  return s;
}

}  // namespace detail

// Builds (m, u, e) from an initial-data description. m and u are dealiased;
// a constant is added to m so that mean(n - nbar) = mean(h(m)) = 0, and e is
// grad Delta^{-1} h(m), so div e = h(m) holds at t = 0.
inline SymmetricState compatible_init(const InitSpec& spec, const Params& p, const Grid& g) {
  p.validate();
  const int dim = g.dim();
  ScalarField m(g);
  ScalarField dn(g);
  VectorField u(g);
  bool has_density = false;

  for (const auto& mode : spec.modes) {
    std::array<double, 3> k{0.0, 0.0, 0.0};
    double k2 = 0.0;
    for (int a = 0; a < dim; ++a) {
      k[a] = g.fundamental() * mode.wavevector[a];
      k2 += k[a] * k[a];
    }
    if (k2 == 0.0) throw ConfigError("wavevector", "mode wavevector must be nonzero");
    const double kn = std::sqrt(k2);
    auto phase = [&](const std::array<double, 3>& x) {
      return k[0] * x[0] + k[1] * x[1] + k[2] * x[2];
    };
    const double amp = mode.amplitude;
    switch (mode.target) {
      case InitTarget::m:
        m += ScalarField::from_function(g, [&](const auto& x) { return amp * std::cos(phase(x)); });
        break;
      case InitTarget::n:
        has_density = true;
        dn += ScalarField::from_function(g, [&](const auto& x) { return amp * std::cos(phase(x)); });
        break;
      case InitTarget::u_longitudinal:
      case InitTarget::u_solenoidal: {
        const auto dir = mode.target == InitTarget::u_longitudinal ? k : detail::perpendicular(k, dim);
        for (int a = 0; a < dim; ++a) {
          const double w = amp * dir[a] / kn;
          u[a] += ScalarField::from_function(g, [&](const auto& x) { return w * std::sin(phase(x)); });
        }
        break;
      }
    }
  }

  for (const auto& r : spec.random) {
    std::mt19937_64 rng(r.seed);
    if (r.target == InitTarget::m || r.target == InitTarget::n) {
      ScalarField f = inverse_transform(detail::random_spectrum(g, rng, r.band_min, r.band_max));
      const double norm = detail::rms(f);
      if (norm > 0.0) f *= r.amplitude / norm;
      if (r.target == InitTarget::m) {
        m += f;
      } else {
        dn += f;
        has_density = true;
      }
      continue;
    }
    std::vector<Spectrum> v;
    for (int a = 0; a < dim; ++a) v.push_back(detail::random_spectrum(g, rng, r.band_min, r.band_max));
    std::vector<Spectrum> lon = riesz_div_projection(v);
    if (r.target == InitTarget::u_solenoidal) {
      for (int a = 0; a < dim; ++a) {
        for (std::size_t s = 0; s < g.spectral_size(); ++s) {
          lon[static_cast<std::size_t>(a)][s] = v[static_cast<std::size_t>(a)][s] - lon[static_cast<std::size_t>(a)][s];
        }
      }
    }
    VectorField f = inverse_transform(lon);
    const double norm = detail::rms(f);
    if (norm > 0.0) f *= r.amplitude / norm;
    u += f;
  }

  if (has_density) {
    detail::require_positive(dn, p.nbar);
    m += dn.map([&](double v) { return pointwise::symmetric_of(v, p); });
  }

  m = dealias(m);
  u = dealias(u);
  const double shift = detail::mass_neutral_shift(m, p);
  for (double& v : m) v += shift;
  const ScalarField h = h_of(m, p);
  VectorField e = poisson_gradient(h);
  return {std::move(m), std::move(u), std::move(e)};
}

}  // namespace eplab
