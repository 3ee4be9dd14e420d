#pragma once

#include <cmath>

#include "eplab/fft.hpp"

namespace eplab {

// Fourier-side kernels. Derivatives multiply by i k with the Nyquist
// component of k set to zero, so real fields stay real.

inline Spectrum derivative(const Spectrum& f, int axis) {
  Spectrum out(f.grid());
  const Grid& g = f.grid();
  for (std::size_t s = 0; s < f.size(); ++s) {
    out[s] = Complex(0.0, g.k(s)[axis]) * f[s];
  }
  return out;
}

inline Spectrum dealias(const Spectrum& f) {
  Spectrum out(f);
  const Grid& g = f.grid();
  for (std::size_t s = 0; s < out.size(); ++s) {
    if (!g.in_mask(s)) out[s] = 0.0;
  }
  return out;
}

namespace detail {

inline double k_squared(const Grid& g, std::size_t s) {
  const auto& k = g.k(s);
  return k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
}

}  // namespace detail

// Sum_a i k_a v_a, accumulated in place.
inline Spectrum divergence(const std::vector<Spectrum>& v) {
  const Grid& g = v.front().grid();
  Spectrum out(g);
  for (std::size_t a = 0; a < v.size(); ++a) {
    for (std::size_t s = 0; s < out.size(); ++s) {
      out[s] += Complex(0.0, g.k(s)[a]) * v[a][s];
    }
  }
  return out;
}

inline std::vector<Spectrum> forward_transform(const VectorField& v) {
  std::vector<Spectrum> out;
  out.reserve(static_cast<std::size_t>(v.components()));
  for (const auto& c : v) out.push_back(forward_transform(c));
  return out;
}

inline VectorField inverse_transform(const std::vector<Spectrum>& v) {
  std::vector<ScalarField> comps;
  comps.reserve(v.size());
  for (const auto& c : v) comps.push_back(inverse_transform(c));
  return VectorField(std::move(comps));
}

// grad Delta^{-1} rho on the Fourier side; the zero mode and modes whose
// effective |k| vanishes are mapped to zero.
inline std::vector<Spectrum> poisson_gradient(const Spectrum& rho) {
  const Grid& g = rho.grid();
  std::vector<Spectrum> e(static_cast<std::size_t>(g.dim()), Spectrum(g));
  for (std::size_t s = 0; s < rho.size(); ++s) {
    const double k2 = detail::k_squared(g, s);
    if (k2 == 0.0) continue;
    const Complex w = Complex(0.0, -1.0) * rho[s] / k2;
    for (int a = 0; a < g.dim(); ++a) e[static_cast<std::size_t>(a)][s] = g.k(s)[a] * w;
  }
  return e;
}

// grad Delta^{-1} div v: the curl-free part of v with zero mean.
inline std::vector<Spectrum> riesz_div_projection(const std::vector<Spectrum>& v) {
  const Grid& g = v.front().grid();
  std::vector<Spectrum> out(v.size(), Spectrum(g));
  for (std::size_t s = 0; s < g.spectral_size(); ++s) {
    const double k2 = detail::k_squared(g, s);
    if (k2 == 0.0) continue;
    const auto& k = g.k(s);
    Complex kv = 0.0;
    for (std::size_t a = 0; a < v.size(); ++a) kv += k[a] * v[a][s];
    for (std::size_t a = 0; a < v.size(); ++a) out[a][s] = k[a] * kv / k2;
  }
  return out;
}

// Physical-space operators. Each transforms once and returns samples.

inline VectorField gradient(const ScalarField& f) {
  const Spectrum fh = forward_transform(f);
  VectorField out(f.grid());
  for (int a = 0; a < f.grid().dim(); ++a) out[a] = inverse_transform(derivative(fh, a));
  return out;
}

inline ScalarField divergence(const VectorField& v) {
  return inverse_transform(divergence(forward_transform(v)));
}

// Scalar vorticity (one component) in 2-D, the curl vector in 3-D.
inline VectorField curl(const VectorField& v) {
  const Grid& g = v.grid();
  if (v.components() != g.dim()) {
    throw DimensionMismatch("curl needs one component per axis");
  }
  const auto vh = forward_transform(v);
  auto d = [&](int axis, int comp) {
    return derivative(vh[static_cast<std::size_t>(comp)], axis);
  };
  if (g.dim() == 2) {
    Spectrum w = d(0, 1);
    Spectrum t = d(1, 0);
    t *= -1.0;
    w += t;
    return VectorField(std::vector<ScalarField>{inverse_transform(w)});
  }
  std::vector<ScalarField> comps;
  for (int a = 0; a < 3; ++a) {
    const int b = (a + 1) % 3;
    const int c = (a + 2) % 3;
    Spectrum w = d(b, c);
    Spectrum t = d(c, b);
    t *= -1.0;
    w += t;
    comps.push_back(inverse_transform(w));
  }
  return VectorField(std::move(comps));
}

// e = grad Delta^{-1} rho. Requires |mean(rho)| <= 1e-10 ||rho||_2, since a
// density with nonzero mean has no periodic potential.
inline VectorField poisson_gradient(const ScalarField& rho) {
  const double mean = rho.mean();
  if (std::abs(mean) > 1e-10 * rho.l2_norm()) {
    throw NonZeroMean("poisson_gradient: source mean " + std::to_string(mean) +
                      " is not compatible with a periodic potential");
  }
  return inverse_transform(poisson_gradient(forward_transform(rho)));
}

inline VectorField riesz_div_projection(const VectorField& v) {
  return inverse_transform(riesz_div_projection(forward_transform(v)));
}

inline ScalarField dealias(const ScalarField& f) {
  return inverse_transform(dealias(forward_transform(f)));
}

inline VectorField dealias(const VectorField& v) {
  std::vector<ScalarField> comps;
  for (const auto& c : v) comps.push_back(dealias(c));
  return VectorField(std::move(comps));
}

// Copies the coefficients of f into the lattice of target, dropping the
// Nyquist planes and anything the target cannot represent. Used both to
// zero-pad onto a finer grid and to truncate back to a coarser one.
inline Spectrum resample(const Spectrum& f, const Grid& target) {
  const Grid& src = f.grid();
  if (src.dim() != target.dim() || src.length() != target.length()) {
    throw DimensionMismatch("resample between incompatible boxes");
  }
  Spectrum out(target);
  const double scale = static_cast<double>(target.size()) / static_cast<double>(src.size());
  const int limit = std::min(src.points(), target.points()) / 2;
  for (std::size_t s = 0; s < src.spectral_size(); ++s) {
    const auto& i = src.mode_index(s);
    bool representable = true;
    for (int a = 0; a < src.dim(); ++a) {
      if (std::abs(i[a]) >= limit) representable = false;
    }
    if (!representable) continue;
    auto [t, conj] = target.spectral_index(i);
    out[t] = (conj ? std::conj(f[s]) : f[s]) * scale;
  }
  return out;
}

inline ScalarField resample(const ScalarField& f, const Grid& target) {
  if (f.grid() == target) return f;
  return inverse_transform(resample(forward_transform(f), target));
}

// f * g evaluated on the zero-padded grid. Exact (no aliasing) when both
// factors are dealiased.
inline ScalarField exact_product(const ScalarField& f, const ScalarField& g) {
  require_same_grid(f.grid(), g.grid());
  const Grid fine = f.grid().padded();
  return resample(f, fine) * resample(g, fine);
}

// f * g formed pointwise on f's grid, then filtered to the dealias mask.
inline ScalarField dealiased_product(const ScalarField& f, const ScalarField& g) {
  return dealias(f * g);
}

}  // namespace eplab
