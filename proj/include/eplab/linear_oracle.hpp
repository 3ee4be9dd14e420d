#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <utility>
#include <vector>

#include "eplab/params.hpp"

namespace eplab {

// Linearizing the symmetrized system about (0, 0, 0) with div e = c m gives,
// for a longitudinal mode of wavenumber kappa,
//   lambda^2 + lambda / tau + (psi_bar^2 kappa^2 + psi_bar c) = 0,
// while solenoidal velocity decays at exactly -1/tau. The psi_bar c term is
// the Poisson coupling; switching it off leaves lambda(0) = 0.
struct OracleOptions {
  bool poisson_coupling = true;
};

struct ModeSpectrum {
  double kappa = 0.0;
  std::complex<double> lambda_plus;
  std::complex<double> lambda_minus;
  double solenoidal = 0.0;
};

inline double oracle_frequency_squared(double kappa, const Params& p, const OracleOptions& opt = {}) {
  const double psi = p.psi_bar();
  return psi * psi * kappa * kappa + (opt.poisson_coupling ? psi * p.c() : 0.0);
}

// Roots ordered so that Re lambda_plus >= Re lambda_minus. Real roots use the
// cancellation-free form (the slow root is w2 / q), which matters when tau is
// small and the slow root is close to -w2 tau.
inline std::pair<std::complex<double>, std::complex<double>> longitudinal_eigenvalues(
    double kappa, const Params& p, const OracleOptions& opt = {}) {
  const double b = 1.0 / p.tau;
  const double w2 = oracle_frequency_squared(kappa, p, opt);
  double disc = b * b - 4.0 * w2;
  // A discriminant at roundoff level is a double root.
  if (std::abs(disc) <= 8.0 * std::numeric_limits<double>::epsilon() * (b * b + 4.0 * w2)) disc = 0.0;
  if (disc < 0.0) {
    const double im = 0.5 * std::sqrt(-disc);
    return {{-0.5 * b, im}, {-0.5 * b, -im}};
  }
  const double q = -0.5 * (b + std::sqrt(disc));
  const double slow = q != 0.0 ? w2 / q : 0.0;
  return {{slow, 0.0}, {q, 0.0}};
}

inline double solenoidal_rate(const Params& p) { return -1.0 / p.tau; }

inline ModeSpectrum mode_spectrum(double kappa, const Params& p, const OracleOptions& opt = {}) {
  auto [lp, lm] = longitudinal_eigenvalues(kappa, p, opt);
  return {kappa, lp, lm, solenoidal_rate(p)};
}

// |lambda^2 + lambda/tau + w2| relative to the size of its terms.
inline double characteristic_residual(std::complex<double> lambda, double kappa, const Params& p,
                                      const OracleOptions& opt = {}) {
  const double w2 = oracle_frequency_squared(kappa, p, opt);
  const auto value = lambda * lambda + lambda / p.tau + w2;
  const double scale = std::norm(lambda) + std::abs(lambda) / p.tau + w2;
  return std::abs(value) / std::max(scale, std::numeric_limits<double>::min());
}

struct ExcitedModes {
  std::vector<double> longitudinal;  // excited wavenumber magnitudes
  bool solenoidal = false;
};

// Decay rate mu = min over excited components of -Re lambda.
inline double predicted_decay_rate(const ExcitedModes& modes, const Params& p,
                                   const OracleOptions& opt = {}) {
  if (modes.longitudinal.empty() && !modes.solenoidal) {
    throw EmptySet("predicted_decay_rate: nothing is excited");
  }
  double mu = std::numeric_limits<double>::infinity();
  for (double kappa : modes.longitudinal) {
    const auto [lp, lm] = longitudinal_eigenvalues(kappa, p, opt);
    mu = std::min({mu, -lp.real(), -lm.real()});
  }
  if (modes.solenoidal) mu = std::min(mu, -solenoidal_rate(p));
  return mu;
}

struct TauRate {
  double tau = 0.0;
  double mu = 0.0;
};

inline std::vector<TauRate> tau_scaling_curve(const std::vector<double>& taus, double kappa,
                                              Params p, const OracleOptions& opt = {}) {
  std::vector<TauRate> out;
  out.reserve(taus.size());
  for (double tau : taus) {
    if (!(tau > 0.0)) throw RangeError("tau must be positive");
    p.tau = tau;
    out.push_back({tau, predicted_decay_rate({{kappa}, false}, p, opt)});
  }
  return out;
}

// Least-squares slope of log mu against log tau.
inline double loglog_slope(const std::vector<TauRate>& curve) {
  if (curve.size() < 2) throw TooFewSamples("slope needs at least two points");
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  const double n = static_cast<double>(curve.size());
  for (const auto& r : curve) {
    if (!(r.mu > 0.0)) throw NonPositiveSeries("log-log slope of a nonpositive rate");
    const double x = std::log(r.tau);
    const double y = std::log(r.mu);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace eplab
