#pragma once

#include <cmath>
#include <string>

#include "eplab/errors.hpp"

namespace eplab {

// Physical constants of the gamma-law model p(n) = A n^gamma. gamma == 1
// selects the isothermal branch; derived quantities are recomputed on every
// call.
struct Params {
  double A = 1.0;
  double gamma = 2.0;
  double tau = 0.5;
  double nbar = 1.0;

  bool isothermal() const noexcept { return gamma == 1.0; }

  // Sound speed at the background density, sqrt(A gamma nbar^(gamma-1)).
  double psi_bar() const { return std::sqrt(A * gamma * std::pow(nbar, gamma - 1.0)); }

  // Linear density response h'(0) = (A gamma)^(-1/2) nbar^((3-gamma)/2).
  double c() const { return std::pow(A * gamma, -0.5) * std::pow(nbar, 0.5 * (3.0 - gamma)); }

  // (gamma - 1) / 2, zero on the isothermal branch.
  double kappa() const noexcept { return 0.5 * (gamma - 1.0); }

  // Critical Besov index 1 + N/2.
  static double sigma(int dim) noexcept { return 1.0 + 0.5 * dim; }

  void validate() const {
    auto positive = [](double v, const char* name) {
      if (!(v > 0.0) || !std::isfinite(v)) {
        throw ConfigError(name, "must be positive and finite, got " + std::to_string(v));
      }
    };
    positive(A, "A");
    positive(tau, "tau");
    positive(nbar, "nbar");
    if (!(gamma >= 1.0) || !std::isfinite(gamma)) {
      throw ConfigError("gamma", "must be >= 1, got " + std::to_string(gamma));
    }
  }
};

}  // namespace eplab
