#pragma once

#include <cmath>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "eplab/diagnostics.hpp"
#include "eplab/model.hpp"

namespace eplab {

enum class Scheme { rk4, rk4_integrating_factor };

inline std::string to_string(Scheme s) {
  return s == Scheme::rk4 ? "rk4" : "rk4-integrating-factor";
}

// How e is advanced: by its own evolution equation, or re-solved from
// div e = h(m) after every step.
enum class FieldMode { evolved, projected };

inline std::string to_string(FieldMode m) { return m == FieldMode::evolved ? "evolved" : "projected"; }

struct StepControl {
  double dt = 0.0;  // <= 0: derived from cfl and the initial state
  double cfl = 0.4;
  Scheme scheme = Scheme::rk4;
  double t_end = 10.0;
  double sample_interval = 0.1;
};

// Linear stability bounds of classical RK4: |dt lambda| <= 2 sqrt(2) on the
// imaginary axis and dt/tau <= 2.785 on the negative real axis.
inline constexpr double kRk4ImaginaryLimit = 2.0 * std::numbers::sqrt2;
inline constexpr double kRk4RealLimit = 2.785;

// ---------------------------------------------------------------------------
// Systems. Each exposes State, Rate, rhs(), the wave-speed bound for the CFL
// condition, a domain check and an optional post-step hook.

struct SymmetricSystem {
  using State = SymmetricState;
  using Rate = Tendencies;

  Params params;
  ModelOptions options;
  FieldMode e_mode = FieldMode::evolved;

  Rate rhs(const State& s) const { return rhs_symmetric(s, params, options); }
  double wave_speed(const State& s) const { return params.psi_bar() + s.u.max_abs(); }
  const Grid& grid(const State& s) const { return s.m.grid(); }

  void check_domain(const State& s, double t) const {
    if (params.isothermal()) return;
    for (std::size_t i = 0; i < s.m.size(); ++i) {
      if (!pointwise::in_domain(s.m[i], params)) {
        throw DomainViolation("(gamma-1)/2 m + psi_bar <= 0", i, t);
      }
    }
  }

  void post_step(State& s) const {
    if (e_mode == FieldMode::projected) {
      s.e = inverse_transform(poisson_gradient(forward_transform(h_of(s.m, params))));
    }
  }
};

struct PrimitiveSystem {
  using State = PrimitiveState;
  using Rate = PrimitiveTendencies;

  Params params;
  ModelOptions options;

  Rate rhs(const State& s) const { return rhs_primitive(s, params, options); }
  double wave_speed(const State& s) const { return params.psi_bar() + s.u.max_abs(); }
  const Grid& grid(const State& s) const { return s.dn.grid(); }

  void check_domain(const State& s, double t) const {
    for (std::size_t i = 0; i < s.dn.size(); ++i) {
      if (!(params.nbar + s.dn[i] > 0.0)) throw NonPositiveDensity("density n <= 0", i, t);
    }
  }

  void post_step(State&) const {}
};

inline void add_scaled(SymmetricState& y, double a, const Tendencies& k) {
  y.m.axpy(a, k.m_t);
  y.u.axpy(a, k.u_t);
  y.e.axpy(a, k.e_t);
}

inline void add_scaled(PrimitiveState& y, double a, const PrimitiveTendencies& k) {
  y.dn.axpy(a, k.n_t);
  y.u.axpy(a, k.u_t);
  y.e.axpy(a, k.e_t);
}

inline void add_scaled(Tendencies& y, double a, const Tendencies& k) {
  y.m_t.axpy(a, k.m_t);
  y.u_t.axpy(a, k.u_t);
  y.e_t.axpy(a, k.e_t);
}

inline void add_scaled(PrimitiveTendencies& y, double a, const PrimitiveTendencies& k) {
  y.n_t.axpy(a, k.n_t);
  y.u_t.axpy(a, k.u_t);
  y.e_t.axpy(a, k.e_t);
}

inline VectorField& velocity(SymmetricState& s) { return s.u; }
inline VectorField& velocity(PrimitiveState& s) { return s.u; }
inline VectorField& velocity(Tendencies& s) { return s.u_t; }
inline VectorField& velocity(PrimitiveTendencies& s) { return s.u_t; }

// One step of size dt. In integrating-factor mode the relaxation -u/tau is
// integrated exactly through exp(-dt/tau) on u (Lawson RK4) and the stages
// only see the remaining terms.
template <typename System>
typename System::State step(const System& sys, const typename System::State& y, double dt,
                            Scheme scheme) {
  using State = typename System::State;
  using Rate = typename System::Rate;

  if (scheme == Scheme::rk4) {
    const Rate k1 = sys.rhs(y);
    State y2 = y;
    add_scaled(y2, 0.5 * dt, k1);
    const Rate k2 = sys.rhs(y2);
    State y3 = y;
    add_scaled(y3, 0.5 * dt, k2);
    const Rate k3 = sys.rhs(y3);
    State y4 = y;
    add_scaled(y4, dt, k3);
    const Rate k4 = sys.rhs(y4);
    State out = y;
    add_scaled(out, dt / 6.0, k1);
    add_scaled(out, dt / 3.0, k2);
    add_scaled(out, dt / 3.0, k3);
    add_scaled(out, dt / 6.0, k4);
    sys.post_step(out);
    return out;
  }

  const double inv_tau = 1.0 / sys.params.tau;
  const double half = std::exp(-0.5 * dt * inv_tau);
  const double full = std::exp(-dt * inv_tau);
  // Rate without the relaxation term.
  auto stage = [&](const State& s) {
    Rate k = sys.rhs(s);
    velocity(k).axpy(inv_tau, s.u);
    return k;
  };
  auto decay = [](auto v, double f) {
    velocity(v) *= f;
    return v;
  };

  const Rate k1 = stage(y);
  State ya = y;
  add_scaled(ya, 0.5 * dt, k1);
  ya = decay(std::move(ya), half);
  const Rate k2 = stage(ya);

  const State y_half = decay(y, half);
  State yb = y_half;
  add_scaled(yb, 0.5 * dt, k2);
  const Rate k3 = stage(yb);

  State yc = decay(y, full);
  add_scaled(yc, dt, decay(k3, half));
  const Rate k4 = stage(yc);

  State out = decay(y, full);
  add_scaled(out, dt / 6.0, decay(k1, full));
  Rate mid = k2;
  add_scaled(mid, 1.0, k3);
  add_scaled(out, dt / 3.0, decay(std::move(mid), half));
  add_scaled(out, dt / 6.0, k4);
  sys.post_step(out);
  return out;
}

struct TimeGrid {
  double dt = 0.0;
  std::size_t steps_per_sample = 1;
  std::size_t samples = 0;  // number of intervals; samples + 1 records
};

// Fixes dt so that sample times land on step boundaries: the sample interval
// is shrunk to divide t_end, and dt to divide the sample interval.
template <typename System>
TimeGrid plan_time_grid(const System& sys, const typename System::State& y0, const StepControl& c) {
  if (!(c.t_end >= 0.0)) throw ConfigError("t_end", "must be nonnegative");
  if (!(c.cfl > 0.0)) throw ConfigError("cfl", "must be positive");
  const Grid& g = sys.grid(y0);
  const double cfl_dt = c.cfl * g.spacing() / sys.wave_speed(y0);
  if (c.dt > 0.0 && c.dt > cfl_dt * (1.0 + 1e-12)) {
    throw CflViolation("dt = " + std::to_string(c.dt) + " exceeds cfl * dx / (psi_bar + max|u|) = " +
                       std::to_string(cfl_dt));
  }
  TimeGrid tg;
  if (c.t_end == 0.0) {
    tg.dt = c.dt > 0.0 ? c.dt : cfl_dt;
    return tg;
  }
  if (!(c.sample_interval > 0.0)) throw ConfigError("sample_interval", "must be positive");
  tg.samples = static_cast<std::size_t>(std::ceil(c.t_end / c.sample_interval - 1e-9));
  const double interval = c.t_end / static_cast<double>(tg.samples);
  const double target = c.dt > 0.0 ? c.dt : cfl_dt;
  tg.steps_per_sample = static_cast<std::size_t>(std::ceil(interval / target - 1e-9));
  tg.dt = interval / static_cast<double>(tg.steps_per_sample);
  return tg;
}

template <typename System>
void check_stability(const System& sys, const typename System::State& y, double dt, Scheme scheme) {
  const double omega = sys.wave_speed(y) * sys.grid(y).mask_kmax();
  if (dt * omega > kRk4ImaginaryLimit) {
    throw CflViolation("dt * (psi_bar + max|u|) * k_max = " + std::to_string(dt * omega) +
                       " exceeds the RK4 stability limit");
  }
  if (scheme == Scheme::rk4 && dt / sys.params.tau > kRk4RealLimit) {
    throw CflViolation("dt / tau = " + std::to_string(dt / sys.params.tau) +
                       " is beyond the RK4 relaxation limit; use the integrating-factor scheme");
  }
}

// Advances y to t_end, calling observer(t, state, rhs(state)) at t = 0 and at
// every sample time. Deterministic for fixed inputs.
template <typename System, typename Observer>
void integrate(const System& sys, typename System::State& y, const StepControl& c,
               Observer&& observer) {
  const TimeGrid tg = plan_time_grid(sys, y, c);
  sys.check_domain(y, 0.0);
  observer(0.0, y, sys.rhs(y));
  std::size_t n = 0;
  for (std::size_t k = 1; k <= tg.samples; ++k) {
    for (std::size_t j = 0; j < tg.steps_per_sample; ++j) {
      check_stability(sys, y, tg.dt, c.scheme);
      y = step(sys, y, tg.dt, c.scheme);
      ++n;
      sys.check_domain(y, static_cast<double>(n) * tg.dt);
    }
    observer(static_cast<double>(n) * tg.dt, y, sys.rhs(y));
  }
}

using Observer = std::function<void(double, const SymmetricState&, const Tendencies&)>;

struct RunOptions {
  ModelOptions model;
  FieldMode e_mode = FieldMode::evolved;
};

// Integrates the symmetrized system and records every diagnostic at each
// sample time. Extra observers see the same (t, state, tendencies).
inline RunRecord evolve(SymmetricState state, const Params& params, const StepControl& control,
                        const RunOptions& options = {}, const std::vector<Observer>& observers = {}) {
  params.validate();
  const SymmetricSystem sys{params, options.model, options.e_mode};
  RunRecord rec;
  integrate(sys, state, control, [&](double t, const SymmetricState& s, const Tendencies& k) {
    rec.samples.push_back(measure(t, s, k, params));
    for (const auto& obs : observers) obs(t, s, k);
  });
  if (rec.samples.size() >= 9) rec.fits = fit_rates(rec);
  return rec;
}

}  // namespace eplab
