#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "eplab/littlewood_paley.hpp"
#include "eplab/model.hpp"

namespace eplab {

// One row of the run series. Norms of (m, u, e) are in B^sigma_{2,1}, those
// of the tendencies and of the vorticity in B^{sigma-1}_{2,1}.
struct Sample {
  double t = 0.0;
  double norm_m = 0.0;
  double norm_u = 0.0;
  double norm_e = 0.0;
  double norm_mt = 0.0;
  double norm_ut = 0.0;
  double norm_et = 0.0;
  double q = 0.0;
  double vorticity = 0.0;
  double constraint = 0.0;
  double min_domain_margin = 0.0;

  double state_norm() const noexcept { return norm_m + norm_u + norm_e; }
  double tendency_norm() const noexcept { return norm_mt + norm_ut + norm_et; }
  double joint_norm() const noexcept { return state_norm() + tendency_norm(); }
};

// Q / (||U||_{B^sigma} + ||U_t||_{B^{sigma-1}}); its extremes along a run are
// the measured sandwich constants C3, C4.
inline double sandwich_ratio(const Sample& s) {
  const double d = s.joint_norm();
  return d > 0.0 ? s.q / d : 0.0;
}

struct FitWindow {
  double t_begin = 0.0;
  double t_end = 0.0;
};

struct DecayFit {
  double mu = 0.0;
  double residual = 0.0;  // RMS misfit of log y about the fitted line
  FitWindow window;
  std::size_t samples = 0;
};

// Least-squares slope of -log y against t over samples inside the window.
inline DecayFit decay_fit(const std::vector<double>& t, const std::vector<double>& y,
                          const FitWindow& window) {
  if (t.size() != y.size()) throw DimensionMismatch("decay_fit: t and y differ in length");
  std::vector<std::pair<double, double>> pts;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < window.t_begin || t[i] > window.t_end) continue;
    if (!(y[i] > 0.0)) {
      throw NonPositiveSeries("decay_fit: nonpositive value at t=" + std::to_string(t[i]));
    }
    pts.emplace_back(t[i], -std::log(y[i]));
  }
  if (pts.size() < 8) {
    throw TooFewSamples("decay_fit: " + std::to_string(pts.size()) +
                        " samples in window, need at least 8");
  }
  const double n = static_cast<double>(pts.size());
  double tm = 0.0, lm = 0.0;
  for (auto [a, b] : pts) {
    tm += a;
    lm += b;
  }
  tm /= n;
  lm /= n;
  double stt = 0.0, stl = 0.0;
  for (auto [a, b] : pts) {
    stt += (a - tm) * (a - tm);
    stl += (a - tm) * (b - lm);
  }
  DecayFit fit;
  fit.mu = stl / stt;
  double ss = 0.0;
  for (auto [a, b] : pts) {
    const double r = b - (lm + fit.mu * (a - tm));
    ss += r * r;
  }
  fit.residual = std::sqrt(ss / n);
  fit.window = window;
  fit.samples = pts.size();
  return fit;
}

// Default window: the whole series minus its first 20 %, which holds the
// initial transient of a C0 exp(-mu t) bound.
inline FitWindow default_window(const std::vector<double>& t, double transient = 0.2) {
  if (t.empty()) return {};
  const double t0 = t.front();
  const double t1 = t.back();
  return {t0 + transient * (t1 - t0), t1};
}

namespace detail {

struct BlockSet {
  std::vector<double> m, u, e, mt, ut, et;
};

inline BlockSet state_blocks(const DyadicCutoffs& cut, const SymmetricState& st,
                             const Tendencies& tend) {
  return {block_norms(cut, forward_transform(st.m)), block_norms(cut, forward_transform(st.u)),
          block_norms(cut, forward_transform(st.e)), block_norms(cut, forward_transform(tend.m_t)),
          block_norms(cut, forward_transform(tend.u_t)), block_norms(cut, forward_transform(tend.e_t))};
}

inline double q_from_blocks(const BlockSet& b, double sigma, double nbar) {
  double q = 0.0;
  for (std::size_t i = 0; i < b.m.size(); ++i) {
    const double level = static_cast<double>(i) - 1.0;
    const double state = b.m[i] * b.m[i] + b.u[i] * b.u[i] + b.e[i] * b.e[i] / nbar;
    const double rate = b.mt[i] * b.mt[i] + b.ut[i] * b.ut[i] + b.et[i] * b.et[i] / nbar;
    q += std::exp2(level * (sigma - 1.0)) * std::sqrt(std::exp2(2.0 * level) * state + rate);
  }
  return q;
}

}  // namespace detail

// Q = sum_q 2^{q(sigma-1)} { 2^{2q} (|Dq m|^2 + |Dq u|^2 + |Dq e|^2 / nbar)
//                            + (|Dq m_t|^2 + |Dq u_t|^2 + |Dq e_t|^2 / nbar) }^{1/2}
inline double q_functional(const SymmetricState& st, const Tendencies& tend, const Params& p) {
  const auto cut = cutoffs_for(st.m.grid());
  return detail::q_from_blocks(detail::state_blocks(*cut, st, tend),
                               Params::sigma(st.m.grid().dim()), p.nbar);
}

// ||curl u||_{B^{sigma-1}_{2,1}}.
inline double vorticity_norm(const VectorField& u) {
  const Grid& g = u.grid();
  return besov_norm(curl(u), BesovIndex{Params::sigma(g.dim()) - 1.0});
}

inline double min_domain_margin(const ScalarField& m, const Params& p) {
  return p.kappa() * m.min() + p.psi_bar();
}

inline Sample measure(double t, const SymmetricState& st, const Tendencies& tend, const Params& p) {
  const Grid& g = st.m.grid();
  const auto cut = cutoffs_for(g);
  const double sigma = Params::sigma(g.dim());
  const auto b = detail::state_blocks(*cut, st, tend);
  Sample s;
  s.t = t;
  s.norm_m = besov_sum(b.m, sigma);
  s.norm_u = besov_sum(b.u, sigma);
  s.norm_e = besov_sum(b.e, sigma);
  s.norm_mt = besov_sum(b.mt, sigma - 1.0);
  s.norm_ut = besov_sum(b.ut, sigma - 1.0);
  s.norm_et = besov_sum(b.et, sigma - 1.0);
  s.q = detail::q_from_blocks(b, sigma, p.nbar);
  s.vorticity = vorticity_norm(st.u);
  s.constraint = constraint_residual(st, p);
  s.min_domain_margin = min_domain_margin(st.m, p);
  return s;
}

struct RateFit {
  std::string quantity;
  std::string status = "ok";  // ok | zero | error text
  DecayFit fit;
};

struct RunRecord {
  std::vector<Sample> samples;
  std::vector<RateFit> fits;

  std::vector<double> times() const {
    std::vector<double> t;
    for (const auto& s : samples) t.push_back(s.t);
    return t;
  }

  template <typename F>
  std::vector<double> column(F&& f) const {
    std::vector<double> out;
    for (const auto& s : samples) out.push_back(f(s));
    return out;
  }

  const RateFit* fit(const std::string& quantity) const {
    for (const auto& f : fits) {
      if (f.quantity == quantity) return &f;
    }
    return nullptr;
  }
};

// Series whose peak is below floor (roundoff relative to the state norm) are
// reported with status "roundoff" instead of a meaningless rate.
inline RateFit fit_series(const std::string& name, const std::vector<double>& t,
                          const std::vector<double>& y, const FitWindow& window,
                          double floor = 0.0) {
  RateFit r;
  r.quantity = name;
  r.fit.window = window;
  const double peak = y.empty() ? 0.0 : *std::max_element(y.begin(), y.end());
  if (peak == 0.0) {
    r.status = "zero";
    return r;
  }
  if (peak <= floor) {
    r.status = "roundoff";
    return r;
  }
  try {
    r.fit = decay_fit(t, y, window);
  } catch (const Error& e) {
    r.status = e.what();
  }
  return r;
}

// Rates of every decaying quantity in the record: the per-field norms, the
// state norm ||(m,u,e)||, the joint norm including tendencies, Q and the
// vorticity norm.
inline std::vector<RateFit> fit_rates(const RunRecord& rec,
                                      std::optional<FitWindow> window = std::nullopt) {
  const auto t = rec.times();
  const FitWindow w = window.value_or(default_window(t));
  const auto scale = rec.column([](const Sample& s) { return s.joint_norm(); });
  const double floor =
      1e-13 * (scale.empty() ? 0.0 : *std::max_element(scale.begin(), scale.end()));
  std::vector<RateFit> out;
  auto add = [&](const std::string& name, auto getter) {
    out.push_back(fit_series(name, t, rec.column(getter), w, floor));
  };
  add("norm_state", [](const Sample& s) { return s.state_norm(); });
  add("norm_joint", [](const Sample& s) { return s.joint_norm(); });
  add("norm_m_sigma", [](const Sample& s) { return s.norm_m; });
  add("norm_u_sigma", [](const Sample& s) { return s.norm_u; });
  add("norm_e_sigma", [](const Sample& s) { return s.norm_e; });
  add("Q", [](const Sample& s) { return s.q; });
  add("vorticity_norm", [](const Sample& s) { return s.vorticity; });
  return out;
}

}  // namespace eplab
