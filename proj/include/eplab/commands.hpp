#pragma once

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <openssl/evp.h>

#include <json.hpp>

#include "eplab/config.hpp"
#include "eplab/diagnostics.hpp"
#include "eplab/integrator.hpp"
#include "eplab/linear_oracle.hpp"
#include "eplab/littlewood_paley.hpp"

namespace eplab {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

inline constexpr const char* kSeriesHeader =
    "t,norm_m_sigma,norm_u_sigma,norm_e_sigma,norm_mt,norm_ut,norm_et,Q,vorticity_norm,"
    "constraint_residual,min_domain_margin";

inline std::string sha256_hex(const std::string& text) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(text.data(), text.size(), digest, &len, EVP_sha256(), nullptr);
  std::ostringstream o;
  for (unsigned int i = 0; i < len; ++i) {
    o << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  }
  return o.str();
}

inline std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v + 0.0);  // + 0.0 drops the sign of -0
  return buf;
}

inline std::string series_csv(const std::vector<Sample>& samples) {
  std::string out = std::string(kSeriesHeader) + "\n";
  for (const auto& s : samples) {
    const double row[] = {s.t,       s.norm_m, s.norm_u,    s.norm_e,     s.norm_mt,
                          s.norm_ut, s.norm_et, s.q,        s.vorticity,  s.constraint,
                          s.min_domain_margin};
    for (std::size_t i = 0; i < std::size(row); ++i) {
      out += (i ? "," : "") + format_g17(row[i]);
    }
    out += "\n";
  }
  return out;
}

inline void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << text;
}

// Lattice wavenumbers that the initial data excites, for the oracle.
inline ExcitedModes excited_modes(const InitSpec& spec, const Grid& g) {
  ExcitedModes ex;
  std::set<double> kappas;
  for (const auto& m : spec.modes) {
    if (m.amplitude == 0.0) continue;
    if (m.target == InitTarget::u_solenoidal) {
      ex.solenoidal = true;
      continue;
    }
    double k2 = 0.0;
    for (int a = 0; a < g.dim(); ++a) {
      const double k = g.fundamental() * m.wavevector[a];
      k2 += k * k;
    }
    kappas.insert(std::sqrt(k2));
  }
  for (const auto& r : spec.random) {
    if (r.amplitude == 0.0) continue;
    if (r.target == InitTarget::u_solenoidal) {
      ex.solenoidal = true;
      continue;
    }
    for (std::size_t s = 0; s < g.spectral_size(); ++s) {
      const double k = g.kmag(s);
      if (g.in_mask(s) && k > 0.0 && k >= r.band_min && k <= r.band_max) kappas.insert(k);
    }
  }
  ex.longitudinal.assign(kappas.begin(), kappas.end());
  return ex;
}

struct OraclePrediction {
  std::optional<double> mu;          // state and Q rate
  std::optional<double> vorticity;   // 1/tau when solenoidal content is present
};

inline OraclePrediction oracle_prediction(const RunConfig& cfg) {
  OraclePrediction out;
  const auto ex = excited_modes(cfg.init, cfg.grid());
  if (!ex.longitudinal.empty() || ex.solenoidal) out.mu = predicted_decay_rate(ex, cfg.params);
  if (ex.solenoidal) out.vorticity = -solenoidal_rate(cfg.params);
  return out;
}

enum class RunStatus { ok, violation };

struct RunResult {
  RunStatus status = RunStatus::ok;
  std::string message;
  RunRecord record;
  OraclePrediction oracle;
  double dt = 0.0;
  double wall_seconds = 0.0;

  int exit_code() const { return status == RunStatus::ok ? 0 : 3; }
  double fitted_mu(const std::string& quantity = "norm_state") const {
    const RateFit* f = record.fit(quantity);
    return f ? f->fit.mu : std::numeric_limits<double>::quiet_NaN();
  }
};

inline json params_json(const Params& p, int dim) {
  return {{"A", p.A},
          {"gamma", p.gamma},
          {"tau", p.tau},
          {"nbar", p.nbar},
          {"psi_bar", p.psi_bar()},
          {"c", p.c()},
          {"kappa", p.kappa()},
          {"sigma", Params::sigma(dim)}};
}

inline json fit_json(const RateFit& f) {
  return {{"quantity", f.quantity},
          {"status", f.status},
          {"mu", f.fit.mu},
          {"residual", f.fit.residual},
          {"window", {f.fit.window.t_begin, f.fit.window.t_end}},
          {"samples", f.fit.samples}};
}

inline std::string rates_csv(const RunResult& r) {
  std::string out = "quantity,status,mu,residual,t_begin,t_end,samples,mu_oracle\n";
  for (const auto& f : r.record.fits) {
    std::optional<double> oracle =
        f.quantity == "vorticity_norm" ? r.oracle.vorticity : r.oracle.mu;
    out += f.quantity + "," + f.status + "," + format_g17(f.fit.mu) + "," +
           format_g17(f.fit.residual) + "," + format_g17(f.fit.window.t_begin) + "," +
           format_g17(f.fit.window.t_end) + "," + std::to_string(f.fit.samples) + "," +
           (oracle ? format_g17(*oracle) : std::string("nan")) + "\n";
  }
  return out;
}

// Runs one trajectory and writes series.csv, rates.csv and manifest.json into
// out. Domain and CFL violations end the run early; what was recorded up to
// that point is still written and the result carries status violation.
inline RunResult cmd_run(const RunConfig& cfg, const std::string& config_text, const fs::path& out) {
  const auto start = std::chrono::steady_clock::now();
  fs::create_directories(out);
  RunResult res;
  res.oracle = oracle_prediction(cfg);

  const Grid g = cfg.grid();
  const SymmetricSystem sys{cfg.params, {cfg.linear}, cfg.e_mode};
  try {
    SymmetricState y = compatible_init(cfg.init, cfg.params, g);
    res.dt = plan_time_grid(sys, y, cfg.control).dt;
    integrate(sys, y, cfg.control, [&](double t, const SymmetricState& s, const Tendencies& k) {
      res.record.samples.push_back(measure(t, s, k, cfg.params));
    });
  } catch (const DomainViolation& e) {
    res.status = RunStatus::violation;
    res.message = e.what();
    if (std::isnan(e.time())) res.message += " while building the initial data at t=0";
  } catch (const CflViolation& e) {
    res.status = RunStatus::violation;
    res.message = e.what();
  }
  if (res.record.samples.size() >= 9) res.record.fits = fit_rates(res.record);
  res.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  write_text(out / "series.csv", series_csv(res.record.samples));
  write_text(out / "rates.csv", rates_csv(res));

  json manifest;
  manifest["status"] = res.status == RunStatus::ok ? "ok" : "violation";
  if (!res.message.empty()) manifest["message"] = res.message;
  manifest["params"] = params_json(cfg.params, cfg.dim);
  manifest["branch"] = cfg.branch == Branch::isothermal ? "isothermal" : "isentropic";
  manifest["grid"] = {{"dim", cfg.dim},
                      {"points", cfg.points},
                      {"length", cfg.length},
                      {"dealias_retain", g.retain_index()},
                      {"q_max", cutoffs_for(g)->q_max()}};
  manifest["scheme"] = {{"name", to_string(cfg.control.scheme)},
                        {"dt", res.dt},
                        {"cfl", cfg.control.cfl},
                        {"t_end", cfg.control.t_end},
                        {"sample_interval", cfg.control.sample_interval},
                        {"e_mode", to_string(cfg.e_mode)},
                        {"linear", cfg.linear}};
  json fits = json::array();
  for (const auto& f : res.record.fits) fits.push_back(fit_json(f));
  manifest["fits"] = fits;
  manifest["oracle"] = {{"mu", res.oracle.mu ? json(*res.oracle.mu) : json(nullptr)},
                        {"vorticity_rate",
                         res.oracle.vorticity ? json(*res.oracle.vorticity) : json(nullptr)}};
  if (!res.record.samples.empty()) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (const auto& s : res.record.samples) {
      if (s.joint_norm() <= 0.0) continue;
      lo = std::min(lo, sandwich_ratio(s));
      hi = std::max(hi, sandwich_ratio(s));
    }
    if (hi > 0.0) manifest["sandwich"] = {{"C3", lo}, {"C4", hi}};
  }
  manifest["config"] = {{"sha256", sha256_hex(config_text)}, {"text", config_text}};
  manifest["files"] = {"series.csv", "rates.csv"};
  manifest["wall_clock_seconds"] = res.wall_seconds;
  write_text(out / "manifest.json", manifest.dump(2) + "\n");
  return res;
}

// ---------------------------------------------------------------------------

struct SweepRow {
  double tau = 0.0;
  double mu_fit = std::numeric_limits<double>::quiet_NaN();
  double mu_oracle = std::numeric_limits<double>::quiet_NaN();
  std::string status = "ok";
  std::string directory;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::optional<double> oracle_slope_small;  // tau <= 1
  std::optional<double> oracle_slope_large;  // tau > 1
  std::optional<double> fit_slope_small;
  std::optional<double> fit_slope_large;
};

namespace detail {

inline std::optional<double> branch_slope(const std::vector<SweepRow>& rows, bool small,
                                          double SweepRow::*field) {
  std::vector<TauRate> pts;
  for (const auto& r : rows) {
    if ((r.tau <= 1.0) != small) continue;
    const double mu = r.*field;
    if (std::isfinite(mu) && mu > 0.0) pts.push_back({r.tau, mu});
  }
  if (pts.size() < 2) return std::nullopt;
  return loglog_slope(pts);
}

inline json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace detail

// One run per tau, in parallel workers, each writing to its own directory.
// A failing run is flagged in its row and the sweep carries on.
inline SweepResult cmd_sweep_tau(const RunConfig& base, const std::vector<double>& taus,
                                 const fs::path& out, int threads = 1) {
  if (taus.empty()) throw ConfigError("sweep.taus", "empty tau list");
  for (double t : taus) {
    if (!(t > 0.0)) throw ConfigError("sweep.taus", "every tau must be positive");
  }
  fs::create_directories(out);
  SweepResult res;
  res.rows.resize(taus.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < taus.size(); i = next++) {
      SweepRow& row = res.rows[i];
      row.tau = taus[i];
      row.directory = "tau_" + std::to_string(i);
      RunConfig cfg = base;
      cfg.params.tau = taus[i];
      try {
        const auto r = cmd_run(cfg, emit_config(cfg), out / row.directory);
        row.mu_oracle = r.oracle.mu.value_or(row.mu_oracle);
        const RateFit* f = r.record.fit("norm_state");
        if (r.status != RunStatus::ok) {
          row.status = "violation: " + r.message;
        } else if (f == nullptr) {
          row.status = "too few samples";
        } else {
          row.status = f->status;
          row.mu_fit = f->fit.mu;
        }
      } catch (const std::exception& e) {
        row.status = std::string("error: ") + e.what();
      }
    }
  };
  const int n = std::max(1, std::min<int>(threads, static_cast<int>(taus.size())));
  {
    std::vector<std::jthread> pool;
    for (int i = 1; i < n; ++i) pool.emplace_back(worker);
    worker();
  }

  res.oracle_slope_small = detail::branch_slope(res.rows, true, &SweepRow::mu_oracle);
  res.oracle_slope_large = detail::branch_slope(res.rows, false, &SweepRow::mu_oracle);
  res.fit_slope_small = detail::branch_slope(res.rows, true, &SweepRow::mu_fit);
  res.fit_slope_large = detail::branch_slope(res.rows, false, &SweepRow::mu_fit);

  std::string csv = "tau,mu_fit,mu_oracle,status,directory\n";
  json rows = json::array();
  for (const auto& r : res.rows) {
    csv += format_g17(r.tau) + "," + format_g17(r.mu_fit) + "," + format_g17(r.mu_oracle) + ",\"" +
           r.status + "\"," + r.directory + "\n";
    rows.push_back({{"tau", r.tau},
                    {"mu_fit", std::isfinite(r.mu_fit) ? json(r.mu_fit) : json(nullptr)},
                    {"mu_oracle", std::isfinite(r.mu_oracle) ? json(r.mu_oracle) : json(nullptr)},
                    {"status", r.status},
                    {"directory", r.directory}});
  }
  write_text(out / "sweep.csv", csv);
  json summary = {{"rows", rows},
                  {"slopes",
                   {{"oracle_tau_le_1", detail::optional_json(res.oracle_slope_small)},
                    {"oracle_tau_gt_1", detail::optional_json(res.oracle_slope_large)},
                    {"fit_tau_le_1", detail::optional_json(res.fit_slope_small)},
                    {"fit_tau_gt_1", detail::optional_json(res.fit_slope_large)}}}};
  write_text(out / "sweep.json", summary.dump(2) + "\n");
  return res;
}

// ---------------------------------------------------------------------------

struct LpCheck {
  std::string name;
  double max_residual = 0.0;
  double tolerance = 0.0;
  bool passed() const { return max_residual <= tolerance; }
};

struct LpReport {
  int fields = 0;
  std::uint64_t seed = 0;
  double seconds = 0.0;
  std::vector<LpCheck> checks;

  bool passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const LpCheck& c) { return c.passed(); });
  }
  const LpCheck* find(const std::string& name) const {
    for (const auto& c : checks) {
      if (c.name == name) return &c;
    }
    return nullptr;
  }
  json to_json() const {
    json list = json::array();
    for (const auto& c : checks) {
      list.push_back({{"name", c.name},
                      {"max_residual", c.max_residual},
                      {"tolerance", c.tolerance},
                      {"passed", c.passed()}});
    }
    return {{"passed", passed()}, {"fields", fields}, {"seed", seed}, {"seconds", seconds},
            {"checks", list}};
  }
};

struct LpCheckOptions {
  int fields = 200;
  std::uint64_t seed = 1;
  std::optional<int> corrupt_block;  // scale this block by 1.01 (negative control)
};

namespace detail {

inline ScalarField unit_random_field(const Grid& g, std::mt19937_64& rng) {
  ScalarField f = inverse_transform(random_spectrum(g, rng, 0.0, std::numeric_limits<double>::infinity()));
  f *= 1.0 / f.l2_norm();
  return f;
}

inline double relative_l2(const ScalarField& a, const ScalarField& b, double scale) {
  return (a - b).l2_norm() / scale;
}

}  // namespace detail

// Property suite for the dyadic blocks on unit-norm random masked fields:
// partition of unity, reconstruction, almost orthogonality, paraproduct
// spectral localization, Bony reconstruction and Bernstein shell bounds.
inline LpReport lp_check(const Grid& g, const LpCheckOptions& opt) {
  const auto start = std::chrono::steady_clock::now();
  const DyadicCutoffs cut =
      opt.corrupt_block ? cutoffs_for(g)->with_scaled_block(*opt.corrupt_block, 1.01)
                        : *cutoffs_for(g);
  const Grid fine = g.padded();
  const DyadicCutoffs& fine_cut = *cutoffs_for(fine);
  const int qm = cut.q_max();

  LpCheck partition{"partition_of_unity", cut.partition_residual(), 1e-14};
  LpCheck reconstruction{"block_reconstruction", 0.0, 1e-13};
  LpCheck orthogonality{"almost_orthogonality", 0.0, 1e-12};
  LpCheck localization{"paraproduct_localization", 0.0, 1e-12};
  LpCheck bony{"bony_reconstruction", 0.0, 1e-10};
  LpCheck bernstein{"bernstein_bounds", 0.0, 1e-12};

  std::mt19937_64 rng(opt.seed);
  std::vector<ScalarField> fields;
  for (int i = 0; i < opt.fields; ++i) fields.push_back(detail::unit_random_field(g, rng));

  const double k0 = g.fundamental();
  for (int i = 0; i < opt.fields; ++i) {
    const ScalarField& f = fields[static_cast<std::size_t>(i)];
    const ScalarField& h = fields[static_cast<std::size_t>((i + 1) % opt.fields)];
    const Spectrum fh = forward_transform(f);
    const Spectrum hh = forward_transform(h);

    Spectrum sum(g);
    std::vector<Spectrum> blocks;
    for (int q = -1; q <= qm; ++q) {
      blocks.push_back(block(cut, fh, q));
      sum += blocks.back();
    }
    reconstruction.max_residual = std::max(
        reconstruction.max_residual, detail::relative_l2(inverse_transform(sum), f, f.l2_norm()));

    for (int q = -1; q <= qm; ++q) {
      for (int p = q + 2; p <= qm; ++p) {
        const double r = block(cut, blocks[static_cast<std::size_t>(q + 1)], p).l2_norm();
        orthogonality.max_residual = std::max(orthogonality.max_residual, r / f.l2_norm());
      }
    }

    // Delta_q (S_{p-1} f Delta_p h) on the padded grid, |p - q| >= 5.
    for (int p = 1; p <= qm; ++p) {
      const ScalarField prod = detail::on_fine(low_pass(cut, fh, p - 1), fine) *
                               detail::on_fine(block(cut, hh, p), fine);
      const auto norms = block_norms(fine_cut, forward_transform(prod));
      for (int q = -1; q <= fine_cut.q_max(); ++q) {
        if (std::abs(p - q) < 5) continue;
        localization.max_residual =
            std::max(localization.max_residual, norms[static_cast<std::size_t>(q + 1)]);
      }
    }

    const ScalarField exact = exact_product(f, h);
    const ScalarField split = paraproduct(cut, f, h) + paraproduct(cut, h, f) + remainder(cut, f, h);
    bony.max_residual =
        std::max(bony.max_residual, detail::relative_l2(split, exact, exact.l2_norm()));

    for (int q = -1; q <= qm; ++q) {
      const double lo = q < 0 ? 0.0 : kShellInner * std::ldexp(k0, q);
      const double hi = q < 0 ? kBallOuter * k0 : kShellOuter * std::ldexp(k0, q);
      for (int order = 1; order <= 2; ++order) {
        double ratio = 0.0;
        try {
          ratio = bernstein_ratio(cut, f, q, order);
        } catch (const ZeroBlock&) {
          continue;
        }
        const double upper = std::pow(hi, order);
        const double lower = std::pow(lo, order);
        bernstein.max_residual = std::max(
            {bernstein.max_residual, ratio / upper - 1.0, lower > 0.0 ? 1.0 - ratio / lower : 0.0});
      }
    }
  }

  LpReport rep;
  rep.fields = opt.fields;
  rep.seed = opt.seed;
  rep.checks = {partition, reconstruction, orthogonality, localization, bony, bernstein};
  rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rep;
}

inline LpReport cmd_lp_check(const RunConfig& cfg, const fs::path& out,
                             std::optional<int> corrupt_block = std::nullopt) {
  fs::create_directories(out);
  const LpReport rep = lp_check(cfg.grid(), {cfg.lp_fields, cfg.lp_seed, corrupt_block});
  write_text(out / "lp_check.json", rep.to_json().dump(2) + "\n");
  return rep;
}

// ---------------------------------------------------------------------------

struct OracleRow {
  ModeSpectrum coupled;
  ModeSpectrum uncoupled;
};

inline std::vector<OracleRow> oracle_table(const Params& p, double kmin, double kmax, double dk) {
  std::vector<OracleRow> rows;
  const auto n = static_cast<long>(std::floor((kmax - kmin) / dk + 1e-9));
  for (long i = 0; i <= n; ++i) {
    const double kappa = kmin + static_cast<double>(i) * dk;
    rows.push_back({mode_spectrum(kappa, p), mode_spectrum(kappa, p, {false})});
  }
  return rows;
}

inline std::string oracle_csv(const std::vector<OracleRow>& rows) {
  std::string out =
      "kappa,re_lambda_plus,im_lambda_plus,re_lambda_minus,im_lambda_minus,solenoidal,"
      "re_lambda_plus_no_poisson,im_lambda_plus_no_poisson,re_lambda_minus_no_poisson,"
      "im_lambda_minus_no_poisson\n";
  for (const auto& r : rows) {
    const auto& a = r.coupled;
    const auto& b = r.uncoupled;
    const double v[] = {a.kappa,
                        a.lambda_plus.real(),
                        a.lambda_plus.imag(),
                        a.lambda_minus.real(),
                        a.lambda_minus.imag(),
                        a.solenoidal,
                        b.lambda_plus.real(),
                        b.lambda_plus.imag(),
                        b.lambda_minus.real(),
                        b.lambda_minus.imag()};
    for (std::size_t i = 0; i < std::size(v); ++i) out += (i ? "," : "") + format_g17(v[i]);
    out += "\n";
  }
  return out;
}

inline std::vector<OracleRow> cmd_oracle(const RunConfig& cfg, const fs::path& out) {
  fs::create_directories(out);
  const auto rows = oracle_table(cfg.params, cfg.kappa_min, cfg.kappa_max, cfg.kappa_step);
  write_text(out / "oracle.csv", oracle_csv(rows));
  return rows;
}

}  // namespace eplab
