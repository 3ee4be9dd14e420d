#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "eplab/commands.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 2;
constexpr int kRuntimeViolation = 3;

struct Options {
  std::string config;
  std::string out;
  int threads = 1;
  std::optional<std::uint64_t> seed;
  std::vector<double> taus;
  std::optional<int> corrupt_block;
};

struct Loaded {
  eplab::RunConfig cfg;
  std::string text;
};

Loaded load(const Options& o, bool required) {
  Loaded l;
  if (o.config.empty()) {
    if (required) throw eplab::ConfigError("--config", "this subcommand needs a config file");
    l.text = eplab::emit_config(l.cfg);
  } else {
    std::ifstream in(o.config);
    if (!in) throw eplab::ConfigError("--config", "cannot open '" + o.config + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    l.text = buf.str();
    l.cfg = eplab::parse_config(l.text);
  }
  if (o.seed) eplab::override_seed(l.cfg, *o.seed);
  if (!o.out.empty()) l.cfg.output_directory = o.out;
  return l;
}

std::string show(double v) { return eplab::format_g17(v); }

int run(const Options& o) {
  const auto l = load(o, true);
  const auto r = eplab::cmd_run(l.cfg, l.text, l.cfg.output_directory);
  std::cout << "status: " << (r.status == eplab::RunStatus::ok ? "ok" : "violation") << "\n";
  if (!r.message.empty()) std::cout << "message: " << r.message << "\n";
  std::cout << "dt: " << show(r.dt) << "\nsamples: " << r.record.samples.size() << "\n";
  for (const auto& f : r.record.fits) {
    std::cout << "mu[" << f.quantity << "]: " << show(f.fit.mu) << " (" << f.status << ")\n";
  }
  if (r.oracle.mu) std::cout << "mu[oracle]: " << show(*r.oracle.mu) << "\n";
  std::cout << "output: " << l.cfg.output_directory << "\n";
  return r.status == eplab::RunStatus::ok ? kOk : kRuntimeViolation;
}

int sweep(const Options& o) {
  const auto l = load(o, true);
  const auto taus = o.taus.empty() ? l.cfg.taus : o.taus;
  const auto r = eplab::cmd_sweep_tau(l.cfg, taus, l.cfg.output_directory, o.threads);
  bool ok = true;
  std::cout << "tau,mu_fit,mu_oracle,status\n";
  for (const auto& row : r.rows) {
    std::cout << show(row.tau) << "," << show(row.mu_fit) << "," << show(row.mu_oracle) << ","
              << row.status << "\n";
    if (row.status.rfind("violation", 0) == 0 || row.status.rfind("error", 0) == 0) ok = false;
  }
  auto slope = [](const char* name, const std::optional<double>& v) {
    if (v) std::cout << "slope[" << name << "]: " << show(*v) << "\n";
  };
  slope("oracle, tau<=1", r.oracle_slope_small);
  slope("oracle, tau>1", r.oracle_slope_large);
  slope("fit, tau<=1", r.fit_slope_small);
  slope("fit, tau>1", r.fit_slope_large);
  return ok ? kOk : kRuntimeViolation;
}

int lp(const Options& o) {
  const auto l = load(o, false);
  const auto rep = eplab::cmd_lp_check(l.cfg, l.cfg.output_directory, o.corrupt_block);
  for (const auto& c : rep.checks) {
    std::cout << (c.passed() ? "PASS " : "FAIL ") << c.name << " max_residual=" << show(c.max_residual)
              << " tolerance=" << show(c.tolerance) << "\n";
  }
  std::cout << "fields: " << rep.fields << " seconds: " << show(rep.seconds) << "\n";
  return kOk;
}

int oracle(const Options& o) {
  const auto l = load(o, false);
  std::cout << eplab::oracle_csv(eplab::cmd_oracle(l.cfg, l.cfg.output_directory));
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Euler-Poisson relaxation laboratory"};
  app.require_subcommand(1);
  Options o;
  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "Config file (INI)");
    sub->add_option("--out", o.out, "Output directory (overrides [output] directory)");
    sub->add_option("--threads", o.threads, "Worker threads for sweeps")->check(CLI::PositiveNumber);
    sub->add_option("--seed", o.seed, "Seed for random initial data and fields");
  };
  auto* run_cmd = app.add_subcommand("run", "Integrate one trajectory");
  auto* sweep_cmd = app.add_subcommand("sweep-tau", "One run per relaxation time");
  auto* lp_cmd = app.add_subcommand("lp-check", "Littlewood-Paley property suite");
  auto* oracle_cmd = app.add_subcommand("oracle", "Linearized spectrum table");
  for (auto* s : {run_cmd, sweep_cmd, lp_cmd, oracle_cmd}) common(s);
  sweep_cmd->add_option("--taus", o.taus, "Relaxation times (overrides [sweep] taus)");
  lp_cmd->add_option("--corrupt-block", o.corrupt_block,
                     "Scale this block's cutoff by 1.01 (negative control)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*run_cmd) return run(o);
    if (*sweep_cmd) return sweep(o);
    if (*lp_cmd) return lp(o);
    return oracle(o);
  } catch (const eplab::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntimeViolation;
  }
}
