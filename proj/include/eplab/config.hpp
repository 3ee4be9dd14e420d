#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "eplab/integrator.hpp"
#include "eplab/model.hpp"
#include "eplab/params.hpp"

namespace eplab {

enum class Branch { isentropic, isothermal };

struct RunConfig {
  // [grid]
  int dim = 2;
  int points = 128;
  double length = 2.0 * std::numbers::pi;
  // [physics]
  Params params;
  Branch branch = Branch::isentropic;
  FieldMode e_mode = FieldMode::evolved;
  bool linear = false;
  // [time]
  StepControl control;
  // [output]
  std::string output_directory = "out";
  // [mode_N], [random_N]
  InitSpec init;
  // [sweep]
  std::vector<double> taus;
  // [oracle]
  double kappa_min = 0.0;
  double kappa_max = 8.0;
  double kappa_step = 1.0;
  // [lp_check]
  int lp_fields = 200;
  std::uint64_t lp_seed = 1;

  Grid grid() const { return Grid(dim, points, length); }
  RunOptions run_options() const { return {{linear}, e_mode}; }

  friend bool operator==(const RunConfig& a, const RunConfig& b) {
    auto ctl = [](const StepControl& c) {
      return std::tie(c.dt, c.cfl, c.scheme, c.t_end, c.sample_interval);
    };
    auto par = [](const Params& p) { return std::tie(p.A, p.gamma, p.tau, p.nbar); };
    return a.dim == b.dim && a.points == b.points && a.length == b.length &&
           par(a.params) == par(b.params) && a.branch == b.branch && a.e_mode == b.e_mode &&
           a.linear == b.linear && ctl(a.control) == ctl(b.control) &&
           a.output_directory == b.output_directory && a.init == b.init && a.taus == b.taus &&
           a.kappa_min == b.kappa_min && a.kappa_max == b.kappa_max &&
           a.kappa_step == b.kappa_step && a.lp_fields == b.lp_fields && a.lp_seed == b.lp_seed;
  }
};

// Shortest text that parses back to the same double.
inline std::string format_number(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

namespace detail {

using boost::property_tree::ptree;

inline double parse_double(const std::string& field, const std::string& text) {
  double v = 0.0;
  const char* b = text.data();
  const char* e = b + text.size();
  while (b < e && std::isspace(static_cast<unsigned char>(*b))) ++b;
  auto [ptr, ec] = std::from_chars(b, e, v);
  while (ptr < e && std::isspace(static_cast<unsigned char>(*ptr))) ++ptr;
  if (ec != std::errc() || ptr != e || !std::isfinite(v)) {
    throw ConfigError(field, "expected a finite number, got '" + text + "'");
  }
  return v;
}

inline long long parse_integer(const std::string& field, const std::string& text) {
  const double v = parse_double(field, text);
  if (v != std::floor(v) || std::abs(v) > 9.0e15) {
    throw ConfigError(field, "expected an integer, got '" + text + "'");
  }
  return static_cast<long long>(v);
}

inline std::uint64_t parse_unsigned(const std::string& field, const std::string& text) {
  std::uint64_t v = 0;
  const char* b = text.data();
  const char* e = b + text.size();
  auto [ptr, ec] = std::from_chars(b, e, v);
  if (ec != std::errc() || ptr != e) {
    throw ConfigError(field, "expected an unsigned integer, got '" + text + "'");
  }
  return v;
}

inline bool parse_bool(const std::string& field, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw ConfigError(field, "expected true or false, got '" + text + "'");
}

// Whitespace- or comma-separated numbers.
inline std::vector<double> parse_list(const std::string& field, std::string text) {
  std::replace(text.begin(), text.end(), ',', ' ');
  std::istringstream in(text);
  std::vector<double> out;
  std::string tok;
  while (in >> tok) out.push_back(parse_double(field, tok));
  return out;
}

inline std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + format_number(v[i]);
  return s;
}

// Reads one section, rejecting keys that are not in `known`.
class Section {
 public:
  Section(const ptree& tree, std::string name, std::set<std::string> known)
      : name_(std::move(name)) {
    if (auto child = tree.get_child_optional(name_)) node_ = &*child;
    if (node_ == nullptr) return;
    for (const auto& [key, value] : *node_) {
      if (!known.count(key)) throw ConfigError(name_ + "." + key, "unknown key");
    }
  }

  bool present() const { return node_ != nullptr; }
  std::string field(const std::string& key) const { return name_ + "." + key; }

  std::optional<std::string> raw(const std::string& key) const {
    if (node_ == nullptr) return std::nullopt;
    if (auto v = node_->get_optional<std::string>(key)) return *v;
    return std::nullopt;
  }

  void read(const std::string& key, double& out) const {
    if (auto v = raw(key)) out = parse_double(field(key), *v);
  }
  void read(const std::string& key, int& out) const {
    if (auto v = raw(key)) out = static_cast<int>(parse_integer(field(key), *v));
  }
  void read(const std::string& key, bool& out) const {
    if (auto v = raw(key)) out = parse_bool(field(key), *v);
  }
  void read(const std::string& key, std::string& out) const {
    if (auto v = raw(key)) out = *v;
  }
  void read(const std::string& key, std::uint64_t& out) const {
    if (auto v = raw(key)) out = parse_unsigned(field(key), *v);
  }

 private:
  std::string name_;
  const ptree* node_ = nullptr;
};

inline InitTarget read_target(const Section& s) {
  const auto text = s.raw("target");
  if (!text) throw ConfigError(s.field("target"), "missing");
  const auto t = parse_target(*text);
  if (!t) throw ConfigError(s.field("target"), "unknown target '" + *text + "'");
  return *t;
}

inline void validate(const RunConfig& c) {
  if (c.dim != 2 && c.dim != 3) throw ConfigError("grid.dim", "must be 2 or 3");
  if (c.points < Grid::kMinPoints || c.points % 2 != 0) {
    throw ConfigError("grid.points", "must be even and at least 16");
  }
  if (!(c.length > 0.0)) throw ConfigError("grid.length", "must be positive");
  c.params.validate();
  const bool iso = c.params.isothermal();
  if (iso != (c.branch == Branch::isothermal)) {
    throw ConfigError("physics.branch", iso ? "gamma = 1 requires branch = isothermal"
                                            : "branch = isothermal requires gamma = 1");
  }
  if (!(c.control.cfl > 0.0)) throw ConfigError("time.cfl", "must be positive");
  if (!(c.control.t_end >= 0.0)) throw ConfigError("time.t_end", "must be nonnegative");
  if (!(c.control.sample_interval > 0.0)) {
    throw ConfigError("time.sample_interval", "must be positive");
  }
  if (c.control.dt < 0.0) throw ConfigError("time.dt", "must be nonnegative");
  for (std::size_t i = 0; i < c.init.modes.size(); ++i) {
    const auto& m = c.init.modes[i];
    const std::string f = "mode_" + std::to_string(i);
    bool zero = true;
    for (int a = 0; a < c.dim; ++a) {
      if (m.wavevector[a] != 0) zero = false;
      if (std::abs(m.wavevector[a]) > c.points / 3) {
        throw ConfigError(f + ".wavevector", "outside the dealias mask");
      }
    }
    if (zero) throw ConfigError(f + ".wavevector", "must be nonzero");
  }
  for (std::size_t i = 0; i < c.init.random.size(); ++i) {
    const auto& r = c.init.random[i];
    const std::string f = "random_" + std::to_string(i);
    if (!(r.amplitude >= 0.0)) throw ConfigError(f + ".amplitude", "must be nonnegative");
    if (!(r.band_max >= r.band_min) || r.band_min < 0.0) {
      throw ConfigError(f + ".band_min", "band must satisfy 0 <= band_min <= band_max");
    }
  }
  for (double t : c.taus) {
    if (!(t > 0.0)) throw ConfigError("sweep.taus", "every tau must be positive");
  }
  if (!(c.kappa_step > 0.0) || c.kappa_max < c.kappa_min || c.kappa_min < 0.0) {
    throw ConfigError("oracle.kappa_step", "need 0 <= kappa_min <= kappa_max and kappa_step > 0");
  }
  if (c.lp_fields < 1) throw ConfigError("lp_check.fields", "must be at least 1");
}

}  // namespace detail

inline RunConfig parse_config(const std::string& text) {
  using detail::Section;
  detail::ptree tree;
  try {
    std::istringstream in(text);
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError("config", std::string("malformed: ") + e.message() + " (line " +
                                    std::to_string(e.line()) + ")");
  }

  RunConfig c;
  std::vector<std::pair<int, std::string>> modes, randoms;
  for (const auto& [name, node] : tree) {
    if (node.empty() && !node.data().empty()) {
      throw ConfigError(name, "keys must live inside a [section]");
    }
    auto indexed = [&](const std::string& prefix) -> std::optional<int> {
      if (name.rfind(prefix, 0) != 0) return std::nullopt;
      const std::string idx = name.substr(prefix.size());
      return static_cast<int>(detail::parse_integer(name, idx));
    };
    if (auto i = indexed("mode_")) {
      modes.emplace_back(*i, name);
    } else if (auto j = indexed("random_")) {
      randoms.emplace_back(*j, name);
    } else if (!std::set<std::string>{"grid", "physics", "time", "output", "sweep", "oracle",
                                      "lp_check"}
                    .count(name)) {
      throw ConfigError(name, "unknown section");
    }
  }

  const Section grid(tree, "grid", {"dim", "points", "length"});
  grid.read("dim", c.dim);
  grid.read("points", c.points);
  grid.read("length", c.length);

  const Section phys(tree, "physics", {"A", "gamma", "tau", "nbar", "branch", "e_mode", "linear"});
  phys.read("A", c.params.A);
  phys.read("gamma", c.params.gamma);
  phys.read("tau", c.params.tau);
  phys.read("nbar", c.params.nbar);
  phys.read("linear", c.linear);
  std::string branch = c.params.isothermal() ? "isothermal" : "isentropic";
  phys.read("branch", branch);
  if (branch == "isentropic") {
    c.branch = Branch::isentropic;
  } else if (branch == "isothermal") {
    c.branch = Branch::isothermal;
  } else {
    throw ConfigError("physics.branch", "expected isentropic or isothermal, got '" + branch + "'");
  }
  std::string e_mode = "evolved";
  phys.read("e_mode", e_mode);
  if (e_mode == "evolved") {
    c.e_mode = FieldMode::evolved;
  } else if (e_mode == "projected") {
    c.e_mode = FieldMode::projected;
  } else {
    throw ConfigError("physics.e_mode", "expected evolved or projected, got '" + e_mode + "'");
  }

  const Section time(tree, "time", {"scheme", "dt", "cfl", "t_end", "sample_interval"});
  std::string scheme = "rk4";
  time.read("scheme", scheme);
  if (scheme == "rk4") {
    c.control.scheme = Scheme::rk4;
  } else if (scheme == "rk4-integrating-factor") {
    c.control.scheme = Scheme::rk4_integrating_factor;
  } else {
    throw ConfigError("time.scheme", "expected rk4 or rk4-integrating-factor, got '" + scheme + "'");
  }
  time.read("dt", c.control.dt);
  time.read("cfl", c.control.cfl);
  time.read("t_end", c.control.t_end);
  time.read("sample_interval", c.control.sample_interval);

  const Section out(tree, "output", {"directory"});
  out.read("directory", c.output_directory);

  std::sort(modes.begin(), modes.end());
  for (const auto& [i, name] : modes) {
    const Section s(tree, name, {"target", "wavevector", "amplitude"});
    ModeSpec m;
    m.target = detail::read_target(s);
    if (m.target == InitTarget::u_longitudinal || m.target == InitTarget::u_solenoidal ||
        m.target == InitTarget::m || m.target == InitTarget::n) {
      const auto k = s.raw("wavevector");
      if (!k) throw ConfigError(s.field("wavevector"), "missing");
      const auto v = detail::parse_list(s.field("wavevector"), *k);
      if (static_cast<int>(v.size()) != c.dim) {
        throw ConfigError(s.field("wavevector"), "needs one integer per axis");
      }
      for (std::size_t a = 0; a < v.size(); ++a) {
        if (v[a] != std::floor(v[a])) throw ConfigError(s.field("wavevector"), "must be integers");
        m.wavevector[a] = static_cast<int>(v[a]);
      }
    }
    if (!s.raw("amplitude")) throw ConfigError(s.field("amplitude"), "missing");
    s.read("amplitude", m.amplitude);
    c.init.modes.push_back(m);
  }
  std::sort(randoms.begin(), randoms.end());
  for (const auto& [i, name] : randoms) {
    const Section s(tree, name, {"target", "seed", "amplitude", "band_min", "band_max"});
    RandomSpec r;
    r.target = detail::read_target(s);
    if (!s.raw("seed")) throw ConfigError(s.field("seed"), "random initial data needs a seed");
    s.read("seed", r.seed);
    if (!s.raw("amplitude")) throw ConfigError(s.field("amplitude"), "missing");
    s.read("amplitude", r.amplitude);
    s.read("band_min", r.band_min);
    s.read("band_max", r.band_max);
    c.init.random.push_back(r);
  }

  const Section sweep(tree, "sweep", {"taus"});
  if (auto t = sweep.raw("taus")) c.taus = detail::parse_list("sweep.taus", *t);

  const Section oracle(tree, "oracle", {"kappa_min", "kappa_max", "kappa_step"});
  oracle.read("kappa_min", c.kappa_min);
  oracle.read("kappa_max", c.kappa_max);
  oracle.read("kappa_step", c.kappa_step);

  const Section lp(tree, "lp_check", {"fields", "seed"});
  lp.read("fields", c.lp_fields);
  lp.read("seed", c.lp_seed);

  detail::validate(c);
  return c;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

inline std::string emit_config(const RunConfig& c) {
  using detail::join;
  std::ostringstream o;
  o << "[grid]\n"
    << "dim = " << c.dim << "\n"
    << "points = " << c.points << "\n"
    << "length = " << format_number(c.length) << "\n\n"
    << "[physics]\n"
    << "A = " << format_number(c.params.A) << "\n"
    << "gamma = " << format_number(c.params.gamma) << "\n"
    << "tau = " << format_number(c.params.tau) << "\n"
    << "nbar = " << format_number(c.params.nbar) << "\n"
    << "branch = " << (c.branch == Branch::isothermal ? "isothermal" : "isentropic") << "\n"
    << "e_mode = " << to_string(c.e_mode) << "\n"
    << "linear = " << (c.linear ? "true" : "false") << "\n\n"
    << "[time]\n"
    << "scheme = " << to_string(c.control.scheme) << "\n"
    << "dt = " << format_number(c.control.dt) << "\n"
    << "cfl = " << format_number(c.control.cfl) << "\n"
    << "t_end = " << format_number(c.control.t_end) << "\n"
    << "sample_interval = " << format_number(c.control.sample_interval) << "\n\n"
    << "[output]\n"
    << "directory = " << c.output_directory << "\n";
  for (std::size_t i = 0; i < c.init.modes.size(); ++i) {
    const auto& m = c.init.modes[i];
    std::vector<double> k(m.wavevector.begin(), m.wavevector.begin() + c.dim);
    o << "\n[mode_" << i << "]\n"
      << "target = " << to_string(m.target) << "\n"
      << "wavevector = " << join(k) << "\n"
      << "amplitude = " << format_number(m.amplitude) << "\n";
  }
  for (std::size_t i = 0; i < c.init.random.size(); ++i) {
    const auto& r = c.init.random[i];
    o << "\n[random_" << i << "]\n"
      << "target = " << to_string(r.target) << "\n"
      << "seed = " << r.seed << "\n"
      << "amplitude = " << format_number(r.amplitude) << "\n"
      << "band_min = " << format_number(r.band_min) << "\n"
      << "band_max = " << format_number(r.band_max) << "\n";
  }
  if (!c.taus.empty()) o << "\n[sweep]\ntaus = " << join(c.taus) << "\n";
  o << "\n[oracle]\n"
    << "kappa_min = " << format_number(c.kappa_min) << "\n"
    << "kappa_max = " << format_number(c.kappa_max) << "\n"
    << "kappa_step = " << format_number(c.kappa_step) << "\n\n"
    << "[lp_check]\n"
    << "fields = " << c.lp_fields << "\n"
    << "seed = " << c.lp_seed << "\n";
  return o.str();
}

// --seed: seed i of the random initial data becomes S + i.
inline void override_seed(RunConfig& c, std::uint64_t seed) {
  for (std::size_t i = 0; i < c.init.random.size(); ++i) c.init.random[i].seed = seed + i;
  c.lp_seed = seed;
}

}  // namespace eplab
