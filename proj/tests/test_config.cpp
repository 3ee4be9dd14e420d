#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include <gtest/gtest.h>

#include "eplab/config.hpp"

using namespace eplab;

namespace {

std::string field_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.field();
  }
  return "<none>";
}

RunConfig rich_config() {
  RunConfig c;
  c.dim = 3;
  c.points = 32;
  c.length = 2.0 * std::numbers::pi;
  c.params = {1.3, 1.4, 0.1 + 0.2, 1.7};
  c.e_mode = FieldMode::projected;
  c.linear = true;
  c.control = {0.001, 0.25, Scheme::rk4_integrating_factor, 3.3, 0.1};
  c.output_directory = "results/a b";
  c.init.modes = {{InitTarget::m, {1, -2, 3}, 1e-3}, {InitTarget::u_solenoidal, {0, 0, 4}, 2.5e-4}};
  c.init.random = {{InitTarget::u_longitudinal, 18446744073709551615ull, 1.0 / 3.0, 0.5, 7.25}};
  c.taus = {0.1, 1.0 / 7.0, 2.0, 1e3};
  c.kappa_min = 0.5;
  c.kappa_max = 4.0;
  c.kappa_step = 0.1;
  c.lp_fields = 17;
  c.lp_seed = 99;
  return c;
}

}  // namespace

TEST(Config, DefaultsFromEmptyText) {
  const RunConfig c = parse_config("");
  EXPECT_EQ(c, RunConfig{});
  EXPECT_EQ(c.points, 128);
  EXPECT_EQ(c.params.gamma, 2.0);
}

TEST(Config, RoundTripIsExact) {
  for (const RunConfig& c : {RunConfig{}, rich_config()}) {
    const std::string text = emit_config(c);
    EXPECT_EQ(parse_config(text), c) << text;
    EXPECT_EQ(emit_config(parse_config(text)), text);
  }
}

TEST(Config, RandomRoundTrips) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    RunConfig c;
    c.params.tau = std::pow(10.0, -3.0 + 6.0 * u(rng));
    c.params.A = u(rng) + 1e-300;
    c.control.t_end = 100.0 * u(rng);
    c.control.sample_interval = 0.01 + u(rng);
    c.init.random = {{InitTarget::m, rng(), u(rng), 0.0, 10.0 * u(rng)}};
    c.taus = {u(rng) + 1e-9, std::pow(10.0, 300.0 * u(rng))};
    EXPECT_EQ(parse_config(emit_config(c)), c);
  }
}

TEST(Config, ParsesSchemaExample) {
  const RunConfig c = parse_config(R"(
[grid]
dim = 2
points = 64

[physics]
gamma = 1
tau = 2
branch = isothermal

[time]
scheme = rk4-integrating-factor
t_end = 5
sample_interval = 0.5

[mode_0]
target = u-longitudinal
wavevector = 1, 0
amplitude = 1e-4

[random_0]
target = m
seed = 42
amplitude = 1e-3
band_min = 2
band_max = 6

[sweep]
taus = 0.1, 0.5, 2
)");
  EXPECT_EQ(c.points, 64);
  EXPECT_TRUE(c.params.isothermal());
  EXPECT_EQ(c.branch, Branch::isothermal);
  EXPECT_EQ(c.control.scheme, Scheme::rk4_integrating_factor);
  ASSERT_EQ(c.init.modes.size(), 1u);
  EXPECT_EQ(c.init.modes[0].target, InitTarget::u_longitudinal);
  EXPECT_EQ(c.init.modes[0].wavevector, (std::array<int, 3>{1, 0, 0}));
  ASSERT_EQ(c.init.random.size(), 1u);
  EXPECT_EQ(c.init.random[0].seed, 42u);
  EXPECT_EQ(c.taus, (std::vector<double>{0.1, 0.5, 2.0}));
  EXPECT_EQ(c.grid().points(), 64);
}

TEST(Config, ErrorsNameTheField) {
  EXPECT_EQ(field_of("[physics]\ngamma = 2\nbranch = isothermal\n"), "physics.branch");
  EXPECT_EQ(field_of("[physics]\ngamma = 1\nbranch = isentropic\n"), "physics.branch");
  EXPECT_EQ(field_of("[random_0]\ntarget = m\namplitude = 1\n"), "random_0.seed");
  EXPECT_EQ(field_of("[grid]\npoints = 64\ncolour = red\n"), "grid.colour");
  EXPECT_EQ(field_of("[gird]\npoints = 64\n"), "gird");
  EXPECT_EQ(field_of("[physics]\ntau = 0.5x\n"), "physics.tau");
  EXPECT_EQ(field_of("[physics]\ntau = -1\n"), "tau");
  EXPECT_EQ(field_of("[grid]\npoints = 63\n"), "grid.points");
  EXPECT_EQ(field_of("[grid]\npoints = 8\n"), "grid.points");
  EXPECT_EQ(field_of("[time]\nscheme = euler\n"), "time.scheme");
  EXPECT_EQ(field_of("[mode_0]\ntarget = m\nwavevector = 0, 0\namplitude = 1\n"), "mode_0.wavevector");
  EXPECT_EQ(field_of("[mode_0]\ntarget = m\nwavevector = 1\namplitude = 1\n"), "mode_0.wavevector");
  EXPECT_EQ(field_of("[mode_0]\ntarget = m\nwavevector = 50, 0\namplitude = 1\n"), "mode_0.wavevector");
  EXPECT_EQ(field_of("[mode_0]\ntarget = rho\nwavevector = 1, 0\namplitude = 1\n"), "mode_0.target");
  EXPECT_EQ(field_of("[sweep]\ntaus = 0.1, -2\n"), "sweep.taus");
  EXPECT_EQ(field_of("[physics]\nlinear = maybe\n"), "physics.linear");
  EXPECT_EQ(field_of("stray = 1\n"), "stray");
  EXPECT_EQ(field_of("[grid\n"), "config");
}

TEST(Config, ErrorMessageCarriesField) {
  try {
    parse_config("[physics]\ngamma = 2\nbranch = isothermal\n");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(std::string(e.what()).rfind("physics.branch: ", 0), 0u);
  }
}

TEST(Config, LoadFromFile) {
  const auto path = std::filesystem::temp_directory_path() / "eplab_test_config.ini";
  {
    std::ofstream out(path);
    out << emit_config(rich_config());
  }
  EXPECT_EQ(load_config(path.string()), rich_config());
  std::filesystem::remove(path);
  EXPECT_THROW(load_config(path.string()), ConfigError);
}

TEST(Config, SeedOverride) {
  RunConfig c = rich_config();
  c.init.random.push_back(c.init.random[0]);
  override_seed(c, 7);
  EXPECT_EQ(c.init.random[0].seed, 7u);
  EXPECT_EQ(c.init.random[1].seed, 8u);
  EXPECT_EQ(c.lp_seed, 7u);
}

TEST(Config, NumberFormattingRoundTrips) {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, 6.283185307179586, 123456789.0, 0.0}) {
    EXPECT_EQ(detail::parse_double("x", format_number(v)), v);
  }
}

#ifdef EPLAB_CONFIG_DIR
TEST(Config, ShippedConfigsParse) {
  int seen = 0;
  for (const auto& entry : std::filesystem::directory_iterator(EPLAB_CONFIG_DIR)) {
    if (entry.path().extension() != ".ini") continue;
    ++seen;
    const RunConfig c = load_config(entry.path().string());
    EXPECT_EQ(parse_config(emit_config(c)), c) << entry.path();
  }
  EXPECT_GE(seen, 1);
}
#endif
