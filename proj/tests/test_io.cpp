#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "sqgate/config.hpp"
#include "sqgate/csv.hpp"

using namespace sqgate;

namespace {

const char* kMinimalConfig = R"([device]
L = 100e-12
C = 40e-15
beta_L = 1.2
)";

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("double formatting round-trips and stays shortest") {
  CHECK(format_double(0.5) == "0.5");
  CHECK(format_double(0.4997) == "0.4997");
  CHECK(format_double(2e-4) == "2e-04");
  CHECK(format_double(1.0) == "1");
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> d(-1e6, 1e6);
  for (int i = 0; i < 500; ++i) {
    const double v = d(rng) * std::pow(10.0, int(rng() % 20) - 10);
    CHECK(std::stod(format_double(v)) == v);
  }
}

TEST_CASE("csv emission") {
  const auto dir = std::filesystem::temp_directory_path() / "sqgate_csv_test";
  std::filesystem::create_directories(dir);

  SUBCASE("empty map gives a header-only file with trailing newline") {
    LeakageMap empty;
    empty.method = "ita";
    const auto path = (dir / "empty.csv").string();
    emit_csv(leakage_map_csv(empty), path);
    CHECK(slurp(path) ==
          "x_e1,x_e2,kappa,eta,eta_00,eta_01,eta_10,eta_11,flag\n");
  }

  SUBCASE("re-emission is byte identical") {
    LeakageMap m;
    m.method = "ita";
    m.grid.base = WorkingParams{0.499, 0.4997, 5e-4};
    LeakagePoint p;
    p.wp = m.grid.base;
    p.eta = 0.5;
    p.component_eta = {0.5, 0.25, 0.125, 0.0625};
    m.points.push_back(p);
    const auto p1 = (dir / "a.csv").string();
    const auto p2 = (dir / "b.csv").string();
    emit_csv(leakage_map_csv(m), p1);
    emit_csv(leakage_map_csv(m), p2);
    const std::string s = slurp(p1);
    CHECK(s == slurp(p2));
    CHECK(s.find("0.5") != std::string::npos);
    CHECK(s.find("0.50000001") == std::string::npos);
  }

  SUBCASE("ragged rows are rejected") {
    CsvTable t;
    t.header = {"a", "b"};
    t.rows.push_back({"1"});
    CHECK_THROWS_AS(emit_csv(t, (dir / "bad.csv").string()),
                    InvalidParameterError);
  }
}

TEST_CASE("minimal config applies the defaults") {
  const RunConfig c = parse_config_text(kMinimalConfig);
  CHECK(c.points == 64);
  CHECK(c.states == 20);
  CHECK(c.drive_amplitude == 2e-4);
  CHECK(c.backend == "product");
  CHECK(c.product_basis == 10);
  CHECK(c.window_lo == 0.05);
  CHECK(c.window_hi == 0.95);
  CHECK(c.photon_aggregation == "max");
  CHECK(c.fixed.bias1 == 0.499);
  CHECK(c.fixed.bias2 == 0.49985);
  CHECK(c.fixed.coupling == 5e-4);
  CHECK(c.evaluator == "ita");
  CHECK(c.step_divisor == 64);
  CHECK(c.axes.empty());
  CHECK(c.scales().rho == doctest::Approx(810.9332629613574));
}

TEST_CASE("config rejects unknown and malformed input") {
  CHECK_THROWS_WITH_AS(
      parse_config_text("[devics]\nL = 1\n"),
      doctest::Contains("devics"), ConfigError);
  CHECK_THROWS_WITH_AS(
      parse_config_text(std::string(kMinimalConfig) + "[grid]\npoinds = 64\n"),
      doctest::Contains("poinds"), ConfigError);
  CHECK_THROWS_AS(
      parse_config_text(std::string(kMinimalConfig) + "[grid]\npoints = 15\n"),
      ConfigError);
  CHECK_THROWS_AS(parse_config_text("[device]\nL = 100e-12\nC = 40e-15\n"),
                  ConfigError);  // neither beta_L nor I_c
  CHECK_THROWS_AS(
      parse_config_text(std::string(kMinimalConfig) + "[drive]\nx_m0 = -1\n"),
      ConfigError);
  CHECK_THROWS_AS(
      parse_config_text(std::string(kMinimalConfig) +
                        "[sweep]\naxis1 = kappa 1e-4\n"),
      ConfigError);
  CHECK_THROWS_AS(parse_config_text(std::string(kMinimalConfig) +
                                    "[sweep]\nevaluator = itb\n"),
                  ConfigError);
  CHECK_THROWS_AS(parse_config_text("[device]\nL = 100e-12\nL = 1\n"),
                  ConfigError);  // duplicate key
}

TEST_CASE("beta_L and I_c must agree when both are given") {
  const double ic = 1.2 * kFluxQuantum / (2.0 * kPi * 100e-12);
  std::ostringstream good;
  good.precision(17);
  good << "[device]\nL = 100e-12\nC = 40e-15\nbeta_L = 1.2\nI_c = " << ic
       << "\n";
  CHECK_NOTHROW(parse_config_text(good.str()));
  std::ostringstream bad;
  bad.precision(17);
  bad << "[device]\nL = 100e-12\nC = 40e-15\nbeta_L = 1.2\nI_c = "
      << ic * 1.0001 << "\n";
  CHECK_THROWS_AS(parse_config_text(bad.str()), ConfigError);
}

TEST_CASE("normalization is a parse fixed point") {
  const std::string full = std::string(kMinimalConfig) +
                           "[sweep]\naxis1 = kappa 1e-4 0.00125 20\n"
                           "axis2 = x_e2 0.4985 0.49995 20\n"
                           "[dm]\nstep_divisor = 32\n";
  const RunConfig c1 = parse_config_text(full);
  const std::string echo1 = c1.normalized();
  const RunConfig c2 = parse_config_text(echo1);
  CHECK(c2.normalized() == echo1);
  CHECK(c2.hash() == c1.hash());
  CHECK(c1.axes.size() == 2);
  CHECK(c1.axes[0].count == 20);
}

TEST_CASE("axis bounds must stay inside the working window") {
  CHECK_THROWS_AS(parse_config_text(std::string(kMinimalConfig) +
                                    "[sweep]\naxis1 = x_e2 0.40 0.50 5\n"),
                  InvalidParameterError);
}

TEST_CASE("envelope carries the config hash of its echo") {
  const RunConfig c = parse_config_text(kMinimalConfig);
  const auto dir =
      (std::filesystem::temp_directory_path() / "sqgate_env_test").string();
  ResultEnvelope env;
  env.tool_version = kToolVersion;
  env.command = "spectrum";
  env.method = "spectro";
  env.wall_seconds = 1.25;
  env.config_hash = c.hash();
  env.payload = {"spectrum.csv"};
  env.config_echo = c.normalized();
  write_envelope(dir, env);

  const std::string envelope = slurp(std::filesystem::path(dir) / "envelope.txt");
  const std::string echo = slurp(std::filesystem::path(dir) / "config_echo.cfg");
  CHECK(fnv1a(echo) == c.hash());
  char hex[19];
  std::snprintf(hex, sizeof(hex), "0x%016llx",
                static_cast<unsigned long long>(c.hash()));
  CHECK(envelope.find(hex) != std::string::npos);
  const auto marker = envelope.find("--- config ---\n");
  REQUIRE(marker != std::string::npos);
  CHECK(envelope.substr(marker + 15) == echo);
}
