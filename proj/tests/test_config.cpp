#include "csim/config.hpp"

#include <doctest.h>

#include <string>

using namespace csim;

namespace {

const char* kBase = R"(# minimal scenario
[scenario]
name = small
chart_amplitude = 1/2
box_half_width_in_pi = 3
target_dx_in_pi = 1/32

[detector]
name = A
omega = 1
coupling = 0.4
position_in_pi = 0

[measurement]
detector = A
g = 1
frame = t
time_in_pi = 1/2
)";

std::string error_of(const std::string& text) {
  try {
    config::parse_scenario(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_SUITE("config") {

TEST_CASE("parses the minimal scenario") {
  const auto cfg = config::parse_scenario(kBase);
  CHECK(cfg.name == "small");
  CHECK(cfg.amplitude == 0.5);
  CHECK(cfg.lattice().dx() == doctest::Approx(kPi / 32));
  REQUIRE(cfg.detectors.size() == 1);
  CHECK(cfg.detectors[0].coupling == 0.4);
  REQUIRE(cfg.measurements.size() == 1);
  CHECK(cfg.measurements[0].time == doctest::Approx(kPi / 2));
  CHECK(cfg.integrator.dt_factor == 0.999);
  CHECK(cfg.tolerances.consistency == 1e-2);
}

TEST_CASE("fractions") {
  CHECK(config::parse_number("3/4") == 0.75);
  CHECK(config::parse_number(" -2.5 ") == -2.5);
  CHECK_THROWS_AS(config::parse_number("1/0"), ConfigError);
  CHECK_THROWS_AS(config::parse_number("abc"), ConfigError);
}

TEST_CASE("errors name the line and key") {
  const std::string unknown = std::string(kBase) + "[windows]\nwidht_in_pi = 1/16\n";
  const auto msg = error_of(unknown);
  CHECK(msg.find("line 20") != std::string::npos);
  CHECK(msg.find("widht_in_pi") != std::string::npos);

  std::string bad_a = kBase;
  bad_a.replace(bad_a.find("1/2\nbox"), 3, "1.5");
  const auto amsg = error_of(bad_a);
  CHECK(amsg.find("line 4") != std::string::npos);
  CHECK(amsg.find("chart_amplitude") != std::string::npos);

  CHECK(error_of(std::string(kBase) + "[integrator]\ndt_factor = 1\n").find("dt_factor") != std::string::npos);
  CHECK(error_of(std::string(kBase) + "orphan line\n").find("line 19") != std::string::npos);
  CHECK(error_of(std::string(kBase) + "[measurement]\ndetector = Z\ng = 1\nframe = t\ntime = 1\n")
            .find("Z") != std::string::npos);
}

TEST_CASE("semantic checks") {
  std::string late = kBase;
  late.replace(late.find("time_in_pi = 1/2"), 16, "time_in_pi = 3/2");
  CHECK_FALSE(error_of(late).empty());
  std::string off_grid = kBase;
  off_grid.replace(off_grid.find("position_in_pi = 0"), 18, "position_in_pi = 1/2");
  CHECK_FALSE(error_of(off_grid).empty());
}

TEST_CASE("hashing and version") {
  CHECK(config::fnv1a("") == 0xcbf29ce484222325ULL);
  CHECK(config::hex64(config::fnv1a("a")) == "af63dc4c8601ec8c");
  CHECK(config::version_string().rfind("collapse_sim ", 0) == 0);
}

}
