#include "csim/geometry.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace csim;
using namespace csim::geometry;

TEST_SUITE("geometry") {

TEST_CASE("anchor event of the wavy chart") {
  const ChartParams c(0.5);
  const auto q = to_alt({kPi / 2, 0.0}, c);
  CHECK(std::abs(q.eta - (kPi - 1.0) / 2.0) <= 1e-12);
  CHECK(std::abs(q.xi) <= 1e-12);
  const auto p = from_alt(q, c);
  CHECK(std::abs(p.t - kPi / 2) <= 1e-12);
  CHECK(std::abs(p.x) <= 1e-12);
}

TEST_CASE("identity chart and overlap slices") {
  const ChartParams zero(0.0);
  const auto q = to_alt({1.3, -2.1}, zero);
  CHECK(q.eta == doctest::Approx(1.3).epsilon(1e-15));
  CHECK(q.xi == doctest::Approx(-2.1).epsilon(1e-15));
  for (double a : {0.0, 0.3, 0.9}) {
    for (double x : {-2.0, 0.0, 1.0}) CHECK(std::abs(to_alt({kPi, x}, ChartParams(a)).eta - kPi) <= 1e-14);
  }
  CHECK(overlap_slice(kPi));
  CHECK(overlap_slice(0.0));
  CHECK_FALSE(overlap_slice(kPi / 2));
}

TEST_CASE("round trip and Jacobian determinant on random events") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> ut(0.0, kPi), ux(-2 * kPi, 2 * kPi);
  const ChartParams c(0.9);
  for (int k = 0; k < 1000; ++k) {
    const EventTX p{ut(rng), ux(rng)};
    const auto back = from_alt(to_alt(p, c), c);
    REQUIRE(std::abs(back.t - p.t) <= 1e-12);
    REQUIRE(std::abs(back.x - p.x) <= 1e-12);
    REQUIRE(std::abs(jacobian(p, c).determinant - 1.0 / conformal_factor(p, c)) <= 1e-12);
  }
}

TEST_CASE("conformal factor on the worldline x = -pi") {
  const ChartParams c(0.5);
  for (int k = 0; k < 100; ++k) {
    const double t = 0.05 * k;
    const double expected = 1.0 / std::pow(1.0 + 0.5 * std::cos(t), 2);
    REQUIRE(std::abs(conformal_factor({t, -kPi}, c) - expected) <= 1e-12);
  }
  CHECK(conformal_factor({kPi / 2, 0.0}, c) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(conformal_factor({0.4, 0.7}, ChartParams(0.0)) == 1.0);
}

TEST_CASE("Jacobian on the overlap slice t = pi") {
  const ChartParams c(0.5);
  for (double x : {-1.0, 0.3, 2.0}) {
    const auto j = jacobian({kPi, x}, c);
    CHECK(std::abs(j.partials[0][1]) <= 1e-14);
    CHECK(std::abs(j.partials[1][0]) <= 1e-14);
    CHECK(j.partials[0][0] == doctest::Approx(1.0 + 0.5 * std::cos(x)));
    CHECK(j.partials[1][1] == doctest::Approx(1.0 + 0.5 * std::cos(x)));
  }
}

TEST_CASE("worldline clocks") {
  const ChartParams c(0.5);
  const WorldlineClock origin(0.0, Frame::Eta, c);
  CHECK(std::abs(origin.coordinate_time(kPi / 2) - (kPi / 2 - 0.5)) <= 1e-12);
  const WorldlineClock left(-kPi, Frame::Eta, c);
  const double t1 = 1.1;
  CHECK(std::abs(left.coordinate_time(t1) - (t1 + 0.5 * std::sin(t1))) <= 1e-12);
  CHECK(std::abs(left.proper_time(left.coordinate_time(t1)) - t1) <= 1e-12);
  CHECK(left.redshift(0.0) == doctest::Approx(2.0 / 3.0));
  const WorldlineClock flat(0.0, Frame::Eta, ChartParams(0.0));
  CHECK(flat.coordinate_time(0.7) == doctest::Approx(0.7));
}

TEST_CASE("chart amplitude must lie in [0, 1)") {
  CHECK_THROWS_AS(ChartParams(1.0), ConfigError);
  CHECK_THROWS_AS(ChartParams(-0.1), ConfigError);
}

}
