#include "csim/lattice.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <cmath>

using namespace csim;
using namespace csim::lattice;

TEST_SUITE("lattice") {

TEST_CASE("reference lattice geometry") {
  const auto lat = build_lattice(2 * kPi, kPi / 256);
  CHECK(lat.n_sites() == 1023);
  CHECK(lat.dx() == doctest::Approx(kPi / 256));
  CHECK(std::abs(lat.position(lat.site_at_multiple_of_pi(0))) <= 1e-12);
  CHECK(std::abs(lat.position(lat.site_at_multiple_of_pi(-1)) + kPi) <= 1e-12);
}

TEST_CASE("boundary detectors and coarse targets") {
  CHECK_THROWS_AS(build_lattice(kPi, kPi / 2), ConfigError);
  const auto coarse = build_lattice(2 * kPi, 10.0);
  CHECK(coarse.n_sites() >= kMinInteriorSites);
  CHECK_THROWS_AS(coarse.site_at_multiple_of_pi(2), ConfigError);
}

TEST_CASE("sampled vacuum momentum kernel is positive definite") {
  const LatticeSpec lat(2, 16);
  REQUIRE(lat.n_sites() == 63);
  const auto kernel = box_vacuum_kernel(lat);
  CHECK(kernel.phi_pi(0.1, 0.2) == 0.0);
  const auto s = sample_kernel(kernel, lat);
  const Eigen::MatrixXd pp = s.pi_pi;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(pp);
  CHECK(es.eigenvalues().minCoeff() > 0.0);
}

TEST_CASE("smeared windows") {
  const LatticeSpec lat(3, 64);
  const double width = kPi / 32;
  const Vector w = smeared_window(0.0, width, lat);
  CHECK(std::abs(w.sum() * lat.dx() - 1.0) <= 1e-10);
  const Vector constant = Vector::Constant(lat.n_sites(), 2.5);
  CHECK(std::abs(w.dot(constant) * lat.dx() - 2.5) <= 1e-10);
  const Vector far = smeared_window(6.5 * width * 2, width, lat);
  CHECK(w.dot(far) * lat.dx() < 1e-8);
  CHECK_THROWS_AS(smeared_window(3 * kPi - 0.01, width, lat), ConfigError);
}

TEST_CASE("box modes vanish on the walls and are orthonormal") {
  const double l = 2 * kPi;
  CHECK(std::abs(box_mode(3, -l, l)) <= 1e-14);
  CHECK(std::abs(box_mode(3, l, l)) <= 1e-12);
  const LatticeSpec lat(2, 64);
  double overlap = 0.0, norm = 0.0;
  for (int i = 0; i < lat.n_sites(); ++i) {
    const double x = lat.position(i);
    overlap += box_mode(2, x, l) * box_mode(5, x, l) * lat.dx();
    norm += box_mode(5, x, l) * box_mode(5, x, l) * lat.dx();
  }
  CHECK(std::abs(overlap) <= 1e-12);
  CHECK(norm == doctest::Approx(1.0).epsilon(1e-12));
}

}
