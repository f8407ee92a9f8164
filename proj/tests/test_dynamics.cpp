#include "csim/dynamics.hpp"

#include <doctest.h>

#include <cmath>

using namespace csim;
using namespace csim::dynamics;

namespace {

const lattice::LatticeSpec kLat(3, 32);
const geometry::ChartParams kChart(0.5);
const std::vector<gaussian::DetectorSpec> kPair{{"A", 1.0, 0.4, -kPi}, {"B", 1.0, 0.4, 0.0}};

}  // namespace

TEST_SUITE("dynamics") {

TEST_CASE("uncoupled Hamiltonian is block diagonal") {
  const std::vector<gaussian::DetectorSpec> free{{"A", 1.0, 0.0, 0.0}};
  const auto h = build_hamiltonian(Frame::T, kLat, free, kChart);
  const Matrix m = h.dense(0.3);
  const auto& lay = h.layout();
  CHECK(m.row(lay.q(0)).cwiseAbs().sum() == doctest::Approx(1.0));
  CHECK(m.row(lay.p(0)).cwiseAbs().sum() == doctest::Approx(1.0));
}

TEST_CASE("flat chart makes both frames identical") {
  const auto ht = build_hamiltonian(Frame::T, kLat, kPair, geometry::ChartParams(0.0));
  const auto he = build_hamiltonian(Frame::Eta, kLat, kPair, geometry::ChartParams(0.0));
  for (double t : {0.0, 0.7, 2.0}) CHECK((ht.dense(t) - he.dense(t)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("eta-frame detector rate at x = -pi") {
  const auto h = build_hamiltonian(Frame::Eta, kLat, kPair, kChart);
  CHECK(h.detector_rate(0, 0.0) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(h.detector_rate(0, 0.0) * h.detector_rate(0, 0.0) ==
        doctest::Approx(geometry::conformal_factor({0.0, -kPi}, kChart)).epsilon(1e-12));
}

TEST_CASE("detectors must sit at multiples of pi and be underdamped") {
  CHECK_THROWS_AS(build_hamiltonian(Frame::T, kLat, {{"A", 1.0, 0.4, 0.5}}, kChart), ConfigError);
  CHECK_THROWS_AS(build_hamiltonian(Frame::T, kLat, {{"A", 0.1, 1.0, 0.0}}, kChart), UnsupportedError);
}

TEST_CASE("CFL bound on the step") {
  CHECK_THROWS_AS(step_count(0.0, 1.0, 0.1, 1.0), ConfigError);
  CHECK_THROWS_AS(step_count(0.0, 1.0, 0.1, 0.0), ConfigError);
  CHECK(step_count(0.0, kPi, kPi / 32, 0.999) == 33);
}

TEST_CASE("zero interval gives the identity") {
  const auto h = build_hamiltonian(Frame::T, kLat, kPair, kChart);
  const auto p = integrate_propagator(h, 0.5, 0.5);
  CHECK(p.steps == 0);
  CHECK(p.s.isIdentity(0.0));
}

TEST_CASE("propagators are symplectic in both frames") {
  for (Frame f : {Frame::T, Frame::Eta}) {
    const auto h = build_hamiltonian(f, kLat, kPair, kChart);
    const auto p = integrate_propagator(h, 0.0, kPi);
    CHECK(p.symplectic_defect <= 1e-8);
    CHECK((symplectic_inverse(p.s) * p.s - Matrix::Identity(p.s.rows(), p.s.cols())).cwiseAbs().maxCoeff() <= 1e-9);
  }
}

TEST_CASE("free field pulse splits into two half pulses at unit speed") {
  const lattice::LatticeSpec lat(3, 64);
  const auto h = build_hamiltonian(Frame::T, lat, {}, kChart);
  const auto& lay = h.layout();
  const double t = kPi / 2;
  Matrix x = Matrix::Zero(lay.dim(), 1);
  for (int i = 0; i < lat.n_sites(); ++i)
    x(lay.phi(i), 0) = lattice::gaussian_window(lat.position(i), 0.0, 0.15);
  advance(h, x, 0.0, t, step_count(0.0, t, lat.dx(), 0.999));
  double peak = 0.0;
  int at = 0;
  for (int i = lat.site_at_multiple_of_pi(0); i < lat.n_sites(); ++i) {
    if (x(lay.phi(i), 0) > peak) {
      peak = x(lay.phi(i), 0);
      at = i;
    }
  }
  CHECK(std::abs(lat.position(at) - t) <= 2 * lat.dx());
  CHECK(peak == doctest::Approx(0.5 * lattice::gaussian_window(0.0, 0.0, 0.15)).epsilon(0.03));
}

TEST_CASE("free vacuum with ground detectors is stationary") {
  // The split-step flow conserves a modified energy that differs from the
  // lattice one for near-Nyquist modes, so stationarity holds for smeared
  // observables and improves as O(dx^2).
  const std::vector<gaussian::DetectorSpec> free{{"A", 1.0, 0.0, 0.0}};
  std::vector<double> change;
  for (int m : {16, 32}) {
    const lattice::LatticeSpec lat(2, m);
    const auto st = gaussian::assemble_initial_state(lat, free, lattice::box_vacuum_kernel(lat),
                                                     Frame::T, kChart);
    const auto h = build_hamiltonian(Frame::T, lat, free, kChart);
    const auto out = evolve(st, integrate_propagator(h, 0.0, kPi));
    const auto& lay = st.layout;
    CHECK(std::abs(out.sigma(lay.q(0), lay.q(0)) - 0.5) <= 1e-12);
    CHECK(std::abs(out.sigma(lay.p(0), lay.p(0)) - 0.5) <= 1e-12);
    std::vector<gaussian::Observable> obs;
    for (double x : {-1.0, 0.0, 1.0}) {
      const Vector w = lattice::smeared_window(x, kPi / 8, lat);
      obs.push_back(gaussian::Observable::field(w * lat.dx()));
      obs.push_back(gaussian::Observable::momentum(w));
    }
    const Matrix a = gaussian::smeared_correlator_matrix(st, obs);
    const Matrix b = gaussian::smeared_correlator_matrix(out, obs);
    change.push_back((a - b).norm() / a.norm());
  }
  CHECK(change[1] < 1e-2);
  CHECK(std::log2(change[0] / change[1]) >= 1.5);
}

TEST_CASE("evolution preserves the symplectic spectrum") {
  const lattice::LatticeSpec lat(2, 16);
  const auto st = gaussian::assemble_initial_state(lat, kPair, lattice::box_vacuum_kernel(lat),
                                                   Frame::Eta, kChart);
  const auto h = build_hamiltonian(Frame::Eta, lat, kPair, kChart);
  const auto out = evolve(st, integrate_propagator(h, 0.0, 2.0));
  const Vector a = gaussian::symplectic_eigenvalues(st.sigma);
  const Vector b = gaussian::symplectic_eigenvalues(out.sigma);
  CHECK((a - b).cwiseAbs().maxCoeff() <= 1e-8);
  const gaussian::CovarianceState same = evolve(st, integrate_propagator(h, 0.0, 0.0));
  CHECK((same.sigma - st.sigma).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("damped oscillator oracle") {
  const auto free = detector_mode_oracle(1.3, 0.0, 0.8);
  CHECK(free.phi == doctest::Approx(std::cos(1.3 * 0.8)));
  CHECK(free.f == doctest::Approx(std::sin(1.3 * 0.8) / 1.3));
  CHECK(free.pi == doctest::Approx(-1.3 * std::sin(1.3 * 0.8)));
  CHECK(free.p == doctest::Approx(std::cos(1.3 * 0.8)));
  // Reference values from an independent RK45 integration (rtol 1e-12) of
  // q'' + 2 gamma q' + q = 0, gamma = 0.04, to tau = pi.
  const auto m = detector_mode_oracle(1.0, 0.4, kPi);
  CHECK(m.phi == doctest::Approx(-0.8818198249).epsilon(1e-8));
  CHECK(m.f == doctest::Approx(0.0022191460).epsilon(1e-6));
  CHECK_THROWS_AS(detector_mode_oracle(0.01, 1.0, 1.0), UnsupportedError);
}

TEST_CASE("lattice detector converges to the oracle") {
  const std::vector<gaussian::DetectorSpec> one{{"A", 1.0, 0.4, 0.0}};
  const std::vector<double> taus{kPi / 4, kPi / 2, 3 * kPi / 4, kPi};
  const auto coarse = compare_detector_oracle(
      build_hamiltonian(Frame::T, lattice::LatticeSpec(3, 32), one, kChart), 0, taus);
  const auto fine = compare_detector_oracle(
      build_hamiltonian(Frame::T, lattice::LatticeSpec(3, 64), one, kChart), 0, taus);
  CHECK(fine.max() < coarse.max());
  CHECK(std::log2(coarse.max() / fine.max()) >= 1.0);
}

TEST_CASE("Huygens composition") {
  for (Frame f : {Frame::T, Frame::Eta}) {
    const auto h = build_hamiltonian(f, kLat, kPair, kChart);
    CHECK(huygens_check(h, 0.0, kPi / 2, kPi).defect <= 1e-8);
    CHECK(huygens_check(h, 0.0, 0.0, kPi).defect == 0.0);
  }
  const auto h = build_hamiltonian(Frame::T, kLat, kPair, kChart);
  CHECK_THROWS_AS(huygens_check(h, 1.0, 0.5, 2.0), ConfigError);
}

TEST_CASE("retarded influence between detectors a distance pi apart") {
  const auto h = build_hamiltonian(Frame::T, kLat, kPair, kChart);
  const auto rep = retarded_delay_check(h, 0, 1, 1.5 * kPi);
  REQUIRE(rep.first_influence.has_value());
  CHECK(std::abs(*rep.first_influence - kPi) <= 2 * kLat.dx());
  CHECK(rep.max_before_cone <= 1e-10);
  CHECK(rep.max_after_cone >= 1e-6);
  const std::vector<gaussian::DetectorSpec> free{{"A", 1.0, 0.0, -kPi}, {"B", 1.0, 0.0, 0.0}};
  const auto none = retarded_delay_check(build_hamiltonian(Frame::T, kLat, free, kChart), 0, 1, 1.5 * kPi);
  CHECK_FALSE(none.first_influence.has_value());
  CHECK(none.max_after_cone == 0.0);
}

}
