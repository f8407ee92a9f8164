#include "csim/measurement.hpp"
#include "csim/verify.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace csim;
using namespace csim::measurement;

namespace {

gaussian::CovarianceState product_state() {
  gaussian::CovarianceState st;
  st.layout = gaussian::PhaseSpaceLayout::standard(2, 2);
  st.sigma = Matrix::Identity(8, 8) * 0.5;
  st.sigma(2, 2) = 0.25;
  st.sigma(3, 3) = 1.0;
  st.sigma(4, 6) = st.sigma(6, 4) = 0.2;
  st.mean = Vector::Zero(8);
  return st;
}

// Two-mode squeezed vacuum between detector 0 and site 0, r = 0.6.
gaussian::CovarianceState squeezed_pair() {
  gaussian::CovarianceState st;
  st.layout = gaussian::PhaseSpaceLayout::standard(1, 1);
  const double c = std::cosh(1.2) / 2, s = std::sinh(1.2) / 2;
  st.sigma = Matrix::Zero(4, 4);
  st.sigma.diagonal().setConstant(c);
  st.sigma(0, 2) = st.sigma(2, 0) = s;
  st.sigma(1, 3) = st.sigma(3, 1) = -s;
  st.mean = Vector::Zero(4);
  return st;
}

}  // namespace

TEST_SUITE("measurement") {

TEST_CASE("uncorrelated detector: rest untouched, block re-prepared") {
  const auto st = product_state();
  const auto [post, led] = collapse_paper(st, {0, 2.0, Frame::T, 0.0});
  CHECK(post.sigma(0, 0) == 1.0);
  CHECK(post.sigma(1, 1) == 0.25);
  CHECK(post.sigma(0, 1) == 0.0);
  CHECK((post.sigma.bottomRightCorner(6, 6) - st.sigma.bottomRightCorner(6, 6)).cwiseAbs().maxCoeff() == 0.0);
  CHECK(led.max_correction == 0.0);
  const auto oracle = collapse_schur_oracle(st, 0, paper_equivalent_meter(2.0), literal_meter(2.0));
  CHECK((oracle.sigma - post.sigma).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("post-collapse structure and uncertainty on random states") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> ulog(-1.5, 1.5);
  for (int k = 0; k < 1000; ++k) {
    const auto st = verify::random_valid_state(2, 2, rng);
    const int d = k % 2;
    const double g = std::exp(ulog(rng));
    const auto post = collapse_paper(st, {d, g, Frame::T, 0.0}).first;
    const auto& lay = post.layout;
    REQUIRE(post.sigma(lay.q(d), lay.q(d)) == kHbar * g / 2);
    REQUIRE(post.sigma(lay.p(d), lay.p(d)) == kHbar / (2 * g));
    for (int r = 0; r < lay.dim(); ++r) {
      if (r == lay.q(d) || r == lay.p(d)) continue;
      REQUIRE(std::abs(post.sigma(r, lay.q(d))) <= 1e-14);
      REQUIRE(std::abs(post.sigma(r, lay.p(d))) <= 1e-14);
    }
    REQUIRE(gaussian::validate(post).valid());
  }
}

TEST_CASE("squeezed pair at g = 1 matches Gaussian conditioning") {
  const auto st = squeezed_pair();
  const auto post = collapse_paper(st, {0, 1.0, Frame::T, 0.0}).first;
  const auto oracle = collapse_schur_oracle(st, 0, paper_equivalent_meter(1.0));
  CHECK((post.sigma - oracle.sigma).cwiseAbs().maxCoeff() <= 1e-12);
  // Heterodyne-like readout of one arm of a pure two-mode squeezed state
  // leaves the other arm in a coherent-state covariance.
  CHECK(post.sigma(2, 2) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(post.sigma(3, 3) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("meter parametrization is resolved to the relabelled candidate") {
  std::mt19937_64 rng(2);
  const auto v = verify::resolve_meter(100, rng);
  CHECK(v.relabelled_meter_defect <= 1e-10);
  CHECK(v.literal_meter_defect > 1e-3);
  CHECK(v.resolved == "diag(hbar/2g, hbar g/2)");
}

TEST_CASE("weak meter leaves the rest unchanged") {
  std::mt19937_64 rng(4);
  const auto st = verify::random_valid_state(2, 2, rng);
  Eigen::Matrix2d huge = Eigen::Matrix2d::Identity() * 1e14;
  const auto post = collapse_schur_oracle(st, 1, huge, literal_meter(1.0));
  CHECK((post.sigma.topLeftCorner(2, 2) - st.sigma.topLeftCorner(2, 2)).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((post.sigma.bottomRightCorner(4, 4) - st.sigma.bottomRightCorner(4, 4)).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("collapse is idempotent in the detector sector") {
  std::mt19937_64 rng(8);
  const auto st = verify::random_valid_state(2, 2, rng);
  const auto once = collapse_paper(st, {1, 0.7, Frame::T, 0.0}).first;
  const auto twice = collapse_paper(once, {1, 0.7, Frame::T, 0.0}).first;
  CHECK((once.sigma - twice.sigma).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("preconditions") {
  auto st = product_state();
  CHECK_THROWS_AS(collapse_paper(st, {0, 1.0, Frame::Eta, 0.0}), ConfigError);
  CHECK_THROWS_AS(collapse_paper(st, {0, 1.0, Frame::T, 0.5}), ConfigError);
  st.mean(3) = 0.1;
  CHECK_THROWS_AS(collapse_paper(st, {0, 1.0, Frame::T, 0.0}), UnsupportedError);
}

TEST_CASE("reduced detector states") {
  const auto st = product_state();
  const auto red = reduced_detector_state(st);
  CHECK(red.layout.n_pairs() == 2);
  CHECK((red.sigma - st.sigma.topLeftCorner(4, 4)).cwiseAbs().maxCoeff() == 0.0);
  std::mt19937_64 rng(9);
  for (int k = 0; k < 50; ++k) {
    const auto r = reduced_detector_state(verify::random_valid_state(2, 3, rng));
    const double purity = std::pow(kHbar / 2, 2) / std::sqrt(Eigen::MatrixXd(r.sigma).determinant());
    CHECK(purity <= 1.0 + 1e-12);
  }
}

TEST_CASE("outcome density") {
  const auto red = reduced_detector_state(product_state());
  const auto single = gaussian::marginal(red, {0});
  // Normalization over a wide grid.
  double total = 0.0;
  const int n = 400;
  const double half = 8.0, h = 2 * half / n;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      Vector o(2);
      o << -half + (i + 0.5) * h, -half + (j + 0.5) * h;
      total += outcome_density(single, o, {1.0}) * h * h;
    }
  CHECK(std::abs(total - 1.0) <= 1e-6);
  Vector zero = Vector::Zero(2), off(2);
  off << 0.3, -0.2;
  CHECK(outcome_density(single, zero, {1.0}) > outcome_density(single, off, {1.0}));
  // Product state: the joint density factorizes.
  Vector joint(4);
  joint << 0.4, -0.3, 1.1, 0.2;
  const double both = outcome_density(red, joint, {1.0, 2.0});
  const double a = outcome_density(gaussian::marginal(red, {0}), joint.head(2), {1.0});
  const double b = outcome_density(gaussian::marginal(red, {1}), joint.tail(2), {2.0});
  CHECK(std::abs(both - a * b) <= 1e-10);
}

}
