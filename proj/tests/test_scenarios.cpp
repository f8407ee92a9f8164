#include "csim/scenarios.hpp"

#include <doctest.h>

#include <cmath>

using namespace csim;
using namespace csim::scenarios;

namespace {

ScenarioConfig small(double lambda, double amplitude, int n_meas) {
  ScenarioConfig cfg;
  cfg.name = "small";
  cfg.amplitude = amplitude;
  cfg.target_dx = kPi / 32;
  cfg.windows.width_in_pi = 1.0 / 8;
  cfg.detectors = {{"A", 1.0, lambda, 0.0}};
  if (n_meas >= 1) cfg.measurements.push_back({0, 1.0, Frame::T, kPi / 2});
  return cfg;
}

ScenarioConfig spacelike(double lambda) {
  ScenarioConfig cfg = small(lambda, 0.5, 0);
  cfg.detectors = {{"A", 1.0, lambda, -kPi}, {"B", 1.0, lambda, 0.0}};
  cfg.measurements = {{0, 1.0, Frame::T, kPi / 2}, {1, 1.0, Frame::T, 2 * kPi / 3}};
  cfg.expect = Separation::Spacelike;
  return cfg;
}

}  // namespace

TEST_SUITE("scenarios") {

TEST_CASE("free run without measurements is plain evolution") {
  const auto cfg = small(0.0, 0.5, 0);
  const auto run = run_one_frame(cfg, Frame::T);
  const auto h = dynamics::build_hamiltonian(Frame::T, cfg.lattice(), cfg.detectors, cfg.chart());
  const auto direct = dynamics::evolve(run.initial, dynamics::integrate_propagator(h, 0.0, kPi));
  CHECK((run.final_state.sigma - direct.sigma).cwiseAbs().maxCoeff() <= 1e-13);
}

TEST_CASE("collapse instants in the two frames") {
  const auto cfg = small(0.4, 0.5, 1);
  const auto rt = run_one_frame(cfg, Frame::T);
  REQUIRE(rt.events.size() == 1);
  CHECK(rt.events[0].spec.time == doctest::Approx(kPi / 2));
  CHECK(rt.events[0].ledger.post_block(0, 0) == 0.5);
  CHECK(rt.events[0].ledger.post_block(1, 1) == 0.5);
  CHECK(rt.events[0].ledger.post_block(0, 1) == 0.0);
  CHECK(std::abs(cfg.slice_time(cfg.measurements[0], Frame::Eta) - (kPi - 1) / 2) <= 1e-12);
  const auto re = run_one_frame(cfg, Frame::Eta);
  CHECK(std::abs(re.events[0].spec.time - (kPi - 1) / 2) <= 1e-12);
  CHECK(std::abs(re.events[0].proper_time - kPi / 2) <= 1e-12);
}

TEST_CASE("flat chart: frames agree to roundoff") {
  const auto cfg = small(0.4, 0.0, 1);
  const auto rep = compare_frames(run_one_frame(cfg, Frame::T), run_one_frame(cfg, Frame::Eta), cfg);
  CHECK(rep.frobenius_relative <= 1e-12);
}

TEST_CASE("pure coordinate change converges under refinement") {
  auto cfg = small(0.0, 0.5, 0);
  cfg.target_dx = kPi / 64;
  const auto sweep = refinement_sweep(cfg, 3);
  REQUIRE(sweep.levels.size() == 3);
  CHECK(sweep.monotone);
  CHECK(sweep.observed_order.back() >= 1.5);
  CHECK_THROWS_AS(refinement_sweep(cfg, 1), ConfigError);
}

TEST_CASE("frame consistency with one collapse on a coarse lattice") {
  const auto cfg = small(0.4, 0.5, 1);
  const auto rep = compare_frames(run_one_frame(cfg, Frame::T), run_one_frame(cfg, Frame::Eta), cfg);
  CHECK(rep.frobenius_relative <= 5e-2);
  CHECK(rep.reduced_pass);
  CHECK(rep.labels.size() == static_cast<size_t>(rep.corr_t.rows()));
}

TEST_CASE("decomposition identities") {
  for (Frame f : {Frame::T, Frame::Eta}) {
    CHECK(paper_decomposition_check(small(0.0, 0.5, 1), f).full_defect <= 1e-10);
    CHECK(paper_decomposition_check(small(0.4, 0.5, 1), f).full_defect <= 1e-8);
    const auto two = paper_decomposition_check(spacelike(0.4), f);
    CHECK(two.full_defect <= 1e-8);
    REQUIRE(two.literal_defect.has_value());
    CHECK(*two.literal_defect <= 1e-8);
  }
}

TEST_CASE("event classification") {
  const auto cfg = spacelike(0.4);
  CHECK(classify(cfg, cfg.measurements[0], cfg.measurements[1]) == Separation::Spacelike);
  const auto tl = timelike_control(cfg);
  CHECK(classify(tl, tl.measurements[0], tl.measurements[1]) == Separation::Timelike);
  MeasurementEvent on_cone{1, 1.0, Frame::T, kPi / 2 + kPi};
  CHECK(classify(tl, {0, 1.0, Frame::T, kPi / 2}, on_cone) == Separation::Unspecified);
}

TEST_CASE("spacelike collapses commute, timelike ones do not") {
  const auto rep = order_swap_experiment(spacelike(0.4));
  CHECK(rep.order_t == std::vector<int>{0, 1});
  CHECK(rep.order_eta == std::vector<int>{1, 0});
  CHECK(rep.spacelike_commutes);
  CHECK(rep.negative_control);
  CHECK(rep.spacelike_frames.joint_reduced_relative.has_value() == false);
  const auto free = in_frame_swap(spacelike(0.0), Frame::T);
  CHECK(free.max_abs <= 1e-13);
}

TEST_CASE("config validation") {
  auto cfg = small(0.4, 0.5, 1);
  cfg.measurements[0].time = 4.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  auto bad = spacelike(0.4);
  bad.expect = Separation::Timelike;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

}
