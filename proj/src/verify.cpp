#include "csim/verify.hpp"

#include "csim/dynamics.hpp"
#include "csim/geometry.hpp"
#include "csim/lattice.hpp"
#include "csim/measurement.hpp"
#include "csim/scenarios.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>

namespace csim::verify {

using nlohmann::json;

namespace {

constexpr double kSmallDx = kPi / 32.0;

std::vector<gaussian::DetectorSpec> pair_of_detectors() {
  return {{"A", 1.0, 0.4, -kPi}, {"B", 1.0, 0.4, 0.0}};
}

SuiteResult chart_suite(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> ut(0.0, kPi), ux(-2.0 * kPi, kPi);
  double round_trip = 0.0, det_err = 0.0;
  for (double a : {0.1, 0.5, 0.9}) {
    const geometry::ChartParams chart(a);
    for (int k = 0; k < 1000; ++k) {
      const geometry::EventTX p{ut(rng), ux(rng)};
      const geometry::EventTX back = geometry::from_alt(geometry::to_alt(p, chart), chart);
      round_trip = std::max({round_trip, std::abs(back.t - p.t), std::abs(back.x - p.x)});
      const auto jac = geometry::jacobian(p, chart);
      det_err = std::max(det_err, std::abs(jac.determinant - 1.0 / geometry::conformal_factor(p, chart)));
    }
  }
  return {"chart", round_trip <= 1e-12 && det_err <= 1e-12,
          {{"round_trip", round_trip}, {"jacobian_vs_inverse_omega", det_err}, {"tolerance", 1e-12}}};
}

SuiteResult symplecticity_suite() {
  const auto lat = lattice::build_lattice(3.0 * kPi, kSmallDx);
  const geometry::ChartParams chart(0.5);
  json m;
  bool pass = true;
  for (Frame f : {Frame::T, Frame::Eta}) {
    const auto h = dynamics::build_hamiltonian(f, lat, pair_of_detectors(), chart);
    const auto prop = dynamics::integrate_propagator(h, 0.0, kPi);
    m[to_string(f)] = prop.symplectic_defect;
    pass = pass && prop.symplectic_defect <= 1e-8;
  }
  m["tolerance"] = 1e-8;
  return {"symplecticity", pass, m};
}

SuiteResult huygens_suite() {
  const auto lat = lattice::build_lattice(3.0 * kPi, kSmallDx);
  const geometry::ChartParams chart(0.5);
  json m;
  bool pass = true;
  for (Frame f : {Frame::T, Frame::Eta}) {
    const auto h = dynamics::build_hamiltonian(f, lat, pair_of_detectors(), chart);
    const auto rep = dynamics::huygens_check(h, 0.0, 0.5 * kPi, kPi);
    m[to_string(f)] = {{"defect", rep.defect}, {"shared_mesh", rep.shared_mesh}};
    pass = pass && rep.defect <= 1e-8;
  }
  m["tolerance"] = 1e-8;
  return {"huygens", pass, m};
}

SuiteResult uncertainty_suite(std::mt19937_64& rng, Fault fault) {
  std::uniform_real_distribution<double> ulog(-1.5, 1.5);
  std::uniform_int_distribution<int> udet(0, 1);
  const int trials = 1000;
  double min_nu = std::numeric_limits<double>::infinity();
  double cross = 0.0, block = 0.0;
  int failures = 0;
  for (int k = 0; k < trials; ++k) {
    const auto state = random_valid_state(2, 2, rng);
    const measurement::MeasurementSpec spec{udet(rng), std::exp(ulog(rng)), Frame::T, 0.0};
    auto [post, led] = measurement::collapse_paper(state, spec);
    if (fault == Fault::SigmaScale) post.sigma *= 0.5;
    const auto& lay = post.layout;
    const int q = lay.q(spec.detector), p = lay.p(spec.detector);
    block = std::max({block, std::abs(post.sigma(q, q) - kHbar * spec.g / 2.0),
                      std::abs(post.sigma(p, p) - kHbar / (2.0 * spec.g)), std::abs(post.sigma(q, p))});
    for (int r = 0; r < lay.dim(); ++r) {
      if (r == q || r == p) continue;
      cross = std::max({cross, std::abs(post.sigma(r, q)), std::abs(post.sigma(r, p))});
    }
    const auto v = gaussian::validate(post);
    min_nu = std::min(min_nu, v.min_symplectic_eigenvalue);
    if (!v.valid()) ++failures;
  }
  const bool pass = failures == 0 && cross <= 1e-14 && block == 0.0;
  return {"uncertainty", pass,
          {{"trials", trials},
           {"failures", failures},
           {"min_symplectic_eigenvalue", min_nu},
           {"max_cross_block", cross},
           {"detector_block_defect", block},
           {"fault", fault == Fault::SigmaScale ? "sigma_scale" : "none"}}};
}

SuiteResult causality_suite() {
  const auto lat = lattice::build_lattice(3.0 * kPi, kSmallDx);
  const auto h = dynamics::build_hamiltonian(Frame::T, lat, pair_of_detectors(), geometry::ChartParams(0.5));
  const auto rep = dynamics::retarded_delay_check(h, 0, 1, 1.5 * kPi);
  const bool pass = rep.max_before_cone <= 1e-10 && rep.max_after_cone >= 1e-6;
  return {"causality_delay", pass,
          {{"max_before_cone", rep.max_before_cone},
           {"max_after_cone", rep.max_after_cone},
           {"first_influence", rep.first_influence ? json(*rep.first_influence) : json(nullptr)},
           {"separation", rep.separation}}};
}

SuiteResult detector_oracle_suite() {
  const auto lat = lattice::build_lattice(3.0 * kPi, kPi / 64.0);
  const std::vector<gaussian::DetectorSpec> one{{"A", 1.0, 0.4, 0.0}};
  const auto h = dynamics::build_hamiltonian(Frame::T, lat, one, geometry::ChartParams(0.5));
  const auto cmp = dynamics::compare_detector_oracle(h, 0, {0.25 * kPi, 0.5 * kPi, 0.75 * kPi, kPi});
  return {"detector_oracle", cmp.max() <= 0.05,
          {{"phi", cmp.phi}, {"f", cmp.f}, {"pi", cmp.pi}, {"p", cmp.p}, {"tolerance", 0.05},
           {"dx", lat.dx()}}};
}

scenarios::ScenarioConfig small_scenario(bool two_detectors) {
  scenarios::ScenarioConfig cfg;
  cfg.name = two_detectors ? "verify_spacelike" : "verify_single";
  cfg.target_dx = kSmallDx;
  cfg.windows.width_in_pi = 1.0 / 8.0;
  if (two_detectors) {
    cfg.detectors = pair_of_detectors();
    cfg.measurements = {{0, 1.0, Frame::T, 0.5 * kPi}, {1, 1.0, Frame::T, 2.0 * kPi / 3.0}};
  } else {
    cfg.detectors = {{"A", 1.0, 0.4, 0.0}};
    cfg.measurements = {{0, 1.0, Frame::T, 0.5 * kPi}};
  }
  cfg.validate();
  return cfg;
}

SuiteResult decomposition_suite() {
  json m;
  bool pass = true;
  for (bool two : {false, true}) {
    const auto cfg = small_scenario(two);
    for (Frame f : {Frame::T, Frame::Eta}) {
      const auto rep = scenarios::paper_decomposition_check(cfg, f);
      json entry = {{"full_defect", rep.full_defect}, {"field_defect", rep.field_defect}};
      if (rep.literal_defect) entry["literal_defect"] = *rep.literal_defect;
      m[cfg.name][to_string(f)] = entry;
      pass = pass && rep.pass;
    }
  }
  m["tolerance"] = scenarios::Tolerances{}.decomposition;
  return {"decomposition", pass, m};
}

}  // namespace

gaussian::CovarianceState random_valid_state(int n_detectors, int n_sites, std::mt19937_64& rng,
                                             double mixedness) {
  const auto lay = gaussian::PhaseSpaceLayout::standard(n_detectors, n_sites);
  const int dim = lay.dim();
  std::normal_distribution<double> normal(0.0, 0.3);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Matrix h(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j <= i; ++j) h(i, j) = h(j, i) = normal(rng);
  const Matrix jform = lay.symplectic_form();
  const Eigen::MatrixXd gen = jform * h;
  const Matrix s = gen.exp();
  Vector nu(dim);
  for (int k = 0; k < lay.n_pairs(); ++k) {
    const double v = kHbar / 2.0 + mixedness * unit(rng);
    nu(2 * k) = nu(2 * k + 1) = v;
  }
  gaussian::CovarianceState st;
  st.layout = lay;
  st.sigma = s * nu.asDiagonal() * s.transpose();
  st.sigma = 0.5 * (st.sigma + st.sigma.transpose()).eval();
  st.mean = Vector::Zero(dim);
  st.frame = Frame::T;
  st.time = 0.0;
  return st;
}

MeterVerdict resolve_meter(int trials, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> ulog(-1.5, 1.5);
  std::uniform_int_distribution<int> udet(0, 1);
  MeterVerdict v;
  for (int k = 0; k < trials; ++k) {
    const auto state = random_valid_state(2, 2, rng);
    const measurement::MeasurementSpec spec{udet(rng), std::exp(ulog(rng)), Frame::T, 0.0};
    const auto post = measurement::collapse_paper(state, spec).first;
    const Eigen::Matrix2d prepared = measurement::literal_meter(spec.g);
    const auto lit = measurement::collapse_schur_oracle(state, spec.detector,
                                                        measurement::literal_meter(spec.g), prepared);
    const auto rel = measurement::collapse_schur_oracle(
        state, spec.detector, measurement::paper_equivalent_meter(spec.g), prepared);
    v.literal_meter_defect = std::max(v.literal_meter_defect, (post.sigma - lit.sigma).cwiseAbs().maxCoeff());
    v.relabelled_meter_defect =
        std::max(v.relabelled_meter_defect, (post.sigma - rel.sigma).cwiseAbs().maxCoeff());
  }
  if (v.relabelled_meter_defect <= 1e-10 && v.relabelled_meter_defect <= v.literal_meter_defect)
    v.resolved = "diag(hbar/2g, hbar g/2)";
  else if (v.literal_meter_defect <= 1e-10)
    v.resolved = "diag(hbar g/2, hbar/2g)";
  else
    v.resolved = "none";
  return v;
}

bool VerifyReport::all_pass() const {
  return std::all_of(suites.begin(), suites.end(), [](const SuiteResult& s) { return s.pass; });
}

json VerifyReport::to_json() const {
  json out = {{"seed", seed}, {"resolved_meter", resolved_meter}, {"all_pass", all_pass()}};
  json list = json::array();
  for (const auto& s : suites) list.push_back({{"name", s.name}, {"pass", s.pass}, {"metrics", s.metrics}});
  out["suites"] = list;
  return out;
}

VerifyReport run_all(std::uint64_t seed, Fault fault) {
  std::mt19937_64 rng(seed);
  VerifyReport rep;
  rep.seed = seed;
  rep.suites.push_back(chart_suite(rng));
  rep.suites.push_back(symplecticity_suite());
  rep.suites.push_back(huygens_suite());
  rep.suites.push_back(uncertainty_suite(rng, fault));
  const MeterVerdict mv = resolve_meter(200, rng);
  rep.resolved_meter = mv.resolved;
  rep.suites.push_back({"collapse_oracle", mv.resolved != "none",
                        {{"literal_meter_defect", mv.literal_meter_defect},
                         {"relabelled_meter_defect", mv.relabelled_meter_defect},
                         {"tolerance", 1e-10},
                         {"resolved", mv.resolved}}});
  rep.suites.push_back(causality_suite());
  rep.suites.push_back(detector_oracle_suite());
  rep.suites.push_back(decomposition_suite());
  return rep;
}

}  // namespace csim::verify
