#include "csim/scenarios.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace csim::scenarios {

namespace {

using gaussian::CovarianceState;
using Cols2 = Eigen::Matrix<double, Eigen::Dynamic, 2>;

lattice::FieldKernel make_kernel(const ScenarioConfig& cfg, const lattice::LatticeSpec& lat) {
  if (cfg.kernel == "box_vacuum") return lattice::box_vacuum_kernel(lat);
  if (cfg.kernel == "squeezed") return lattice::squeezed_kernel(lat, cfg.squeeze_r);
  throw ConfigError(fmt::format("unknown initial kernel '{}' (box_vacuum | squeezed)", cfg.kernel));
}

double max_abs(const Matrix& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

/// Event indices sorted by slice time in the given frame (stable).
std::vector<int> frame_order(const ScenarioConfig& cfg, Frame frame) {
  std::vector<int> idx(cfg.measurements.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
    return cfg.slice_time(cfg.measurements[static_cast<size_t>(a)], frame) <
           cfg.slice_time(cfg.measurements[static_cast<size_t>(b)], frame);
  });
  return idx;
}

double relative_frobenius(const Matrix& ref, const Matrix& other) {
  const double n = ref.norm();
  return n > 0.0 ? (ref - other).norm() / n : (ref - other).norm();
}

/// Rows {q, p} of a propagator for detector d, as a 2 x dim block.
Matrix detector_rows(const Matrix& s, const gaussian::PhaseSpaceLayout& lay, int d) {
  Matrix r(2, s.cols());
  r.row(0) = s.row(lay.q(d));
  r.row(1) = s.row(lay.p(d));
  return r;
}

Cols2 detector_cols(const Matrix& s, const gaussian::PhaseSpaceLayout& lay, int d) {
  Cols2 c(s.rows(), 2);
  c.col(0) = s.col(lay.q(d));
  c.col(1) = s.col(lay.p(d));
  return c;
}

/// Contribution of the measured detector's re-prepared block seen through
/// the mode functions y = S[:, (Q_d, P_d)].
Matrix prepared_term(const Cols2& y, double g) {
  const Eigen::Vector2d r(kHbar * g / 2.0, kHbar / (2.0 * g));
  return y * r.asDiagonal() * y.transpose();
}

/// I(y, y) / J for a collapse whose pre-measurement correlators are taken from
/// sigma through `rows` (the detector rows of the propagator up to the
/// measurement slice).
Matrix correction_term(const Matrix& y, const Matrix& sigma, const Matrix& rows, double g) {
  const Matrix rs = rows * sigma;                     // 2 x dim
  const Eigen::Matrix2d pre = rs * rows.transpose();  // detector block before collapse
  const Matrix c = y * rs.transpose();                // dim x 2: <y, Q>, <y, P>
  const double ell = kHbar * g / 2.0 + pre(1, 1);
  const double ell_bar = kHbar / (2.0 * g) + pre(0, 0);
  const double qp = 0.5 * (pre(0, 1) + pre(1, 0));
  const double j = ell * ell_bar - qp * qp;
  if (!(j > 0.0)) throw NumericalError("reassembly: collapse denominator J is not positive");
  const Vector cq = c.col(0), cp = c.col(1);
  Matrix out = (-ell / j) * (cq * cq.transpose());
  out.noalias() += (-ell_bar / j) * (cp * cp.transpose());
  out.noalias() += (qp / j) * (cq * cp.transpose() + cp * cq.transpose());
  return out;
}

/// y -> y - y[:, d] rows_d: the propagator with detector d's pre-collapse
/// data removed.
Matrix remove_detector(const Matrix& y_full, const Cols2& y_d, const Matrix& rows_d) {
  Matrix out = y_full;
  out.noalias() -= y_d * rows_d;
  return out;
}

Matrix sandwich(const Matrix& y, const Matrix& sigma) {
  const Matrix ys = y * sigma;
  Matrix out;
  out.noalias() = ys * y.transpose();
  return out;
}

}  // namespace

lattice::LatticeSpec ScenarioConfig::lattice() const {
  return lattice::build_lattice(box_half_width_in_pi * kPi, target_dx);
}

double ScenarioConfig::proper_time(const MeasurementEvent& ev) const {
  const auto& d = detectors.at(static_cast<size_t>(ev.detector));
  return geometry::WorldlineClock(d.position, ev.frame, chart()).proper_time(ev.time);
}

double ScenarioConfig::slice_time(const MeasurementEvent& ev, Frame frame) const {
  const auto& d = detectors.at(static_cast<size_t>(ev.detector));
  return geometry::WorldlineClock(d.position, frame, chart()).coordinate_time(proper_time(ev));
}

void ScenarioConfig::validate() const {
  (void)chart();
  const auto lat = lattice();
  if (detectors.empty()) throw ConfigError("scenario needs at least one detector");
  (void)dynamics::build_hamiltonian(Frame::T, lat, detectors, chart());
  (void)dynamics::step_count(0.0, comparison_time(), lat.dx(), integrator.dt_factor);
  if (!(band_fraction > 0.0 && band_fraction <= 1.0))
    throw ConfigError("vacuum_band_fraction must lie in (0, 1]");
  if (kernel != "box_vacuum" && kernel != "squeezed")
    throw ConfigError(fmt::format("unknown initial kernel '{}' (box_vacuum | squeezed)", kernel));

  const double t_end = comparison_time();
  if (!(t_end > 0.0) || !geometry::overlap_slice(t_end))
    throw ConfigError(fmt::format("comparison time {} pi is not a positive multiple of pi",
                                  comparison_time_in_pi));

  for (size_t k = 0; k < measurements.size(); ++k) {
    const auto& ev = measurements[k];
    if (ev.detector < 0 || ev.detector >= static_cast<int>(detectors.size()))
      throw ConfigError(fmt::format("measurement {} refers to an unknown detector", k));
    if (!(ev.g > 0.0)) throw ConfigError(fmt::format("measurement {} needs g > 0", k));
    for (Frame f : {Frame::T, Frame::Eta}) {
      const double s = slice_time(ev, f);
      if (!(s > 0.0 && s < t_end)) {
        throw ConfigError(fmt::format(
            "measurement {} lies at {}-frame time {}, outside (0, {})", k, to_string(f), s, t_end));
      }
    }
  }

  if (expect != Separation::Unspecified) {
    if (measurements.size() != 2 || measurements[0].detector == measurements[1].detector)
      throw ConfigError("a spacelike/timelike scenario needs two measurements on two detectors");
    const Separation got = classify(*this, measurements[0], measurements[1]);
    if (got != expect) {
      throw ConfigError(fmt::format("measurement events are not {} separated by a 4 dx margin",
                                    expect == Separation::Spacelike ? "spacelike" : "timelike"));
    }
    if (expect == Separation::Spacelike) {
      const auto ot = frame_order(*this, Frame::T), oe = frame_order(*this, Frame::Eta);
      if (ot == oe) {
        throw ConfigError(
            "spacelike scenario: the t-frame and eta-frame must see the two measurements in "
            "opposite orders (t1 < t2 and eta2 < eta1)");
      }
    }
  }
  const double tol_min = std::min({tolerances.consistency, tolerances.decomposition,
                                   tolerances.commutation, tolerances.reduced_factor});
  if (tol_min < 0.0) throw ConfigError("tolerances must be non-negative");
}

Separation classify(const ScenarioConfig& cfg, const MeasurementEvent& a, const MeasurementEvent& b) {
  const double dt = std::abs(cfg.proper_time(a) - cfg.proper_time(b));
  const double dx = std::abs(cfg.detectors.at(static_cast<size_t>(a.detector)).position -
                             cfg.detectors.at(static_cast<size_t>(b.detector)).position);
  const double band = 4.0 * cfg.lattice().dx();
  if (dt < dx - band) return Separation::Spacelike;
  if (dt > dx + band) return Separation::Timelike;
  return Separation::Unspecified;
}

FrameRun run_one_frame(const ScenarioConfig& cfg, Frame frame, bool keep_segments) {
  cfg.validate();
  const auto lat = cfg.lattice();
  const auto chart = cfg.chart();
  const auto h = dynamics::build_hamiltonian(frame, lat, cfg.detectors, chart);

  FrameRun run;
  run.frame = frame;
  run.initial = gaussian::assemble_initial_state(lat, cfg.detectors, make_kernel(cfg, lat), frame,
                                                 chart, cfg.band_fraction);
  CovarianceState state = run.initial;

  auto advance_to = [&](double t) {
    dynamics::SymplecticPropagator prop;
    if (t > state.time) {
      prop = dynamics::integrate_propagator(h, state.time, t, cfg.integrator);
      run.max_symplectic_defect = std::max(run.max_symplectic_defect, prop.symplectic_defect);
      state = dynamics::evolve(state, prop);
    } else {
      prop.s = Matrix::Identity(state.layout.dim(), state.layout.dim());
      prop.t_a = prop.t_b = state.time;
      prop.frame = frame;
    }
    if (keep_segments) run.segments.push_back(std::move(prop));
  };

  for (int idx : frame_order(cfg, frame)) {
    const auto& ev = cfg.measurements[static_cast<size_t>(idx)];
    FrameEvent fe;
    fe.index = idx;
    fe.proper_time = cfg.proper_time(ev);
    fe.spec = {ev.detector, ev.g, frame, cfg.slice_time(ev, frame)};
    advance_to(fe.spec.time);
    state.time = fe.spec.time;
    fe.reduced_before = measurement::reduced_detector_state(state);
    auto [post, led] = measurement::collapse_paper(state, fe.spec);
    state = std::move(post);
    fe.ledger = led;
    run.events.push_back(std::move(fe));
  }
  advance_to(cfg.comparison_time());
  state.time = cfg.comparison_time();
  run.final_state = std::move(state);
  return run;
}

std::vector<std::string> observable_labels(const ScenarioConfig& cfg) {
  std::vector<std::string> labels;
  for (const auto& d : cfg.detectors) {
    labels.push_back("Q_" + d.name);
    labels.push_back("P_" + d.name);
  }
  const auto& w = cfg.windows;
  for (const char* kind : {"Phi", "Pi"}) {
    for (int k = 0; k < w.count; ++k) {
      const double c = w.count == 1 ? w.first_center_in_pi
                                    : w.first_center_in_pi + (w.last_center_in_pi - w.first_center_in_pi) *
                                                                 k / (w.count - 1);
      labels.push_back(fmt::format("{}[{:.4f}pi]", kind, c));
    }
  }
  return labels;
}

std::vector<gaussian::Observable> comparison_observables(const ScenarioConfig& cfg, Frame frame,
                                                         double slice_time) {
  if (!geometry::overlap_slice(slice_time))
    throw ConfigError(fmt::format("frames can only be compared at t = eta = n pi, got {}", slice_time));
  const auto lat = cfg.lattice();
  const auto chart = cfg.chart();
  const int n = lat.n_sites();
  const double a = frame == Frame::Eta ? chart.amplitude() : 0.0;
  const geometry::ChartParams map_chart(a);
  const double cos_t = std::cos(slice_time);

  // Site i of the eta-frame lattice sits at xi_i; on the slice it is the
  // Minkowski point x(xi_i), with dx/dxi = 1 / (1 - A cos x cos T).
  Vector x(n), jac(n);
  for (int i = 0; i < n; ++i) {
    x(i) = geometry::from_alt({slice_time, lat.position(i)}, map_chart).x;
    jac(i) = 1.0 / (1.0 - a * std::cos(x(i)) * cos_t);
  }

  std::vector<gaussian::Observable> obs;
  for (size_t d = 0; d < cfg.detectors.size(); ++d) {
    obs.push_back(gaussian::Observable::detector_q(static_cast<int>(d)));
    obs.push_back(gaussian::Observable::detector_p(static_cast<int>(d)));
  }
  const auto& w = cfg.windows;
  if (w.count < 1 || !(w.width_in_pi > 0.0)) throw ConfigError("window family is empty");
  const double width = w.width_in_pi * kPi;
  std::vector<double> centers;
  for (int k = 0; k < w.count; ++k) {
    const double c = w.count == 1 ? w.first_center_in_pi
                                  : w.first_center_in_pi + (w.last_center_in_pi - w.first_center_in_pi) *
                                                               k / (w.count - 1);
    centers.push_back(c * kPi);
    (void)lattice::smeared_window(c * kPi, width, lat);  // support check
  }
  for (double c : centers) {
    Vector wt(n);
    for (int i = 0; i < n; ++i) wt(i) = lattice::gaussian_window(x(i), c, width) * jac(i) * lat.dx();
    obs.push_back(gaussian::Observable::field(std::move(wt)));
  }
  for (double c : centers) {
    Vector wt(n);
    for (int i = 0; i < n; ++i) wt(i) = lattice::gaussian_window(x(i), c, width);
    obs.push_back(gaussian::Observable::momentum(std::move(wt)));
  }
  return obs;
}

ConsistencyReport compare_frames(const FrameRun& run_t, const FrameRun& run_eta,
                                 const ScenarioConfig& cfg) {
  if (run_t.frame != Frame::T || run_eta.frame != Frame::Eta)
    throw ConfigError("compare_frames expects a t-frame run and an eta-frame run");
  const double t_end = run_t.final_state.time;
  if (std::abs(run_eta.final_state.time - t_end) > 1e-12 || !geometry::overlap_slice(t_end))
    throw ConfigError("frames can only be compared on a shared slice t = eta = n pi");

  ConsistencyReport rep;
  rep.comparison_time = t_end;
  rep.labels = observable_labels(cfg);
  rep.corr_t = gaussian::smeared_correlator_matrix(
      run_t.final_state, comparison_observables(cfg, Frame::T, t_end));
  rep.corr_eta = gaussian::smeared_correlator_matrix(
      run_eta.final_state, comparison_observables(cfg, Frame::Eta, t_end));
  rep.max_abs = max_abs(rep.corr_t - rep.corr_eta);
  rep.frobenius_relative = relative_frobenius(rep.corr_t, rep.corr_eta);
  rep.tolerance = cfg.tolerances.consistency;
  rep.pass = rep.frobenius_relative <= rep.tolerance;

  rep.reduced_tolerance = cfg.tolerances.reduced_factor * cfg.tolerances.consistency;
  rep.reduced_relative.assign(cfg.measurements.size(), 0.0);
  for (const auto& et : run_t.events) {
    for (const auto& ee : run_eta.events) {
      if (ee.index != et.index) continue;
      rep.reduced_relative[static_cast<size_t>(et.index)] =
          relative_frobenius(et.reduced_before.sigma, ee.reduced_before.sigma);
    }
  }
  // Conditioned states only compare when both frames apply the collapses in
  // the same order; otherwise each frame conditions on different outcomes.
  std::vector<int> order_t, order_eta;
  for (const auto& e : run_t.events) order_t.push_back(e.index);
  for (const auto& e : run_eta.events) order_eta.push_back(e.index);
  rep.conditioned_comparable = order_t == order_eta;
  rep.reduced_pass = !rep.conditioned_comparable ||
                     std::all_of(rep.reduced_relative.begin(), rep.reduced_relative.end(),
                                 [&](double r) { return r <= rep.reduced_tolerance; });
  if (!run_t.segments.empty() && !run_eta.segments.empty() && !run_t.events.empty()) {
    rep.joint_reduced_relative =
        relative_frobenius(event_detector_covariance(run_t), event_detector_covariance(run_eta));
    rep.reduced_pass = rep.reduced_pass && *rep.joint_reduced_relative <= rep.reduced_tolerance;
  }
  return rep;
}

Matrix event_detector_covariance(const FrameRun& run) {
  if (run.segments.size() != run.events.size() + 1)
    throw ConfigError("event covariance needs a run that kept its segments");
  const auto& lay = run.initial.layout;
  const size_t n = run.events.size();
  // Row k holds the Heisenberg row of (Q, P) of event k's detector at its
  // slice: e^T S_k ... S_0, evaluated left to right.
  Matrix rows(2 * static_cast<Eigen::Index>(n), lay.dim());
  for (size_t k = 0; k < n; ++k) {
    const auto& ev = run.events[k];
    const int d = ev.spec.detector;
    Matrix r = Matrix::Zero(2, lay.dim());
    r(0, lay.q(d)) = 1.0;
    r(1, lay.p(d)) = 1.0;
    for (size_t j = k + 1; j-- > 0;) r = (r * run.segments[j].s).eval();
    rows.middleRows(2 * ev.index, 2) = r;
  }
  Matrix cov = rows * run.initial.sigma * rows.transpose();
  return 0.5 * (cov + cov.transpose());
}

DecompositionReport paper_decomposition_check(const ScenarioConfig& cfg, Frame frame) {
  return paper_decomposition_check(cfg, run_one_frame(cfg, frame, true));
}

DecompositionReport paper_decomposition_check(const ScenarioConfig& cfg, const FrameRun& run) {
  const int n_meas = static_cast<int>(cfg.measurements.size());
  if (n_meas < 1 || n_meas > 2)
    throw UnsupportedError("decomposition check supports one or two measurements");
  if (run.segments.size() != static_cast<size_t>(n_meas) + 1)
    throw ConfigError("decomposition check needs a run that kept its segments");
  const Frame frame = run.frame;
  const auto& lay = run.initial.layout;
  const Matrix& sigma0 = run.initial.sigma;

  DecompositionReport rep;
  rep.frame = frame;
  rep.measurements = n_meas;
  rep.tolerance = cfg.tolerances.decomposition;

  Matrix reassembled;
  if (n_meas == 1) {
    const int a = run.events[0].spec.detector;
    const double g = run.events[0].spec.g;
    const Matrix& s10 = run.segments[0].s;
    const Matrix& s21 = run.segments[1].s;
    const Cols2 s21_a = detector_cols(s21, lay, a);
    const Matrix rows_a = detector_rows(s10, lay, a);
    Matrix s20;
    s20 = dynamics::compose(s21, s10);
    const Matrix upsilon = remove_detector(s20, s21_a, rows_a);
    reassembled = prepared_term(s21_a, g) + sandwich(upsilon, sigma0) +
                  correction_term(upsilon, sigma0, rows_a, g);
  } else {
    const int a = run.events[0].spec.detector, b = run.events[1].spec.detector;
    const double ga = run.events[0].spec.g, gb = run.events[1].spec.g;
    const Matrix& s10 = run.segments[0].s;
    const Matrix& s21 = run.segments[1].s;
    const Matrix& s32 = run.segments[2].s;
    const Matrix rows10_a = detector_rows(s10, lay, a);
    const Matrix rows21_b = detector_rows(s21, lay, b);
    const Cols2 s32_b = detector_cols(s32, lay, b);

    // Post-A state on the first slice from initial data alone.
    const Matrix id = Matrix::Identity(lay.dim(), lay.dim());
    const Matrix y10 = remove_detector(s10, detector_cols(id, lay, a), rows10_a);
    const Matrix sigma1 = prepared_term(detector_cols(id, lay, a), ga) + sandwich(y10, sigma0) +
                          correction_term(y10, sigma0, rows10_a, ga);

    Matrix s31;
    s31.noalias() = s32 * s21;
    const Matrix upsilon1 = remove_detector(s31, s32_b, rows21_b);
    const Cols2 upsilon1_a = detector_cols(upsilon1, lay, a);
    Matrix u1s10;
    u1s10.noalias() = upsilon1 * s10;
    const Matrix upsilon0 = remove_detector(u1s10, upsilon1_a, rows10_a);

    const Matrix shared = prepared_term(s32_b, gb) + correction_term(upsilon1, sigma1, rows21_b, gb);
    reassembled = shared + prepared_term(upsilon1_a, ga) + sandwich(upsilon0, sigma0) +
                  correction_term(upsilon0, sigma0, rows10_a, ga);

    if (a != b) {
      rep.retarded_block = std::max(
          {std::abs(s21(lay.q(b), lay.q(a))), std::abs(s21(lay.q(b), lay.p(a))),
           std::abs(s21(lay.p(b), lay.q(a))), std::abs(s21(lay.p(b), lay.p(a)))});
      // Literal form: A-terms through the full S31, B-terms removed from S30
      // with S20 = S21 S10.
      const Cols2 s31_a = detector_cols(s31, lay, a);
      Matrix s30;
      s30.noalias() = s31 * s10;
      const Matrix rows20_b = rows21_b * s10;
      Matrix upsilon0_lit = remove_detector(s30, s31_a, rows10_a);
      upsilon0_lit.noalias() -= s32_b * rows20_b;
      const Matrix literal = shared + prepared_term(s31_a, ga) + sandwich(upsilon0_lit, sigma0) +
                             correction_term(upsilon0_lit, sigma0, rows10_a, ga);
      rep.literal_defect = max_abs(literal - run.final_state.sigma);
    }
  }

  const Matrix diff = reassembled - run.final_state.sigma;
  rep.full_defect = max_abs(diff);
  const int nd = lay.n_detectors();
  const Eigen::Index n = lay.n_sites();
  rep.field_defect = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      rep.field_defect = std::max(rep.field_defect, std::abs(diff(2 * (nd + i), 2 * (nd + j))));
  rep.pass = rep.field_defect <= rep.tolerance && rep.full_defect <= rep.tolerance;
  if (rep.literal_defect && rep.retarded_block == 0.0)
    rep.pass = rep.pass && *rep.literal_defect <= rep.tolerance;
  return rep;
}

SwapComparison in_frame_swap(const ScenarioConfig& cfg, Frame frame) {
  return in_frame_swap(cfg, run_one_frame(cfg, frame, true));
}

SwapComparison in_frame_swap(const ScenarioConfig& cfg, const FrameRun& run) {
  if (cfg.measurements.size() != 2) throw UnsupportedError("order swap needs two measurements");
  if (run.segments.size() != 3) throw ConfigError("order swap needs a run that kept its segments");
  const Frame frame = run.frame;
  const auto& first = run.events[0].spec;
  const auto& second = run.events[1].spec;

  CovarianceState state = dynamics::evolve(run.initial, run.segments[0]);
  state.time = first.time;
  state = dynamics::evolve(state, run.segments[1]);
  state.time = second.time;
  state = measurement::collapse_paper(state, second).first;
  state = measurement::collapse_paper_conjugated(state, first, run.segments[1]).first;
  state = dynamics::evolve(state, run.segments[2]);
  state.time = cfg.comparison_time();

  const auto obs = comparison_observables(cfg, frame, cfg.comparison_time());
  const Matrix natural = gaussian::smeared_correlator_matrix(run.final_state, obs);
  const Matrix swapped = gaussian::smeared_correlator_matrix(state, obs);
  SwapComparison out;
  out.frobenius_relative = relative_frobenius(natural, swapped);
  out.max_abs = max_abs(run.final_state.sigma - state.sigma);
  return out;
}

ScenarioConfig timelike_control(const ScenarioConfig& spacelike) {
  ScenarioConfig cfg = spacelike;
  cfg.name = spacelike.name + "_timelike";
  int a = -1, b = -1;
  for (size_t d = 0; d < cfg.detectors.size(); ++d) {
    if (std::abs(cfg.detectors[d].position + kPi) < 1e-12) a = static_cast<int>(d);
    if (std::abs(cfg.detectors[d].position) < 1e-12) b = static_cast<int>(d);
  }
  if (a < 0 || b < 0) throw ConfigError("timelike control needs detectors at x = -pi and x = 0");
  const double g = spacelike.measurements.empty() ? 1.0 : spacelike.measurements.front().g;
  const double t1 = 0.3;
  cfg.measurements = {{a, g, Frame::T, t1}, {b, g, Frame::T, t1 + kPi + 0.5}};
  cfg.comparison_time_in_pi = 2.0;
  cfg.expect = Separation::Timelike;
  return cfg;
}

OrderSwapReport order_swap_experiment(const ScenarioConfig& cfg) {
  return order_swap_experiment(cfg, run_one_frame(cfg, Frame::T, true), run_one_frame(cfg, Frame::Eta));
}

OrderSwapReport order_swap_experiment(const ScenarioConfig& cfg, const FrameRun& run_t,
                                      const FrameRun& run_eta) {
  if (cfg.measurements.size() != 2) throw UnsupportedError("order swap needs two measurements");
  OrderSwapReport rep;
  rep.spacelike_classification = classify(cfg, cfg.measurements[0], cfg.measurements[1]);
  if (rep.spacelike_classification == Separation::Unspecified) {
    throw ConfigError("measurement events are within 4 dx of the light cone: neither spacelike "
                      "nor timelike on this lattice");
  }
  if (rep.spacelike_classification != Separation::Spacelike)
    throw ConfigError("order swap experiment expects spacelike separated measurements");

  auto detector_order = [](const FrameRun& run) {
    std::vector<int> o;
    for (const auto& e : run.events) o.push_back(e.spec.detector);
    return o;
  };

  rep.order_t = detector_order(run_t);
  rep.order_eta = detector_order(run_eta);
  rep.spacelike_frames = compare_frames(run_t, run_eta, cfg);
  rep.spacelike_in_frame = in_frame_swap(cfg, run_t);
  rep.spacelike_commutes = rep.spacelike_in_frame.frobenius_relative <= cfg.tolerances.commutation;

  rep.timelike_cfg = timelike_control(cfg);
  {
    const FrameRun rt = run_one_frame(rep.timelike_cfg, Frame::T, true);
    const FrameRun re = run_one_frame(rep.timelike_cfg, Frame::Eta);
    rep.timelike_order_t = detector_order(rt);
    rep.timelike_order_eta = detector_order(re);
    rep.timelike_frames = compare_frames(rt, re, rep.timelike_cfg);
    rep.timelike_in_frame = in_frame_swap(rep.timelike_cfg, rt);
  }

  const auto& tl = rep.timelike_cfg;
  const auto h = dynamics::build_hamiltonian(Frame::T, tl.lattice(), tl.detectors, tl.chart());
  rep.delay = dynamics::retarded_delay_check(h, tl.measurements[0].detector,
                                             tl.measurements[1].detector, tl.comparison_time(),
                                             tl.integrator);
  rep.negative_control =
      rep.timelike_in_frame.frobenius_relative >= 10.0 * cfg.tolerances.commutation &&
      rep.delay.max_before_cone <= 1e-10 && rep.delay.max_after_cone >= 1e-6;
  return rep;
}

SweepReport refinement_sweep(const ScenarioConfig& cfg, int levels) {
  if (levels < 2) throw ConfigError("a refinement sweep needs at least two levels");
  SweepReport rep;
  std::vector<ScenarioConfig> cfgs;
  for (int k = 0; k < levels; ++k) {
    ScenarioConfig c = cfg;
    c.target_dx = cfg.lattice().dx() * std::ldexp(1.0, levels - 1 - k);
    const auto lat = c.lattice();
    const int pairs = lat.n_sites() + static_cast<int>(c.detectors.size());
    if (pairs > kMaxPairs) {
      throw ConfigError(fmt::format("refinement level {} needs {} phase-space pairs (limit {})", k,
                                    pairs, kMaxPairs));
    }
    cfgs.push_back(std::move(c));
  }
  for (const auto& c : cfgs) {
    const FrameRun rt = run_one_frame(c, Frame::T);
    const FrameRun re = run_one_frame(c, Frame::Eta);
    SweepLevel lvl;
    lvl.dx = c.lattice().dx();
    lvl.n_pairs = rt.initial.layout.n_pairs();
    lvl.report = compare_frames(rt, re, c);
    rep.levels.push_back(std::move(lvl));
  }
  rep.monotone = true;
  for (size_t k = 1; k < rep.levels.size(); ++k) {
    const double prev = rep.levels[k - 1].report.frobenius_relative;
    const double cur = rep.levels[k].report.frobenius_relative;
    rep.observed_order.push_back(cur > 0.0 ? std::log2(prev / cur) : 0.0);
    rep.monotone = rep.monotone && cur < prev;
  }
  return rep;
}

}  // namespace csim::scenarios
