#include "csim/dynamics.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <thread>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace csim::dynamics {

namespace {

constexpr Eigen::Index kColumnBlock = 32;

/// Detector coefficients for every half step of a uniform schedule: entry
/// (k, 2d) at t_a + k h + h/4, (k, 2d + 1) at t_a + k h + 3h/4.
Matrix detector_schedule(const QuadraticHamiltonian& h, double t_a, double step, int steps) {
  const int nd = static_cast<int>(h.detectors().size());
  Matrix c(steps, 2 * nd);
  for (int k = 0; k < steps; ++k) {
    const double t0 = t_a + k * step;
    for (int d = 0; d < nd; ++d) {
      c(k, 2 * d) = h.detector_rate(d, t0 + 0.25 * step);
      c(k, 2 * d + 1) = h.detector_rate(d, t0 + 0.75 * step);
    }
  }
  return c;
}

/// One Strang step applied to the rows of a block (block <- U block).
class SplitStep {
 public:
  SplitStep(const QuadraticHamiltonian& h, double step) : h_(h), step_(step) {
    const auto& lay = h.layout();
    n_ = h.lattice().n_sites();
    ratio_ = step / h.lattice().dx();
    for (size_t d = 0; d < h.detectors().size(); ++d) {
      const int di = static_cast<int>(d);
      det_.push_back({lay.q(di), lay.p(di), lay.phi(h.detector_site(di)),
                      lay.pi(h.detector_site(di)), h.detectors()[d].omega,
                      h.detectors()[d].coupling});
    }
    phi0_ = lay.phi(0);
  }

  /// Sites outside [lo, hi] must hold zero rows throughout.
  void apply(Matrix& b, const double* coef, int lo, int hi) const {
    detectors(b, coef, 0);
    potential(b, 0.5 * ratio_, lo, hi);
    kinetic(b, ratio_, lo, hi);
    potential(b, 0.5 * ratio_, lo, hi);
    detectors(b, coef, 1);
  }

 private:
  struct Det {
    Eigen::Index q, p, phi, pi;
    double omega, lambda;
  };

  // Rows Phi_i = phi0 + 2i, pi_i = phi0 + 2i + 1.
  void kinetic(Matrix& b, double r, int lo, int hi) const {
    for (int i = lo; i <= hi; ++i) b.row(phi0_ + 2 * i) += r * b.row(phi0_ + 2 * i + 1);
  }

  void potential(Matrix& b, double r, int lo, int hi) const {
    for (int i = lo; i <= hi; ++i) {
      auto pi = b.row(phi0_ + 2 * i + 1);
      pi -= (2.0 * r) * b.row(phi0_ + 2 * i);
      if (i > 0) pi += r * b.row(phi0_ + 2 * i - 2);
      if (i + 1 < n_) pi += r * b.row(phi0_ + 2 * i + 2);
    }
  }

  // Exact flow of c/2 [(P - lambda Phi)^2 + omega^2 Q^2] for half a step:
  // (Q, P - lambda Phi) rotates, pi at the site picks up lambda dQ.
  void detectors(Matrix& b, const double* coef, int half) const {
    for (size_t d = 0; d < det_.size(); ++d) {
      const Det& e = det_[d];
      const double th = coef[2 * d + static_cast<size_t>(half)] * e.omega * 0.5 * step_;
      const double c = std::cos(th), s = std::sin(th);
      const Eigen::RowVectorXd q = b.row(e.q);
      const Eigen::RowVectorXd pp = b.row(e.p) - e.lambda * b.row(e.phi);
      const Eigen::RowVectorXd qn = c * q + (s / e.omega) * pp;
      b.row(e.pi) += e.lambda * (qn - q);
      b.row(e.p) = -e.omega * s * q + c * pp + e.lambda * b.row(e.phi);
      b.row(e.q) = qn;
    }
  }

  const QuadraticHamiltonian& h_;
  double step_;
  double ratio_ = 0.0;
  int n_ = 0;
  Eigen::Index phi0_ = 0;
  std::vector<Det> det_;
};

void check_interval(double t_a, double t_b) {
  if (!(t_b >= t_a)) {
    throw ConfigError(fmt::format("propagation interval must be ordered, got [{}, {}]", t_a, t_b));
  }
}


/// Site hull touched by the columns of a block: site j for Phi_j, pi_j and
/// the detector's site for Q_d, P_d.
std::pair<int, int> block_site_hull(const QuadraticHamiltonian& h, Eigen::Index c0, Eigen::Index w) {
  const auto& pairs = h.layout().pairs();
  int lo = std::numeric_limits<int>::max(), hi = -1;
  for (Eigen::Index c = c0; c < c0 + w; ++c) {
    const auto& lab = pairs[static_cast<size_t>(c / 2)];
    const int site = lab.kind == gaussian::PairLabel::Kind::Site ? lab.index : h.detector_site(lab.index);
    lo = std::min(lo, site);
    hi = std::max(hi, site);
  }
  return {lo, hi};
}

void check_steps(const QuadraticHamiltonian& h, const Matrix& x, double t_a, double t_b, int steps) {
  check_interval(t_a, t_b);
  if (steps == 0 && t_b > t_a) throw ConfigError("nonzero interval needs at least one step");
  if (x.rows() != h.layout().dim()) throw ConfigError("matrix rows do not match the layout");
  if (steps > 0 && (t_b - t_a) / steps >= h.lattice().dx()) {
    throw ConfigError(fmt::format("step {} violates the CFL bound dx = {}", (t_b - t_a) / steps,
                                  h.lattice().dx()));
  }
}

/// x <- U x. With `local` set, x must be the identity on entry: column
/// block k then only ever touches sites within one site per step of its
/// own hull (plus one), which is where all of its nonzero entries live.
void propagate_columns(const QuadraticHamiltonian& h, Matrix& x, double t_a, double t_b, int steps,
                       bool local) {
  check_steps(h, x, t_a, t_b, steps);
  if (steps == 0) return;
  const double step = (t_b - t_a) / steps;
  const Matrix coef = detector_schedule(h, t_a, step, steps);
  const SplitStep stepper(h, step);
  const int n = h.lattice().n_sites();

  // Columns evolve independently; each block stays cache resident for the
  // whole interval.
  const Eigen::Index n_blocks = (x.cols() + kColumnBlock - 1) / kColumnBlock;
#pragma omp parallel for schedule(dynamic) num_threads(worker_threads())
  for (Eigen::Index blk = 0; blk < n_blocks; ++blk) {
    const Eigen::Index c0 = blk * kColumnBlock;
    const Eigen::Index w = std::min(kColumnBlock, x.cols() - c0);
    auto [lo, hi] = local ? block_site_hull(h, c0, w) : std::pair<int, int>{0, n - 1};
    Matrix b = x.middleCols(c0, w);
    for (int k = 0; k < steps; ++k) {
      if (local) {
        lo = std::max(0, lo - (k == 0 ? 2 : 1));
        hi = std::min(n - 1, hi + (k == 0 ? 2 : 1));
      }
      stepper.apply(b, coef.row(k).data(), lo, hi);
    }
    x.middleCols(c0, w) = b;
  }
}
}  // namespace

int worker_threads() {
  if (const char* env = std::getenv("COLLAPSE_SIM_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

QuadraticHamiltonian::QuadraticHamiltonian(Frame frame, lattice::LatticeSpec lat,
                                           std::vector<gaussian::DetectorSpec> detectors,
                                           geometry::ChartParams chart)
    : frame_(frame), lattice_(lat), detectors_(std::move(detectors)), chart_(chart) {
  layout_ = gaussian::PhaseSpaceLayout::standard(static_cast<int>(detectors_.size()),
                                                 lattice_.n_sites());
  for (const auto& d : detectors_) {
    const double n_pi = d.position / kPi;
    const long n = std::lround(n_pi);
    if (std::abs(n_pi - static_cast<double>(n)) > 1e-12) {
      throw ConfigError(fmt::format("detector '{}' at x = {} is not at a multiple of pi", d.name,
                                    d.position));
    }
    sites_.push_back(lattice_.site_at_multiple_of_pi(static_cast<int>(n)));
    clocks_.emplace_back(d.position, frame_, chart_);
    if (!(d.omega > 0.0)) throw ConfigError(fmt::format("detector '{}' needs omega > 0", d.name));
    if (d.coupling * d.coupling / 4.0 >= d.omega) {
      throw UnsupportedError(fmt::format(
          "detector '{}' is overdamped (gamma = lambda^2/4 = {} >= omega = {})", d.name,
          d.coupling * d.coupling / 4.0, d.omega));
    }
  }
}

double QuadraticHamiltonian::detector_rate(int d, double time) const {
  return clocks_[static_cast<size_t>(d)].redshift(time);
}

Matrix QuadraticHamiltonian::dense(double time) const {
  const int dim = layout_.dim();
  Matrix h = Matrix::Zero(dim, dim);
  const double dx = lattice_.dx();
  const int n = lattice_.n_sites();
  for (int i = 0; i < n; ++i) {
    h(layout_.pi(i), layout_.pi(i)) = 1.0 / dx;
    h(layout_.phi(i), layout_.phi(i)) = 2.0 / dx;
    if (i + 1 < n) h(layout_.phi(i), layout_.phi(i + 1)) = h(layout_.phi(i + 1), layout_.phi(i)) = -1.0 / dx;
  }
  for (size_t k = 0; k < detectors_.size(); ++k) {
    const int d = static_cast<int>(k);
    const auto& det = detectors_[k];
    const double c = detector_rate(d, time);
    const int q = layout_.q(d), p = layout_.p(d), f = layout_.phi(sites_[k]);
    h(q, q) += c * det.omega * det.omega;
    h(p, p) += c;
    h(p, f) += -c * det.coupling;
    h(f, p) += -c * det.coupling;
    h(f, f) += c * det.coupling * det.coupling;
  }
  return h;
}

double QuadraticHamiltonian::energy(const gaussian::CovarianceState& state) const {
  if (!(state.layout == layout_)) throw ConfigError("state layout does not match the Hamiltonian");
  const Matrix h = dense(state.time);
  return 0.5 * h.cwiseProduct(state.sigma).sum() + 0.5 * state.mean.dot(h * state.mean);
}

QuadraticHamiltonian build_hamiltonian(Frame frame, const lattice::LatticeSpec& lat,
                                       const std::vector<gaussian::DetectorSpec>& detectors,
                                       const geometry::ChartParams& chart) {
  return QuadraticHamiltonian(frame, lat, detectors, chart);
}

int step_count(double t_a, double t_b, double dx, double dt_factor) {
  if (!(dt_factor > 0.0 && dt_factor < 1.0)) {
    throw ConfigError(fmt::format(
        "dt_factor = {} violates the CFL bound: the step must satisfy 0 < dt < dx", dt_factor));
  }
  check_interval(t_a, t_b);
  return static_cast<int>(std::ceil((t_b - t_a) / (dt_factor * dx) - 1e-9));
}

void advance(const QuadraticHamiltonian& h, Matrix& x, double t_a, double t_b, int steps) {
  propagate_columns(h, x, t_a, t_b, steps, {});
}

SymplecticPropagator integrate_propagator(const QuadraticHamiltonian& h, double t_a, double t_b,
                                          const IntegratorSettings& settings) {
  return integrate_propagator(h, t_a, t_b,
                              step_count(t_a, t_b, h.lattice().dx(), settings.dt_factor), settings);
}

SymplecticPropagator integrate_propagator(const QuadraticHamiltonian& h, double t_a, double t_b,
                                          int steps, const IntegratorSettings& settings) {
  SymplecticPropagator prop;
  prop.t_a = t_a;
  prop.t_b = t_b;
  prop.frame = h.frame();
  prop.steps = steps;
  prop.s = Matrix::Identity(h.layout().dim(), h.layout().dim());
  propagate_columns(h, prop.s, t_a, t_b, steps, true);
  prop.symplectic_defect = std::numeric_limits<double>::quiet_NaN();
  if (settings.check_symplectic) {
    prop.symplectic_defect = symplectic_defect(prop.s);
    if (!(prop.symplectic_defect <= settings.symplectic_tol)) {
      throw NumericalError(fmt::format("propagator over [{}, {}] has symplectic defect {:.3e} > {:.3e}",
                                       t_a, t_b, prop.symplectic_defect, settings.symplectic_tol));
    }
  }
  return prop;
}

namespace {

/// J x for the pair-block J, as a row permutation.
Matrix apply_j(const Matrix& x) {
  Matrix out(x.rows(), x.cols());
  for (Eigen::Index k = 0; k < x.rows() / 2; ++k) {
    out.row(2 * k) = x.row(2 * k + 1);
    out.row(2 * k + 1) = -x.row(2 * k);
  }
  return out;
}

struct RowRun {
  Eigen::Index r0, len;
};

struct ColumnBlock {
  Eigen::Index c0, w;
  std::vector<RowRun> runs;  // pair-aligned row runs holding every nonzero
};

/// Nonzero row runs per block of columns; runs closer than a few pairs are
/// merged so that each becomes one reasonably sized product.
std::vector<ColumnBlock> column_support(const Matrix& s) {
  constexpr Eigen::Index kGap = 16;
  const Eigen::Index pairs = s.rows() / 2;
  std::vector<ColumnBlock> out;
  for (Eigen::Index c0 = 0; c0 < s.cols(); c0 += kColumnBlock) {
    ColumnBlock blk{c0, std::min(kColumnBlock, s.cols() - c0), {}};
    Eigen::Index start = -1, last = -1;
    for (Eigen::Index k = 0; k < pairs; ++k) {
      if (s.block(2 * k, c0, 2, blk.w).cwiseAbs().maxCoeff() == 0.0) continue;
      if (start >= 0 && k - last > kGap) {
        blk.runs.push_back({2 * start, 2 * (last - start + 1)});
        start = -1;
      }
      if (start < 0) start = k;
      last = k;
    }
    if (start >= 0) blk.runs.push_back({2 * start, 2 * (last - start + 1)});
    out.push_back(std::move(blk));
  }
  return out;
}

/// s sigma s^T, skipping the structural zeros of s.
Matrix sandwich(const Matrix& s, const Matrix& sigma) {
  const auto support = column_support(s);
  Matrix t = Matrix::Zero(s.rows(), sigma.cols());
  for (const auto& blk : support)
    for (const auto& r : blk.runs)
      t.middleRows(r.r0, r.len).noalias() +=
          s.block(r.r0, blk.c0, r.len, blk.w) * sigma.middleRows(blk.c0, blk.w);
  Matrix out = Matrix::Zero(s.rows(), s.rows());
  for (const auto& blk : support)
    for (const auto& r : blk.runs)
      out.middleCols(r.r0, r.len).noalias() +=
          t.middleCols(blk.c0, blk.w) * s.block(r.r0, blk.c0, r.len, blk.w).transpose();
  return out;
}

}  // namespace

double symplectic_defect(const Matrix& s) {
  // (S^T J S) rows of a column block only see that block's row runs; J
  // maps each pair onto itself.
  const Matrix js = apply_j(s);
  Matrix m = Matrix::Zero(s.cols(), s.cols());
  for (const auto& blk : column_support(s)) {
    for (const auto& r : blk.runs) {
      m.middleRows(blk.c0, blk.w).noalias() +=
          s.block(r.r0, blk.c0, r.len, blk.w).transpose() * js.middleRows(r.r0, r.len);
    }
  }
  for (Eigen::Index k = 0; k < m.rows() / 2; ++k) {
    m(2 * k, 2 * k + 1) -= 1.0;
    m(2 * k + 1, 2 * k) += 1.0;
  }
  return m.cwiseAbs().rowwise().sum().maxCoeff();
}

Matrix compose(const Matrix& later, const Matrix& earlier) {
  if (later.cols() != earlier.rows()) throw ConfigError("propagator shapes do not compose");
  Matrix out = Matrix::Zero(later.rows(), earlier.cols());
  for (const auto& blk : column_support(later))
    for (const auto& r : blk.runs)
      out.middleRows(r.r0, r.len).noalias() +=
          later.block(r.r0, blk.c0, r.len, blk.w) * earlier.middleRows(blk.c0, blk.w);
  return out;
}

Matrix symplectic_inverse(const Matrix& s) {
  // -J S^T J: (S^T J) = (J^T S)^T = -(J S)^T.
  const Matrix st_j = -apply_j(s).transpose();
  return -apply_j(st_j);
}

gaussian::CovarianceState evolve(const gaussian::CovarianceState& state,
                                 const SymplecticPropagator& prop) {
  if (state.frame != prop.frame) throw ConfigError("state and propagator frames differ");
  if (std::abs(state.time - prop.t_a) > 1e-12) {
    throw ConfigError(fmt::format("state is at time {}, propagator starts at {}", state.time,
                                  prop.t_a));
  }
  if (prop.s.rows() != state.layout.dim()) throw ConfigError("state and propagator layouts differ");
  gaussian::CovarianceState out;
  out.layout = state.layout;
  out.frame = state.frame;
  out.time = prop.t_b;
  out.sigma = sandwich(prop.s, state.sigma);
  out.sigma = 0.5 * (out.sigma + out.sigma.transpose()).eval();
  out.mean = prop.s * state.mean;
  return out;
}

DetectorModes detector_mode_oracle(double omega, double lambda, double tau) {
  const double gamma = lambda * lambda / 4.0;
  if (!(gamma < omega)) {
    throw UnsupportedError(
        fmt::format("gamma = {} >= omega = {}: outside the underdamped regime", gamma, omega));
  }
  const double w = std::sqrt(omega * omega - gamma * gamma);
  const double e = std::exp(-gamma * tau);
  const double c = std::cos(w * tau), s = std::sin(w * tau);
  DetectorModes m;
  m.phi = e * (c + gamma / w * s);
  m.f = e * s / w;
  const double phi_dot = -(omega * omega / w) * e * s;
  const double f_dot = e * (c - gamma / w * s);
  // P = dQ/dtau + lambda Phi(site), and the self field at the site is
  // (lambda/2)(Q(tau) - Q(0)).
  m.pi = phi_dot + 2.0 * gamma * (m.phi - 1.0);
  m.p = f_dot + 2.0 * gamma * m.f;
  return m;
}

OracleComparison compare_detector_oracle(const QuadraticHamiltonian& h, int detector,
                                         const std::vector<double>& taus,
                                         const IntegratorSettings& settings) {
  if (h.frame() != Frame::T) throw UnsupportedError("oracle comparison runs in the t-frame");
  const auto& det = h.detectors().at(static_cast<size_t>(detector));
  const auto& lay = h.layout();
  std::array<double, 4> err{}, scale{};
  for (double tau : taus) {
    Matrix x = Matrix::Zero(lay.dim(), 2);
    x(lay.q(detector), 0) = 1.0;
    x(lay.p(detector), 1) = 1.0;
    advance(h, x, 0.0, tau, step_count(0.0, tau, h.lattice().dx(), settings.dt_factor));
    const DetectorModes m = detector_mode_oracle(det.omega, det.coupling, tau);
    const std::array<double, 4> lat{x(lay.q(detector), 0), x(lay.q(detector), 1),
                                    x(lay.p(detector), 0), x(lay.p(detector), 1)};
    const std::array<double, 4> orc{m.phi, m.f, m.pi, m.p};
    for (size_t k = 0; k < 4; ++k) {
      err[k] = std::max(err[k], std::abs(lat[k] - orc[k]));
      scale[k] = std::max(scale[k], std::abs(orc[k]));
    }
  }
  OracleComparison out;
  out.phi = err[0] / scale[0];
  out.f = err[1] / scale[1];
  out.pi = err[2] / scale[2];
  out.p = err[3] / scale[3];
  return out;
}

HuygensReport huygens_check(const QuadraticHamiltonian& h, double t0, double t1, double t2,
                            const IntegratorSettings& settings) {
  if (!(t0 <= t1 && t1 <= t2)) {
    throw ConfigError(fmt::format("huygens check needs t0 <= t1 <= t2, got {}, {}, {}", t0, t1, t2));
  }
  const double dx = h.lattice().dx();
  const double d1 = t1 - t0, d2 = t2 - t1;
  int n1 = step_count(t0, t1, dx, settings.dt_factor);
  int n2 = step_count(t1, t2, dx, settings.dt_factor);

  HuygensReport rep;
  if (n1 > 0 && n2 > 0) {
    for (int cand = n1; cand < n1 + 4096; ++cand) {
      const double r = d2 * cand / d1;
      const double rn = std::round(r);
      if (rn >= n2 && std::abs(r - rn) < 1e-9 * std::max(1.0, r)) {
        n1 = cand;
        n2 = static_cast<int>(rn);
        rep.shared_mesh = true;
        break;
      }
    }
  } else {
    rep.shared_mesh = true;
  }
  rep.step = (n1 + n2) > 0 ? (t2 - t0) / (n1 + n2) : 0.0;

  IntegratorSettings no_check = settings;
  no_check.check_symplectic = false;
  const auto s10 = integrate_propagator(h, t0, t1, n1, no_check);
  const auto s21 = integrate_propagator(h, t1, t2, n2, no_check);
  const auto s20 = integrate_propagator(
      h, t0, t2, rep.shared_mesh ? n1 + n2 : step_count(t0, t2, dx, settings.dt_factor), no_check);
  const Matrix prod = compose(s21.s, s10.s);
  rep.defect = (s20.s - prod).cwiseAbs().rowwise().sum().maxCoeff();
  return rep;
}

DelayReport retarded_delay_check(const QuadraticHamiltonian& h, int source, int target,
                                 double horizon, const IntegratorSettings& settings) {
  const auto& dets = h.detectors();
  if (source < 0 || target < 0 || source >= static_cast<int>(dets.size()) ||
      target >= static_cast<int>(dets.size()) || source == target) {
    throw ConfigError("delay check needs two distinct detectors");
  }
  DelayReport rep;
  rep.separation = std::abs(dets[static_cast<size_t>(source)].position -
                            dets[static_cast<size_t>(target)].position);
  const double dx = h.lattice().dx();
  const int steps = step_count(0.0, horizon, dx, settings.dt_factor);
  if (steps == 0) return rep;
  const double step = horizon / steps;

  const auto& lay = h.layout();
  Matrix x = Matrix::Zero(lay.dim(), 2);
  x(lay.q(source), 0) = 1.0;
  x(lay.p(source), 1) = 1.0;
  const Matrix coef = detector_schedule(h, 0.0, step, steps);
  const SplitStep stepper(h, step);
  for (int k = 0; k < steps; ++k) {
    stepper.apply(x, coef.row(k).data(), 0, h.lattice().n_sites() - 1);
    const double t = (k + 1) * step;
    const double v = std::max(x.row(lay.q(target)).cwiseAbs().maxCoeff(),
                              x.row(lay.p(target)).cwiseAbs().maxCoeff());
    if (!rep.first_influence && v > rep.threshold) rep.first_influence = t;
    if (t <= rep.separation - 2.0 * dx) rep.max_before_cone = std::max(rep.max_before_cone, v);
    if (t >= rep.separation) rep.max_after_cone = std::max(rep.max_after_cone, v);
  }
  return rep;
}

}  // namespace csim::dynamics
