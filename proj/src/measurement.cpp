#include "csim/measurement.hpp"

#include <fmt/format.h>

#include <cmath>

namespace csim::measurement {

namespace {

void check_zero_mean(const gaussian::CovarianceState& state) {
  if (state.mean.size() > 0 && state.mean.cwiseAbs().maxCoeff() != 0.0) {
    throw UnsupportedError("collapse of a state with nonzero mean is not supported");
  }
}

void check_g(double g) {
  if (!(g > 0.0) || !std::isfinite(g)) {
    throw ConfigError(fmt::format("measurement squeezing g must be positive, got {}", g));
  }
}

void zero_detector_cross(Matrix& s, int q, int p) {
  s.row(q).setZero();
  s.row(p).setZero();
  s.col(q).setZero();
  s.col(p).setZero();
}

}  // namespace

std::pair<gaussian::CovarianceState, CollapseLedger> collapse_paper(
    const gaussian::CovarianceState& state, const MeasurementSpec& spec) {
  check_g(spec.g);
  if (state.frame != spec.frame) {
    throw ConfigError(fmt::format("measurement in the {}-frame applied to a {}-frame state",
                                  to_string(spec.frame), to_string(state.frame)));
  }
  if (std::abs(state.time - spec.time) > 1e-12) {
    throw ConfigError(fmt::format("state is at time {}, measurement slice is at {}", state.time,
                                  spec.time));
  }
  check_zero_mean(state);

  const int q = state.layout.q(spec.detector), p = state.layout.p(spec.detector);
  const Matrix& s = state.sigma;
  const double qq = s(q, q), pp = s(p, p), qp = s(q, p);
  const double g = spec.g;

  CollapseLedger led;
  led.detector = spec.detector;
  led.g = g;
  led.time = spec.time;
  led.pre_block << qq, qp, qp, pp;
  led.ell = kHbar * g / 2.0 + pp;
  led.ell_bar = kHbar / (2.0 * g) + qq;
  led.j = led.ell * led.ell_bar - qp * qp;
  if (!(led.j > 0.0)) {
    throw NumericalError(fmt::format("collapse denominator J = {} is not positive", led.j));
  }

  const Vector cq = s.col(q), cp = s.col(p);
  Matrix corr = (-led.ell / led.j) * (cq * cq.transpose());
  corr.noalias() += (-led.ell_bar / led.j) * (cp * cp.transpose());
  corr.noalias() += (qp / led.j) * (cq * cp.transpose() + cp * cq.transpose());

  gaussian::CovarianceState out = state;
  out.sigma += corr;
  zero_detector_cross(out.sigma, q, p);
  out.sigma(q, q) = kHbar * g / 2.0;
  out.sigma(p, p) = kHbar / (2.0 * g);
  corr.row(q).setZero();
  corr.row(p).setZero();
  corr.col(q).setZero();
  corr.col(p).setZero();
  led.max_correction = corr.cwiseAbs().maxCoeff();
  led.post_block << out.sigma(q, q), out.sigma(q, p), out.sigma(p, q), out.sigma(p, p);
  return {std::move(out), led};
}

gaussian::CovarianceState collapse_schur_oracle(const gaussian::CovarianceState& state,
                                                int detector, const Eigen::Matrix2d& meter,
                                                const Eigen::Matrix2d& prepared) {
  check_zero_mean(state);
  const int q = state.layout.q(detector), p = state.layout.p(detector);
  Eigen::Matrix2d sd;
  sd << state.sigma(q, q), state.sigma(q, p), state.sigma(p, q), state.sigma(p, p);
  const Eigen::Matrix2d inv = (sd + meter).inverse();

  Eigen::Matrix<double, Eigen::Dynamic, 2> c(state.sigma.rows(), 2);
  c.col(0) = state.sigma.col(q);
  c.col(1) = state.sigma.col(p);
  gaussian::CovarianceState out = state;
  out.sigma.noalias() -= c * inv * c.transpose();
  zero_detector_cross(out.sigma, q, p);
  out.sigma(q, q) = prepared(0, 0);
  out.sigma(q, p) = prepared(0, 1);
  out.sigma(p, q) = prepared(1, 0);
  out.sigma(p, p) = prepared(1, 1);
  return out;
}

gaussian::CovarianceState collapse_schur_oracle(const gaussian::CovarianceState& state,
                                                int detector, const Eigen::Matrix2d& meter) {
  return collapse_schur_oracle(state, detector, meter, meter);
}

Eigen::Matrix2d literal_meter(double g) {
  check_g(g);
  return Eigen::Vector2d(kHbar * g / 2.0, kHbar / (2.0 * g)).asDiagonal();
}

Eigen::Matrix2d paper_equivalent_meter(double g) {
  check_g(g);
  return Eigen::Vector2d(kHbar / (2.0 * g), kHbar * g / 2.0).asDiagonal();
}

std::pair<gaussian::CovarianceState, CollapseLedger> collapse_paper_conjugated(
    const gaussian::CovarianceState& state, const MeasurementSpec& spec,
    const dynamics::SymplecticPropagator& s21) {
  if (std::abs(spec.time - s21.t_a) > 1e-12 || std::abs(state.time - s21.t_b) > 1e-12) {
    throw ConfigError("conjugated collapse: propagator does not connect the measurement slice "
                      "to the state's slice");
  }
  dynamics::SymplecticPropagator back;
  back.s = dynamics::symplectic_inverse(s21.s);
  back.t_a = s21.t_b;
  back.t_b = s21.t_a;
  back.frame = s21.frame;
  gaussian::CovarianceState earlier = state;
  earlier.time = s21.t_b;
  Matrix tmp = back.s * state.sigma;
  earlier.sigma.noalias() = tmp * back.s.transpose();
  earlier.mean = back.s * state.mean;
  earlier.time = s21.t_a;
  auto [post, led] = collapse_paper(earlier, spec);
  return {dynamics::evolve(post, s21), led};
}

gaussian::CovarianceState reduced_detector_state(const gaussian::CovarianceState& state) {
  std::vector<int> slots;
  for (int d = 0; d < state.layout.n_detectors(); ++d) slots.push_back(state.layout.detector_slot(d));
  return gaussian::marginal(state, slots);
}

double outcome_density(const gaussian::CovarianceState& reduced, const Vector& outcome,
                       const std::vector<double>& g) {
  const int nd = reduced.layout.n_detectors();
  if (reduced.layout.n_sites() != 0) throw ConfigError("outcome density needs a detectors-only state");
  if (static_cast<int>(g.size()) != nd) throw ConfigError("one meter g per detector is required");
  if (outcome.size() != reduced.layout.dim()) throw ConfigError("outcome has the wrong dimension");
  Matrix cov = reduced.sigma;
  // Pairs in layout order, so marginals onto any subset of detectors work.
  for (int k = 0; k < nd; ++k) {
    const Eigen::Matrix2d m = paper_equivalent_meter(g[static_cast<size_t>(k)]);
    cov(2 * k, 2 * k) += m(0, 0);
    cov(2 * k + 1, 2 * k + 1) += m(1, 1);
  }
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) throw NumericalError("outcome covariance is not positive definite");
  const Eigen::VectorXd y = outcome - reduced.mean;
  const Eigen::VectorXd z = llt.matrixL().solve(y);
  double log_det = 0.0;
  for (Eigen::Index k = 0; k < cov.rows(); ++k) log_det += 2.0 * std::log(llt.matrixL()(k, k));
  const double n = static_cast<double>(cov.rows());
  return std::exp(-0.5 * z.squaredNorm() - 0.5 * log_det - 0.5 * n * std::log(2.0 * kPi));
}

}  // namespace csim::measurement
