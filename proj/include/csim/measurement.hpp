#pragma once

// Instantaneous Gaussian measurements of a detector on a slice.
//
// collapse_paper replaces the measured detector block by diag(hbar g/2,
// hbar/2g), zeroes its cross blocks and corrects every other correlator by
// I / J with
//   l     = hbar g/2   + <P^2>,   l_bar = hbar/(2g) + <Q^2>,
//   J     = l l_bar - <QP>^2,
//   I(a,b) = -<a,Q><b,Q> l - <a,P><b,P> l_bar + <QP>(<a,Q><b,P> + <a,P><b,Q>).
// This coincides with conditioning on a meter of covariance
// diag(hbar/2g, hbar g/2) (paper_equivalent_meter).

#include "csim/common.hpp"
#include "csim/dynamics.hpp"
#include "csim/gaussian.hpp"

#include <Eigen/Dense>
#include <utility>
#include <vector>

namespace csim::measurement {

struct MeasurementSpec {
  int detector = 0;
  double g = 1.0;
  Frame frame = Frame::T;
  double time = 0.0;
};

struct CollapseLedger {
  int detector = 0;
  double g = 1.0;
  double time = 0.0;
  double ell = 0.0;
  double ell_bar = 0.0;
  double j = 0.0;
  double max_correction = 0.0;  // max |I / J|
  Eigen::Matrix2d pre_block = Eigen::Matrix2d::Zero();
  Eigen::Matrix2d post_block = Eigen::Matrix2d::Zero();
};

std::pair<gaussian::CovarianceState, CollapseLedger> collapse_paper(
    const gaussian::CovarianceState& state, const MeasurementSpec& spec);

/// Schur conditioning: rest -> rest - C (Sigma_d + meter)^{-1} C^T, cross
/// blocks zeroed, detector block set to `prepared`.
gaussian::CovarianceState collapse_schur_oracle(const gaussian::CovarianceState& state,
                                                int detector, const Eigen::Matrix2d& meter,
                                                const Eigen::Matrix2d& prepared);
gaussian::CovarianceState collapse_schur_oracle(const gaussian::CovarianceState& state,
                                                int detector, const Eigen::Matrix2d& meter);

/// Meter covariance diag(hbar g/2, hbar/2g) and its relabelling g -> 1/g.
Eigen::Matrix2d literal_meter(double g);
Eigen::Matrix2d paper_equivalent_meter(double g);

/// Applies a measurement that happened at s21.t_a to a state at s21.t_b,
/// i.e. S21 collapse(S21^{-1} Sigma S21^{-T}) S21^T.
std::pair<gaussian::CovarianceState, CollapseLedger> collapse_paper_conjugated(
    const gaussian::CovarianceState& state, const MeasurementSpec& spec,
    const dynamics::SymplecticPropagator& s21);

gaussian::CovarianceState reduced_detector_state(const gaussian::CovarianceState& state);

/// Density of the joint outcome (q_0, p_0, q_1, p_1, ...) of heterodyne-like
/// readouts with meter covariance paper_equivalent_meter(g_d) on each
/// detector of a detectors-only state; g follows the layout's pair order.
double outcome_density(const gaussian::CovarianceState& reduced, const Vector& outcome,
                       const std::vector<double>& g);

}  // namespace csim::measurement
