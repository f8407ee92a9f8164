#pragma once

// Quadratic Hamiltonians of detectors + lattice field in either frame and the
// symplectic propagators they generate.
//
// t-frame:   H = sum_d 1/2 [(P_d - lambda Phi_{i_d})^2 + omega^2 Q_d^2]
//              + sum_i pi_i^2 / (2 dx) + sum_i (Phi_{i+1} - Phi_i)^2 / (2 dx)
// eta-frame: same field part; detector part multiplied by d tau / d eta.
//
// Propagation uses a Strang splitting into three exactly solvable flows
// (field kinetic shear, field gradient shear, detector rotation), so every
// step is exactly symplectic. At Courant number dt/dx < 1 information moves
// at most one site per step.

#include "csim/common.hpp"
#include "csim/gaussian.hpp"
#include "csim/geometry.hpp"
#include "csim/lattice.hpp"

#include <algorithm>
#include <optional>
#include <vector>

namespace csim::dynamics {

/// Worker thread count, from COLLAPSE_SIM_THREADS (default: all cores).
int worker_threads();

class QuadraticHamiltonian {
 public:
  QuadraticHamiltonian(Frame frame, lattice::LatticeSpec lat,
                       std::vector<gaussian::DetectorSpec> detectors, geometry::ChartParams chart);

  Frame frame() const { return frame_; }
  const lattice::LatticeSpec& lattice() const { return lattice_; }
  const std::vector<gaussian::DetectorSpec>& detectors() const { return detectors_; }
  const geometry::ChartParams& chart() const { return chart_; }
  const gaussian::PhaseSpaceLayout& layout() const { return layout_; }
  int detector_site(int d) const { return sites_[static_cast<size_t>(d)]; }
  const geometry::WorldlineClock& clock(int d) const { return clocks_[static_cast<size_t>(d)]; }

  /// d tau_d / d(coordinate time); 1 in the t-frame.
  double detector_rate(int d, double time) const;

  /// Dense symmetric h(time) with H = 1/2 z^T h z.
  Matrix dense(double time) const;

  /// <H> at the given time (1/2 tr(h Sigma) + 1/2 m^T h m).
  double energy(const gaussian::CovarianceState& state) const;

 private:
  Frame frame_;
  lattice::LatticeSpec lattice_;
  std::vector<gaussian::DetectorSpec> detectors_;
  geometry::ChartParams chart_;
  gaussian::PhaseSpaceLayout layout_;
  std::vector<int> sites_;
  std::vector<geometry::WorldlineClock> clocks_;
};

/// Detectors must sit at interior sites x = n pi and be underdamped.
QuadraticHamiltonian build_hamiltonian(Frame frame, const lattice::LatticeSpec& lat,
                                       const std::vector<gaussian::DetectorSpec>& detectors,
                                       const geometry::ChartParams& chart);

struct IntegratorSettings {
  double dt_factor = 0.999;  // step <= dt_factor * dx
  double symplectic_tol = 1e-8;
  bool check_symplectic = true;
};

struct SymplecticPropagator {
  Matrix s;
  double t_a = 0.0;
  double t_b = 0.0;
  Frame frame = Frame::T;
  int steps = 0;
  double symplectic_defect = 0.0;  // NaN when not checked
};

/// Uniform steps for [t_a, t_b]: ceil((t_b - t_a) / (dt_factor dx)).
int step_count(double t_a, double t_b, double dx, double dt_factor);

/// Applies the flow from t_a to t_b to the rows of x in place (x <- S x).
void advance(const QuadraticHamiltonian& h, Matrix& x, double t_a, double t_b, int steps);

SymplecticPropagator integrate_propagator(const QuadraticHamiltonian& h, double t_a, double t_b,
                                          const IntegratorSettings& settings = {});
SymplecticPropagator integrate_propagator(const QuadraticHamiltonian& h, double t_a, double t_b,
                                          int steps, const IntegratorSettings& settings);

/// ||S^T J S - J||_inf (maximum absolute row sum).
double symplectic_defect(const Matrix& s);

/// later * earlier, skipping the structural zeros of `later`.
Matrix compose(const Matrix& later, const Matrix& earlier);

/// S^{-1} = -J S^T J.
Matrix symplectic_inverse(const Matrix& s);

gaussian::CovarianceState evolve(const gaussian::CovarianceState& state,
                                 const SymplecticPropagator& prop);

struct DetectorModes {
  double phi = 0.0;  // Q(tau) coefficient of Q(0)
  double f = 0.0;    // Q(tau) coefficient of P(0)
  double pi = 0.0;   // P(tau) coefficient of Q(0)
  double p = 0.0;    // P(tau) coefficient of P(0)
};

/// Closed-form damped oscillator (d^2 + 2 gamma d + omega^2) with
/// gamma = lambda^2 / 4; the momentum entries include the detector's own
/// retarded field at its site.
DetectorModes detector_mode_oracle(double omega, double lambda, double tau);

struct OracleComparison {
  // max |lattice - oracle| / max |oracle| over the sampled times, per entry
  double phi = 0.0;
  double f = 0.0;
  double pi = 0.0;
  double p = 0.0;
  double max() const { return std::max({phi, f, pi, p}); }
};

/// Compares the detector's own 2x2 propagator block with the damped
/// oscillator at the given proper times (t-frame Hamiltonian).
OracleComparison compare_detector_oracle(const QuadraticHamiltonian& h, int detector,
                                         const std::vector<double>& taus,
                                         const IntegratorSettings& settings = {});

struct HuygensReport {
  double defect = 0.0;
  double step = 0.0;
  bool shared_mesh = false;
};

/// ||S(t2,t0) - S(t2,t1) S(t1,t0)||_inf, all three integrated on one time
/// mesh when the two segment lengths are commensurate.
HuygensReport huygens_check(const QuadraticHamiltonian& h, double t0, double t1, double t2,
                            const IntegratorSettings& settings = {});

struct DelayReport {
  std::optional<double> first_influence;  // earliest time |S[B, A]| > threshold
  double max_before_cone = 0.0;           // max |S[B, A]| for t <= separation - 2 dx
  double max_after_cone = 0.0;            // max |S[B, A]| for t >= separation
  double separation = 0.0;
  double threshold = 1e-10;
};

/// Scans the source -> target block of the propagator from 0 to horizon.
DelayReport retarded_delay_check(const QuadraticHamiltonian& h, int source, int target,
                                 double horizon, const IntegratorSettings& settings = {});

}  // namespace csim::dynamics
