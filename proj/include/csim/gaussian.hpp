#pragma once

// Zero-mean (by default) Gaussian states of detectors + lattice field, stored
// as the dense matrix of symmetric two-point correlators
//   Sigma_ab = <z_a z_b + z_b z_a> / 2
// over the phase-space vector z = (Q_0, P_0, ..., Phi_0, pi_0, ...).

#include "csim/common.hpp"
#include "csim/geometry.hpp"
#include "csim/lattice.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace csim::gaussian {

struct DetectorSpec {
  std::string name;
  double omega = 1.0;
  double coupling = 0.0;  // lambda; gamma = lambda^2 / 4
  double position = 0.0;
};

struct PairLabel {
  enum class Kind { Detector, Site };
  Kind kind;
  int index;
  bool operator==(const PairLabel&) const = default;
};

class PhaseSpaceLayout {
 public:
  PhaseSpaceLayout() = default;
  explicit PhaseSpaceLayout(std::vector<PairLabel> pairs);

  /// Detectors first, then lattice sites in order.
  static PhaseSpaceLayout standard(int n_detectors, int n_sites);

  int n_pairs() const { return static_cast<int>(pairs_.size()); }
  int dim() const { return 2 * n_pairs(); }
  int n_detectors() const { return n_detectors_; }
  int n_sites() const { return n_sites_; }
  const std::vector<PairLabel>& pairs() const { return pairs_; }

  int detector_slot(int d) const;
  int site_slot(int i) const;
  int q(int d) const { return 2 * detector_slot(d); }
  int p(int d) const { return 2 * detector_slot(d) + 1; }
  int phi(int i) const { return 2 * site_slot(i); }
  int pi(int i) const { return 2 * site_slot(i) + 1; }

  Matrix symplectic_form() const;

  bool operator==(const PhaseSpaceLayout& o) const { return pairs_ == o.pairs_; }

 private:
  std::vector<PairLabel> pairs_;
  std::vector<int> detector_slots_;
  std::vector<int> site_slots_;
  int n_detectors_ = 0;
  int n_sites_ = 0;
};

struct CovarianceState {
  PhaseSpaceLayout layout;
  Matrix sigma;
  Vector mean;
  Frame frame = Frame::T;
  double time = 0.0;
};

/// Product of detector ground states and the field kernel on the t = eta = 0
/// slice. The kernel's modes n <= n_c = floor(N (1 - A) band_fraction) are
/// pulled back exactly through xi = x - A sin x (scalar Phi, density Pi);
/// the complementary lattice subspace is placed in the ground state of the
/// free lattice Hamiltonian restricted to it. Both frames use the same n_c, so
/// A = 0 gives identical states.
CovarianceState assemble_initial_state(const lattice::LatticeSpec& lat,
                                       const std::vector<DetectorSpec>& detectors,
                                       const lattice::FieldKernel& kernel, Frame frame,
                                       const geometry::ChartParams& chart,
                                       double band_fraction = 0.5);

struct ValidationReport {
  double symmetry_residual = 0.0;
  double min_symplectic_eigenvalue = 0.0;
  bool positive_definite = false;
  bool uncertainty_ok = false;
  bool valid() const { return positive_definite && uncertainty_ok && symmetry_residual <= 1e-12; }
};

inline constexpr double kUncertaintyTol = 1e-9;

/// Symplectic spectrum (ascending, one value per pair). Throws NumericalError
/// if sigma is not positive definite.
Vector symplectic_eigenvalues(const Matrix& sigma);

ValidationReport validate(const CovarianceState& state);

struct Observable {
  enum class Kind { FieldWindow, MomentumWindow, DetectorQ, DetectorP };
  Kind kind;
  Vector weights;  // per lattice site, for the window kinds
  int detector = -1;

  static Observable field(Vector w) { return {Kind::FieldWindow, std::move(w), -1}; }
  static Observable momentum(Vector w) { return {Kind::MomentumWindow, std::move(w), -1}; }
  static Observable detector_q(int d) { return {Kind::DetectorQ, Vector(), d}; }
  static Observable detector_p(int d) { return {Kind::DetectorP, Vector(), d}; }
};

/// Rows O such that O z is the list of observables. Window weights are used
/// as given: field rows contract Phi_i, momentum rows contract pi_i.
Matrix observable_rows(const PhaseSpaceLayout& layout, const std::vector<Observable>& obs);

Matrix smeared_correlator_matrix(const CovarianceState& state, const std::vector<Observable>& obs);

/// Gaussian partial trace onto the listed pair slots (in the given order).
CovarianceState marginal(const CovarianceState& state, const std::vector<int>& pair_slots);

/// Flat text dump: header lines starting with '#', then sigma row by row.
void write_state(std::ostream& out, const CovarianceState& state);
CovarianceState read_state(std::istream& in);

}  // namespace csim::gaussian
