#pragma once

// Dirichlet box (-L, L) with L = N pi, uniform interior sites. The spacing is
// pi / m for an integer m so that the detector positions 0 and -pi (and the
// boundaries) fall exactly on the grid.
//
// Canonical lattice momenta carry the cell weight, pi_i = Pi(x_i) dx, so
// [Phi_i, pi_i] = i hbar.

#include "csim/common.hpp"

#include <functional>
#include <vector>

namespace csim::lattice {

inline constexpr int kMinInteriorSites = 15;

class LatticeSpec {
 public:
  LatticeSpec(int half_width_in_pi, int cells_per_pi);

  int half_width_in_pi() const { return half_width_in_pi_; }
  int cells_per_pi() const { return cells_per_pi_; }
  double half_width() const { return half_width_in_pi_ * kPi; }
  double dx() const { return kPi / cells_per_pi_; }
  int n_sites() const { return 2 * half_width_in_pi_ * cells_per_pi_ - 1; }

  double position(int site) const { return -half_width() + (site + 1) * dx(); }
  std::vector<double> positions() const;

  /// Index of the site at x = n pi. Throws for boundary or off-grid points.
  int site_at_multiple_of_pi(int n) const;
  int site_at(double x) const;

  bool operator==(const LatticeSpec&) const = default;

 private:
  int half_width_in_pi_;
  int cells_per_pi_;
};

/// Smallest admissible lattice with dx <= target_dx and at least
/// kMinInteriorSites interior sites. half_width must be N pi with N >= 2.
LatticeSpec build_lattice(double half_width, double target_dx);

/// Dirichlet stiffness: sum_i (Phi_{i+1} - Phi_i)^2 / (2 dx) = 1/2 Phi^T K Phi.
Matrix stiffness_matrix(const LatticeSpec& lat);

/// Box eigenfunctions u_n(x) = sin(k_n (x + L)) / sqrt(L), k_n = n pi / (2L).
double box_mode(int n, double x, double half_width);
double box_wavenumber(int n, double half_width);

/// Continuum Gaussian field state diagonal in box modes:
///   K_PhiPhi(x, y) = sum_n phi_variance(k_n) u_n(x) u_n(y)
///   K_PiPi(x, y)   = sum_n pi_variance(k_n)  u_n(x) u_n(y)
///   K_PhiPi        = 0
class FieldKernel {
 public:
  using Spectrum = std::function<double(double)>;

  FieldKernel(std::string name, double half_width, int n_modes, Spectrum phi_variance,
              Spectrum pi_variance);

  const std::string& name() const { return name_; }
  double half_width() const { return half_width_; }
  int n_modes() const { return n_modes_; }

  double phi_variance(int n) const { return phi_variance_(box_wavenumber(n, half_width_)); }
  double pi_variance(int n) const { return pi_variance_(box_wavenumber(n, half_width_)); }

  double phi_phi(double x, double y) const;
  double pi_pi(double x, double y) const;
  double phi_pi(double, double) const { return 0.0; }

  /// Same spectrum, different truncation.
  FieldKernel truncated(int n_modes) const;

 private:
  std::string name_;
  double half_width_;
  int n_modes_;
  Spectrum phi_variance_;
  Spectrum pi_variance_;
};

/// Vacuum of the massless field in the box, omega_n = k_n, truncated at the
/// lattice Nyquist index.
FieldKernel box_vacuum_kernel(const LatticeSpec& lat);

/// Every box mode squeezed by r: <Phi^2> scaled by e^{2r}, <Pi^2> by e^{-2r}.
FieldKernel squeezed_kernel(const LatticeSpec& lat, double r);

/// Kernels sampled at the lattice sites, with the cell weight on momenta:
/// phi_phi(i,j) = K_PhiPhi(x_i, x_j), pi_pi(i,j) = K_PiPi(x_i, x_j) dx^2.
struct SampledKernel {
  Matrix phi_phi;
  Matrix pi_pi;
};
SampledKernel sample_kernel(const FieldKernel& kernel, const LatticeSpec& lat);

/// Normalized Gaussian bump, integral over the real line = 1.
double gaussian_window(double x, double center, double width);

/// Quadrature weights of a Gaussian window: sum_i w_i dx = 1. The window
/// (center +- 6 width) must lie inside the box.
Vector smeared_window(double center, double width, const LatticeSpec& lat);

}  // namespace csim::lattice
