#include "csim/lattice.hpp"

#include <fmt/format.h>

#include <cmath>
#include <utility>

namespace csim::lattice {

LatticeSpec::LatticeSpec(int half_width_in_pi, int cells_per_pi)
    : half_width_in_pi_(half_width_in_pi), cells_per_pi_(cells_per_pi) {
  if (half_width_in_pi < 2) {
    throw ConfigError(fmt::format(
        "box half width must be N pi with N >= 2 (a detector at -pi may not sit on the "
        "boundary), got N = {}",
        half_width_in_pi));
  }
  if (cells_per_pi < 1) throw ConfigError("cells per pi must be positive");
  if (n_sites() < kMinInteriorSites) {
    throw ConfigError(fmt::format("lattice has {} interior sites, need >= {}", n_sites(),
                                  kMinInteriorSites));
  }
}

std::vector<double> LatticeSpec::positions() const {
  std::vector<double> xs(static_cast<size_t>(n_sites()));
  for (int i = 0; i < n_sites(); ++i) xs[static_cast<size_t>(i)] = position(i);
  return xs;
}

int LatticeSpec::site_at_multiple_of_pi(int n) const {
  if (std::abs(n) >= half_width_in_pi_) {
    throw ConfigError(fmt::format("x = {} pi is not an interior point of the box", n));
  }
  return (n + half_width_in_pi_) * cells_per_pi_ - 1;
}

int LatticeSpec::site_at(double x) const {
  const double s = (x + half_width()) / dx() - 1.0;
  const long i = std::lround(s);
  if (std::abs(s - static_cast<double>(i)) > 1e-9 || i < 0 || i >= n_sites()) {
    throw ConfigError(fmt::format("x = {} is not an interior lattice site", x));
  }
  return static_cast<int>(i);
}

LatticeSpec build_lattice(double half_width, double target_dx) {
  const double n_pi = half_width / kPi;
  const long n = std::lround(n_pi);
  if (std::abs(n_pi - static_cast<double>(n)) > 1e-9 || n < 1) {
    throw ConfigError(fmt::format("box half width {} is not a positive integer multiple of pi",
                                  half_width));
  }
  if (!(target_dx > 0.0)) throw ConfigError("target_dx must be positive");
  if (n < 2) {
    throw ConfigError("box half width pi puts the detector at -pi on the Dirichlet boundary");
  }
  int m = static_cast<int>(std::ceil(kPi / target_dx - 1e-9));
  m = std::max(m, 1);
  while (2 * static_cast<int>(n) * m - 1 < kMinInteriorSites) ++m;
  return LatticeSpec(static_cast<int>(n), m);
}

Matrix stiffness_matrix(const LatticeSpec& lat) {
  const int n = lat.n_sites();
  Matrix k = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    k(i, i) = 2.0 / lat.dx();
    if (i + 1 < n) k(i, i + 1) = k(i + 1, i) = -1.0 / lat.dx();
  }
  return k;
}

double box_wavenumber(int n, double half_width) { return n * kPi / (2.0 * half_width); }

double box_mode(int n, double x, double half_width) {
  return std::sin(box_wavenumber(n, half_width) * (x + half_width)) / std::sqrt(half_width);
}

FieldKernel::FieldKernel(std::string name, double half_width, int n_modes, Spectrum phi_variance,
                         Spectrum pi_variance)
    : name_(std::move(name)),
      half_width_(half_width),
      n_modes_(n_modes),
      phi_variance_(std::move(phi_variance)),
      pi_variance_(std::move(pi_variance)) {}

double FieldKernel::phi_phi(double x, double y) const {
  double s = 0.0;
  for (int n = 1; n <= n_modes_; ++n)
    s += phi_variance(n) * box_mode(n, x, half_width_) * box_mode(n, y, half_width_);
  return s;
}

double FieldKernel::pi_pi(double x, double y) const {
  double s = 0.0;
  for (int n = 1; n <= n_modes_; ++n)
    s += pi_variance(n) * box_mode(n, x, half_width_) * box_mode(n, y, half_width_);
  return s;
}

FieldKernel FieldKernel::truncated(int n_modes) const {
  return FieldKernel(name_, half_width_, n_modes, phi_variance_, pi_variance_);
}

FieldKernel box_vacuum_kernel(const LatticeSpec& lat) {
  return FieldKernel(
      "box_vacuum", lat.half_width(), lat.n_sites(), [](double k) { return kHbar / (2.0 * k); },
      [](double k) { return kHbar * k / 2.0; });
}

FieldKernel squeezed_kernel(const LatticeSpec& lat, double r) {
  const double up = std::exp(2.0 * r), down = std::exp(-2.0 * r);
  return FieldKernel(
      "squeezed", lat.half_width(), lat.n_sites(),
      [up](double k) { return up * kHbar / (2.0 * k); },
      [down](double k) { return down * kHbar * k / 2.0; });
}

SampledKernel sample_kernel(const FieldKernel& kernel, const LatticeSpec& lat) {
  // Mode matrix U(i, n) = u_n(x_i): K = U diag(s) U^T.
  const int ns = lat.n_sites(), nm = kernel.n_modes();
  Matrix u(ns, nm);
  Vector sphi(nm), spi(nm);
  for (int n = 1; n <= nm; ++n) {
    sphi(n - 1) = kernel.phi_variance(n);
    spi(n - 1) = kernel.pi_variance(n);
    for (int i = 0; i < ns; ++i) u(i, n - 1) = box_mode(n, lat.position(i), lat.half_width());
  }
  SampledKernel out;
  out.phi_phi = u * sphi.asDiagonal() * u.transpose();
  out.pi_pi = (lat.dx() * lat.dx()) * (u * spi.asDiagonal() * u.transpose());
  return out;
}

double gaussian_window(double x, double center, double width) {
  const double z = (x - center) / width;
  return std::exp(-0.5 * z * z) / (std::sqrt(2.0 * kPi) * width);
}

Vector smeared_window(double center, double width, const LatticeSpec& lat) {
  if (!(width > 0.0)) throw ConfigError("window width must be positive");
  const double l = lat.half_width();
  if (center - 6.0 * width <= -l || center + 6.0 * width >= l) {
    throw ConfigError(fmt::format("window at {} with width {} leaves the box (-{}, {})", center,
                                  width, l, l));
  }
  Vector w(lat.n_sites());
  for (int i = 0; i < lat.n_sites(); ++i) w(i) = gaussian_window(lat.position(i), center, width);
  w /= w.sum() * lat.dx();
  return w;
}

}  // namespace csim::lattice
