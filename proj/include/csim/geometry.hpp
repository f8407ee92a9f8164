#pragma once

// The wavy (eta, xi) chart on (1+1)D Minkowski space:
//   eta = t - A sin t cos x,   xi = x - A sin x cos t,   0 <= A < 1.
// ds^2 = Omega (-d eta^2 + d xi^2). Slices of constant t and constant eta
// coincide at t = eta = n pi.

#include "csim/common.hpp"

#include <array>

namespace csim::geometry {

class ChartParams {
 public:
  ChartParams() = default;
  explicit ChartParams(double amplitude);

  double amplitude() const { return amplitude_; }

 private:
  double amplitude_ = 0.0;
};

struct EventTX {
  double t = 0.0;
  double x = 0.0;
};

struct EventEtaXi {
  double eta = 0.0;
  double xi = 0.0;
};

struct JacobianData {
  /// d(eta, xi) / d(t, x), row = (eta, xi), column = (t, x).
  std::array<std::array<double, 2>, 2> partials{};
  double determinant = 1.0;
  double conformal_factor = 1.0;
};

class InversionError : public NumericalError {
 public:
  InversionError(const std::string& what, double residual)
      : NumericalError(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

EventEtaXi to_alt(const EventTX& p, const ChartParams& c);

/// Damped Newton inverse of to_alt, started from the identity.
EventTX from_alt(const EventEtaXi& q, const ChartParams& c);

double conformal_factor(const EventTX& p, const ChartParams& c);

JacobianData jacobian(const EventTX& p, const ChartParams& c);

/// True iff time is an integer multiple of pi (within 1e-12).
bool overlap_slice(double time);

/// Proper-time bookkeeping for a detector at rest at x = n pi, which is
/// static in both charts. In the t-frame tau = t; in the eta-frame
/// eta(tau) = tau - A sin(tau) cos(x).
class WorldlineClock {
 public:
  WorldlineClock(double position, Frame frame, const ChartParams& chart);

  double position() const { return position_; }
  Frame frame() const { return frame_; }

  double coordinate_time(double proper_time) const;
  double proper_time(double coordinate_time) const;

  /// d tau / d(coordinate time) = sqrt(Omega) along the worldline.
  double redshift(double coordinate_time) const;

 private:
  double position_;
  Frame frame_;
  double amplitude_;
  double cos_x_;
};

}  // namespace csim::geometry
