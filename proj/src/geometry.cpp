#include "csim/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>

namespace csim::geometry {

namespace {

constexpr int kMaxNewtonIterations = 50;
constexpr double kNewtonTolerance = 1e-13;

}  // namespace

ChartParams::ChartParams(double amplitude) : amplitude_(amplitude) {
  if (!std::isfinite(amplitude) || amplitude < 0.0 || amplitude >= 1.0) {
    throw ConfigError(fmt::format("chart amplitude A must satisfy 0 <= A < 1, got {}", amplitude));
  }
}

EventEtaXi to_alt(const EventTX& p, const ChartParams& c) {
  const double a = c.amplitude();
  return {p.t - a * std::sin(p.t) * std::cos(p.x), p.x - a * std::sin(p.x) * std::cos(p.t)};
}

EventTX from_alt(const EventEtaXi& q, const ChartParams& c) {
  EventTX p{q.eta, q.xi};
  if (c.amplitude() == 0.0) return p;

  auto residual_of = [&](const EventTX& e) {
    const EventEtaXi r = to_alt(e, c);
    return std::array<double, 2>{r.eta - q.eta, r.xi - q.xi};
  };
  auto norm = [](const std::array<double, 2>& r) { return std::max(std::abs(r[0]), std::abs(r[1])); };

  // Iterate to roundoff: the inverse Jacobian can amplify a 1e-13 residual
  // by (1 - A)^-2.
  const double floor = 4e-16 * std::max({1.0, std::abs(q.eta), std::abs(q.xi)});
  auto r = residual_of(p);
  for (int it = 0; it < kMaxNewtonIterations && norm(r) > floor; ++it) {
    const auto jac = jacobian(p, c);
    const auto& m = jac.partials;
    const double det = jac.determinant;
    const double dt = (m[1][1] * r[0] - m[0][1] * r[1]) / det;
    const double dx = (-m[1][0] * r[0] + m[0][0] * r[1]) / det;

    // Halve the step until the residual decreases.
    double step = 1.0;
    bool improved = false;
    for (int k = 0; k < 30; ++k) {
      const EventTX trial{p.t - step * dt, p.x - step * dx};
      const auto r_trial = residual_of(trial);
      if (norm(r_trial) < norm(r)) {
        p = trial;
        r = r_trial;
        improved = true;
        break;
      }
      step *= 0.5;
    }
    if (!improved) break;
  }
  if (norm(r) > kNewtonTolerance) {
    throw InversionError(fmt::format("chart inversion did not converge (residual {:.3e})", norm(r)),
                         norm(r));
  }
  return p;
}

double conformal_factor(const EventTX& p, const ChartParams& c) {
  const double a = c.amplitude();
  return 1.0 / (1.0 - 2.0 * a * std::cos(p.t) * std::cos(p.x) +
                a * a * std::cos(p.t + p.x) * std::cos(p.t - p.x));
}

JacobianData jacobian(const EventTX& p, const ChartParams& c) {
  const double a = c.amplitude();
  const double st = std::sin(p.t), ct = std::cos(p.t);
  const double sx = std::sin(p.x), cx = std::cos(p.x);
  JacobianData j;
  j.partials = {{{1.0 - a * ct * cx, a * st * sx}, {a * sx * st, 1.0 - a * cx * ct}}};
  j.determinant = j.partials[0][0] * j.partials[1][1] - j.partials[0][1] * j.partials[1][0];
  j.conformal_factor = conformal_factor(p, c);
  return j;
}

bool overlap_slice(double time) {
  const double n = std::round(time / kPi);
  return std::abs(time - n * kPi) <= 1e-12;
}

WorldlineClock::WorldlineClock(double position, Frame frame, const ChartParams& chart)
    : position_(position), frame_(frame), amplitude_(chart.amplitude()), cos_x_(std::cos(position)) {
  if (std::abs(std::sin(position)) > 1e-12) {
    throw UnsupportedError(
        fmt::format("detector at x = {} is not static in the eta-frame (need x = n pi)", position));
  }
  cos_x_ = std::round(cos_x_);
}

double WorldlineClock::coordinate_time(double proper_time) const {
  if (frame_ == Frame::T) return proper_time;
  return proper_time - amplitude_ * std::sin(proper_time) * cos_x_;
}

double WorldlineClock::proper_time(double coordinate_time) const {
  if (frame_ == Frame::T || amplitude_ == 0.0) return coordinate_time;
  // eta(tau) is strictly increasing for A < 1; Newton from tau = eta.
  double tau = coordinate_time;
  for (int it = 0; it < kMaxNewtonIterations; ++it) {
    const double f = tau - amplitude_ * std::sin(tau) * cos_x_ - coordinate_time;
    const double df = 1.0 - amplitude_ * std::cos(tau) * cos_x_;
    const double step = f / df;
    tau -= step;
    if (std::abs(step) < 1e-15 * std::max(1.0, std::abs(tau))) break;
  }
  return tau;
}

double WorldlineClock::redshift(double coordinate_time) const {
  if (frame_ == Frame::T) return 1.0;
  const double tau = proper_time(coordinate_time);
  return 1.0 / (1.0 - amplitude_ * std::cos(tau) * cos_x_);
}

}  // namespace csim::geometry
