#pragma once

#include <Eigen/Dense>

#include <numbers>
#include <stdexcept>
#include <string>

namespace csim {

/// Dense row-major storage; propagator updates are row operations.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

inline constexpr double kPi = std::numbers::pi;

/// Reduced Planck constant. Kept symbolic in formulas, fixed to 1 here.
inline constexpr double kHbar = 1.0;

enum class Frame { T, Eta };

inline const char* to_string(Frame f) { return f == Frame::T ? "t" : "eta"; }

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnsupportedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace csim
