#pragma once

// Invariant suites behind `collapse_sim verify`, on desk-sized lattices.

#include "csim/gaussian.hpp"

#include <json.hpp>

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace csim::verify {

/// Random pure-or-mixed state on n pairs: S diag(nu) S^T with a random
/// symplectic S = exp(J H) and symplectic eigenvalues nu >= hbar/2.
gaussian::CovarianceState random_valid_state(int n_detectors, int n_sites, std::mt19937_64& rng,
                                             double mixedness = 0.5);

enum class Fault { None, SigmaScale };

struct SuiteResult {
  std::string name;
  bool pass = false;
  nlohmann::json metrics;
};

struct VerifyReport {
  std::uint64_t seed = 0;
  std::vector<SuiteResult> suites;
  std::string resolved_meter;
  bool all_pass() const;
  nlohmann::json to_json() const;
};

/// Result of comparing the literal collapse against Schur conditioning with
/// both candidate meters over random four-pair states.
struct MeterVerdict {
  double literal_meter_defect = 0.0;     // meter diag(hbar g/2, hbar/2g)
  double relabelled_meter_defect = 0.0;  // meter diag(hbar/2g, hbar g/2)
  std::string resolved;                  // name of the matching candidate, or "none"
};
MeterVerdict resolve_meter(int trials, std::mt19937_64& rng);

VerifyReport run_all(std::uint64_t seed, Fault fault = Fault::None);

}  // namespace csim::verify
