#pragma once

// Plain-text scenario files:
//
//   # comment
//   [scenario]
//   chart_amplitude = 0.5
//   box_half_width_in_pi = 3
//   target_dx_in_pi = 1/256
//   [detector]            (repeatable, in order)
//   name = A
//   omega = 1
//   coupling = 0.4
//   position_in_pi = 0
//   [measurement]         (repeatable)
//   detector = A
//   g = 1
//   frame = t
//   time_in_pi = 1/2
//
// Numbers may be written as fractions "p/q". Unknown sections or keys are
// errors that name the line.

#include "csim/scenarios.hpp"

#include <cstdint>
#include <string>
#include <string_view>

namespace csim::config {

scenarios::ScenarioConfig parse_scenario(std::string_view text);
scenarios::ScenarioConfig load_scenario(const std::string& path);

/// Parses "x" or "p/q".
double parse_number(std::string_view text);

std::uint64_t fnv1a(std::string_view data);
std::string hex64(std::uint64_t v);

std::string version_string();

}  // namespace csim::config
