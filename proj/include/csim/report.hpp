#pragma once

// JSON and CSV emission for scenario results.

#include "csim/scenarios.hpp"

#include <json.hpp>

#include <string>

namespace csim::report {

using nlohmann::json;

json to_json(const scenarios::ScenarioConfig& cfg);
json to_json(const measurement::CollapseLedger& led);
json to_json(const scenarios::ConsistencyReport& rep);
json to_json(const scenarios::DecompositionReport& rep);
json to_json(const scenarios::OrderSwapReport& rep);
json to_json(const scenarios::SweepReport& rep);
json to_json(const dynamics::DelayReport& rep);
json frame_summary(const scenarios::FrameRun& run);

/// Labelled symmetric correlator table: header row of labels, then one row
/// per observable.
void write_correlator_csv(const std::string& path, const std::vector<std::string>& labels,
                          const Matrix& corr);

void write_json(const std::string& path, const json& j);

}  // namespace csim::report
