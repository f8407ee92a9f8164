#include "csim/report.hpp"

#include <fmt/format.h>

#include <fstream>

namespace csim::report {

namespace {

json matrix2(const Eigen::Matrix2d& m) {
  return json::array({json::array({m(0, 0), m(0, 1)}), json::array({m(1, 0), m(1, 1)})});
}

const char* separation_name(scenarios::Separation s) {
  switch (s) {
    case scenarios::Separation::Spacelike: return "spacelike";
    case scenarios::Separation::Timelike: return "timelike";
    default: return "none";
  }
}

json swap_json(const scenarios::SwapComparison& s) {
  return {{"frobenius_relative", s.frobenius_relative}, {"max_abs", s.max_abs}};
}

}  // namespace

json to_json(const scenarios::ScenarioConfig& cfg) {
  json dets = json::array();
  for (const auto& d : cfg.detectors)
    dets.push_back({{"name", d.name}, {"omega", d.omega}, {"coupling", d.coupling}, {"position", d.position}});
  json meas = json::array();
  for (const auto& m : cfg.measurements) {
    meas.push_back({{"detector", cfg.detectors[static_cast<size_t>(m.detector)].name},
                    {"g", m.g},
                    {"frame", to_string(m.frame)},
                    {"time", m.time},
                    {"proper_time", cfg.proper_time(m)},
                    {"t_slice", cfg.slice_time(m, Frame::T)},
                    {"eta_slice", cfg.slice_time(m, Frame::Eta)}});
  }
  const auto lat = cfg.lattice();
  return {{"name", cfg.name},
          {"chart_amplitude", cfg.amplitude},
          {"box_half_width_in_pi", cfg.box_half_width_in_pi},
          {"dx", lat.dx()},
          {"n_sites", lat.n_sites()},
          {"kernel", cfg.kernel},
          {"squeeze_r", cfg.squeeze_r},
          {"vacuum_band_fraction", cfg.band_fraction},
          {"detectors", dets},
          {"measurements", meas},
          {"comparison_time", cfg.comparison_time()},
          {"expect", separation_name(cfg.expect)},
          {"windows",
           {{"count", cfg.windows.count},
            {"first_center_in_pi", cfg.windows.first_center_in_pi},
            {"last_center_in_pi", cfg.windows.last_center_in_pi},
            {"width_in_pi", cfg.windows.width_in_pi}}},
          {"integrator",
           {{"dt_factor", cfg.integrator.dt_factor}, {"symplectic_tol", cfg.integrator.symplectic_tol}}},
          {"tolerances",
           {{"consistency", cfg.tolerances.consistency},
            {"decomposition", cfg.tolerances.decomposition},
            {"commutation", cfg.tolerances.commutation},
            {"reduced_factor", cfg.tolerances.reduced_factor}}}};
}

json to_json(const measurement::CollapseLedger& led) {
  return {{"detector", led.detector},
          {"g", led.g},
          {"time", led.time},
          {"ell", led.ell},
          {"ell_bar", led.ell_bar},
          {"J", led.j},
          {"max_correction", led.max_correction},
          {"pre_block", matrix2(led.pre_block)},
          {"post_block", matrix2(led.post_block)}};
}

json to_json(const scenarios::ConsistencyReport& rep) {
  return {{"comparison_time", rep.comparison_time},
          {"max_abs", rep.max_abs},
          {"frobenius_relative", rep.frobenius_relative},
          {"tolerance", rep.tolerance},
          {"pass", rep.pass},
          {"reduced_detector_relative", rep.reduced_relative},
          {"reduced_tolerance", rep.reduced_tolerance},
          {"reduced_conditioned_comparable", rep.conditioned_comparable},
          {"reduced_joint_relative",
           rep.joint_reduced_relative ? json(*rep.joint_reduced_relative) : json(nullptr)},
          {"reduced_pass", rep.reduced_pass},
          {"metric", "relative Frobenius norm of the windowed correlator difference"}};
}

json to_json(const scenarios::DecompositionReport& rep) {
  json j = {{"frame", to_string(rep.frame)},
            {"measurements", rep.measurements},
            {"field_defect", rep.field_defect},
            {"full_defect", rep.full_defect},
            {"retarded_block", rep.retarded_block},
            {"tolerance", rep.tolerance},
            {"pass", rep.pass}};
  j["literal_defect"] = rep.literal_defect ? json(*rep.literal_defect) : json(nullptr);
  return j;
}

json to_json(const dynamics::DelayReport& rep) {
  return {{"first_influence", rep.first_influence ? json(*rep.first_influence) : json(nullptr)},
          {"max_before_cone", rep.max_before_cone},
          {"max_after_cone", rep.max_after_cone},
          {"separation", rep.separation},
          {"threshold", rep.threshold}};
}

json to_json(const scenarios::OrderSwapReport& rep) {
  return {{"spacelike",
           {{"classification", separation_name(rep.spacelike_classification)},
            {"order_t", rep.order_t},
            {"order_eta", rep.order_eta},
            {"frames", to_json(rep.spacelike_frames)},
            {"in_frame_swap", swap_json(rep.spacelike_in_frame)},
            {"commutes", rep.spacelike_commutes}}},
          {"timelike",
           {{"config", to_json(rep.timelike_cfg)},
            {"order_t", rep.timelike_order_t},
            {"order_eta", rep.timelike_order_eta},
            {"frames", to_json(rep.timelike_frames)},
            {"in_frame_swap", swap_json(rep.timelike_in_frame)},
            {"delay", to_json(rep.delay)}}},
          {"negative_control", rep.negative_control}};
}

json to_json(const scenarios::SweepReport& rep) {
  json levels = json::array();
  for (const auto& l : rep.levels)
    levels.push_back({{"dx", l.dx}, {"n_pairs", l.n_pairs}, {"consistency", to_json(l.report)}});
  return {{"levels", levels}, {"observed_order", rep.observed_order}, {"monotone", rep.monotone}};
}

json frame_summary(const scenarios::FrameRun& run) {
  json events = json::array();
  for (const auto& e : run.events) {
    events.push_back({{"index", e.index},
                      {"proper_time", e.proper_time},
                      {"slice_time", e.spec.time},
                      {"ledger", to_json(e.ledger)}});
  }
  return {{"frame", to_string(run.frame)},
          {"events", events},
          {"max_symplectic_defect", run.max_symplectic_defect}};
}

void write_correlator_csv(const std::string& path, const std::vector<std::string>& labels,
                          const Matrix& corr) {
  std::ofstream out(path);
  if (!out) throw ConfigError(fmt::format("cannot write '{}'", path));
  out << "observable";
  for (const auto& l : labels) out << ',' << l;
  out << '\n';
  for (Eigen::Index r = 0; r < corr.rows(); ++r) {
    out << labels[static_cast<size_t>(r)];
    for (Eigen::Index c = 0; c < corr.cols(); ++c) out << fmt::format(",{:.17g}", corr(r, c));
    out << '\n';
  }
}

void write_json(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw ConfigError(fmt::format("cannot write '{}'", path));
  out << j.dump(2) << '\n';
}

}  // namespace csim::report
