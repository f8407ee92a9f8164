// collapse_sim: batch front-end for the frame-consistency experiments.
//
//   collapse_sim run <cfg> [--out DIR] [--seed N]
//   collapse_sim verify [--seed N] [--inject-fault sigma_scale] [--out DIR]
//   collapse_sim sweep <cfg> --levels N [--out DIR]
//   collapse_sim emit-grid --A a --out FILE [--resolution N]
//
// Exit codes: 0 pass, 1 tolerance failure, 2 configuration or usage error.

#include "csim/config.hpp"
#include "csim/geometry.hpp"
#include "csim/report.hpp"
#include "csim/scenarios.hpp"
#include "csim/verify.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace csim;
using nlohmann::json;

namespace {

constexpr int kExitFail = 1;
constexpr int kExitConfig = 2;

std::string read_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open config '{}'", path));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path prepare_dir(const std::string& dir) {
  fs::path p(dir);
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw ConfigError(fmt::format("cannot create output directory '{}': {}", dir, ec.message()));
  return p;
}

json provenance(const std::string& text, std::uint64_t seed) {
  return {{"version", config::version_string()},
          {"config_hash", config::hex64(config::fnv1a(text))},
          {"seed", seed}};
}

int cmd_run(const std::string& cfg_path, const std::string& out_dir, std::uint64_t seed) {
  const std::string text = read_text(cfg_path);
  const auto cfg = config::parse_scenario(text);
  const fs::path out = prepare_dir(out_dir);

  const int n_meas = static_cast<int>(cfg.measurements.size());
  const bool keep = n_meas >= 1 && n_meas <= 2;
  const auto run_t = scenarios::run_one_frame(cfg, Frame::T, keep);
  const auto run_eta = scenarios::run_one_frame(cfg, Frame::Eta, keep);
  const auto cons = scenarios::compare_frames(run_t, run_eta, cfg);

  json rep = provenance(text, seed);
  rep["config"] = report::to_json(cfg);
  rep["tolerances"] = rep["config"]["tolerances"];
  rep["frames"] = {report::frame_summary(run_t), report::frame_summary(run_eta)};
  rep["frame_consistency"] = report::to_json(cons);

  const double symp = std::max(run_t.max_symplectic_defect, run_eta.max_symplectic_defect);
  bool pass = cons.pass && cons.reduced_pass && symp <= cfg.integrator.symplectic_tol;
  fmt::print("frame consistency: relative Frobenius {:.3e} (max abs {:.3e}), tolerance {:.1e} -> {}\n",
             cons.frobenius_relative, cons.max_abs, cons.tolerance, cons.pass ? "pass" : "FAIL");

  if (keep) {
    json dec = json::array();
    for (const auto* run : {&run_t, &run_eta}) {
      const auto d = scenarios::paper_decomposition_check(cfg, *run);
      dec.push_back(report::to_json(d));
      pass = pass && d.pass;
      fmt::print("decomposition ({}): defect {:.3e} -> {}\n", to_string(run->frame), d.full_defect,
                 d.pass ? "pass" : "FAIL");
    }
    rep["decomposition"] = dec;
  }
  if (cfg.expect == scenarios::Separation::Spacelike) {
    const auto swap = scenarios::order_swap_experiment(cfg, run_t, run_eta);
    rep["order_swap"] = report::to_json(swap);
    pass = pass && swap.spacelike_commutes && swap.negative_control;
    fmt::print("order swap: spacelike commutes {}, timelike negative control {}\n",
               swap.spacelike_commutes, swap.negative_control);
  }
  rep["pass"] = pass;

  report::write_json((out / "report.json").string(), rep);
  report::write_correlator_csv((out / "correlators_t.csv").string(), cons.labels, cons.corr_t);
  report::write_correlator_csv((out / "correlators_eta.csv").string(), cons.labels, cons.corr_eta);
  fmt::print("{}\n", pass ? "PASS" : "FAIL");
  return pass ? 0 : kExitFail;
}

int cmd_verify(std::uint64_t seed, const std::string& fault_name, const std::string& out_dir) {
  verify::Fault fault = verify::Fault::None;
  if (fault_name == "sigma_scale") {
    fault = verify::Fault::SigmaScale;
  } else if (!fault_name.empty()) {
    throw ConfigError(fmt::format("unknown fault '{}' (expected sigma_scale)", fault_name));
  }
  const auto rep = verify::run_all(seed, fault);
  for (const auto& s : rep.suites) fmt::print("{:<18} {}\n", s.name, s.pass ? "pass" : "FAIL");
  fmt::print("resolved meter: {}\n", rep.resolved_meter);
  if (!out_dir.empty()) {
    json j = rep.to_json();
    j["version"] = config::version_string();
    report::write_json((prepare_dir(out_dir) / "verify.json").string(), j);
  }
  return rep.all_pass() ? 0 : kExitFail;
}

int cmd_sweep(const std::string& cfg_path, int levels, const std::string& out_dir) {
  const std::string text = read_text(cfg_path);
  const auto cfg = config::parse_scenario(text);
  const auto sweep = scenarios::refinement_sweep(cfg, levels);
  for (const auto& l : sweep.levels)
    fmt::print("dx = pi/{:<5.0f} pairs {:<5} relative {:.4e}\n", kPi / l.dx, l.n_pairs,
               l.report.frobenius_relative);
  const bool pass = sweep.monotone && sweep.levels.back().report.pass;
  json rep = provenance(text, 0);
  rep["config"] = report::to_json(cfg);
  rep["sweep"] = report::to_json(sweep);
  rep["pass"] = pass;
  report::write_json((prepare_dir(out_dir) / "sweep.json").string(), rep);
  return pass ? 0 : kExitFail;
}

// Root of a strictly increasing function on [lo, hi] by bisection.
template <class F>
double increasing_root(F f, double target, double lo, double hi) {
  for (int k = 0; k < 200 && hi - lo > 0.0; ++k) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    (f(mid) < target ? lo : hi) = mid;
  }
  return std::abs(f(lo) - target) <= std::abs(f(hi) - target) ? lo : hi;
}

int cmd_emit_grid(double amplitude, int resolution, const std::string& out_path) {
  const geometry::ChartParams chart(amplitude);
  if (resolution < 2) throw ConfigError("resolution must be at least 2");
  std::ofstream out(out_path);
  if (!out) throw ConfigError(fmt::format("cannot write '{}'", out_path));
  out << "family,t,x,eta,xi\n";
  auto row = [&](const char* family, double t, double x) {
    const auto q = geometry::to_alt({t, x}, chart);
    out << fmt::format("{},{:.17g},{:.17g},{:.17g},{:.17g}\n", family, t, x, q.eta, q.xi);
  };
  // constant eta: eta in {0, pi/8, ..., pi}, t(x) solved along x in [-2pi, pi]
  for (int k = 0; k <= 8; ++k) {
    const double eta = k * kPi / 8.0;
    for (int i = 0; i < resolution; ++i) {
      const double x = -2.0 * kPi + 3.0 * kPi * i / (resolution - 1);
      const double t = increasing_root(
          [&](double tt) { return geometry::to_alt({tt, x}, chart).eta; }, eta, 0.0, kPi);
      row("eta", t, x);
    }
  }
  // constant xi: xi in {-2pi, -7pi/4, ..., pi}, x(t) solved along t in [0, pi]
  for (int k = 0; k <= 12; ++k) {
    const double xi = -2.0 * kPi + k * kPi / 4.0;
    for (int i = 0; i < resolution; ++i) {
      const double t = kPi * i / (resolution - 1);
      const double x = increasing_root(
          [&](double xx) { return geometry::to_alt({t, xx}, chart).xi; }, xi, -2.0 * kPi, kPi);
      row("xi", t, x);
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Frame-consistency simulator for detector collapses on a lattice field"};
  app.set_version_flag("--version", config::version_string());
  app.require_subcommand(1);

  std::string cfg_path, out_dir = ".", fault, grid_out;
  std::uint64_t seed = 20240101;
  int levels = 3, resolution = 201;
  double amplitude = 0.5;

  auto* run = app.add_subcommand("run", "run a scenario in both frames and compare");
  run->add_option("config", cfg_path, "scenario config file")->required();
  run->add_option("--out", out_dir, "output directory");
  run->add_option("--seed", seed, "seed recorded in the report");

  auto* ver = app.add_subcommand("verify", "run the invariant suites");
  ver->add_option("--seed", seed, "seed for the randomized suites");
  ver->add_option("--inject-fault", fault, "deliberately break a suite (sigma_scale)");
  auto* ver_out = ver->add_option("--out", out_dir, "write verify.json here");

  auto* sweep = app.add_subcommand("sweep", "refinement sweep of the frame comparison");
  sweep->add_option("config", cfg_path, "scenario config file")->required();
  sweep->add_option("--levels", levels, "number of resolutions")->required();
  sweep->add_option("--out", out_dir, "output directory");

  auto* grid = app.add_subcommand("emit-grid", "tabulate constant-eta and constant-xi curves");
  grid->add_option("--A", amplitude, "chart amplitude, 0 <= A < 1")->required();
  grid->add_option("--out", grid_out, "CSV path")->required();
  grid->add_option("--resolution", resolution, "samples per curve");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  try {
    if (*run) return cmd_run(cfg_path, out_dir, seed);
    if (*ver) return cmd_verify(seed, fault, *ver_out ? out_dir : std::string());
    if (*sweep) return cmd_sweep(cfg_path, levels, out_dir);
    if (*grid) return cmd_emit_grid(amplitude, resolution, grid_out);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const UnsupportedError& e) {
    std::cerr << "unsupported: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFail;
  }
  return kExitConfig;
}
