#pragma once

// End-to-end experiments: evolve the same physical setup on t-slices and on
// eta-slices, collapse at the frame's slice through each measurement event,
// and compare the two states on a shared slice t = eta = n pi.

#include "csim/common.hpp"
#include "csim/dynamics.hpp"
#include "csim/gaussian.hpp"
#include "csim/geometry.hpp"
#include "csim/lattice.hpp"
#include "csim/measurement.hpp"

#include <optional>
#include <string>
#include <vector>

namespace csim::scenarios {

/// A measurement event, fixed on the detector's worldline by the slice time
/// in the frame it was specified in.
struct MeasurementEvent {
  int detector = 0;
  double g = 1.0;
  Frame frame = Frame::T;
  double time = 0.0;
};

struct WindowFamily {
  int count = 9;
  double first_center_in_pi = -2.0;
  double last_center_in_pi = 1.0;
  double width_in_pi = 1.0 / 32.0;  // Gaussian standard deviation
};

struct Tolerances {
  double consistency = 1e-2;     // relative Frobenius over the observable matrix
  double decomposition = 1e-8;   // absolute, reassembly vs engine
  double commutation = 1e-10;    // in-frame reordering of spacelike collapses
  double reduced_factor = 10.0;  // reduced detector states: factor x consistency
};

enum class Separation { Unspecified, Spacelike, Timelike };

struct ScenarioConfig {
  std::string name = "scenario";
  double amplitude = 0.5;
  int box_half_width_in_pi = 3;
  double target_dx = kPi / 256.0;
  std::vector<gaussian::DetectorSpec> detectors;
  std::string kernel = "box_vacuum";
  double squeeze_r = 0.0;
  double band_fraction = 0.5;
  std::vector<MeasurementEvent> measurements;
  double comparison_time_in_pi = 1.0;
  WindowFamily windows;
  dynamics::IntegratorSettings integrator;
  Tolerances tolerances;
  Separation expect = Separation::Unspecified;

  double comparison_time() const { return comparison_time_in_pi * kPi; }
  geometry::ChartParams chart() const { return geometry::ChartParams(amplitude); }
  lattice::LatticeSpec lattice() const;

  /// Proper time of an event on its detector's worldline.
  double proper_time(const MeasurementEvent& ev) const;
  /// Slice time of an event in the given frame.
  double slice_time(const MeasurementEvent& ev, Frame frame) const;

  /// Throws ConfigError on any inconsistency (see implementation).
  void validate() const;
};

/// Exact continuum classification of two events on static worldlines, with a
/// 4 dx exclusion band around the light cone.
Separation classify(const ScenarioConfig& cfg, const MeasurementEvent& a, const MeasurementEvent& b);

struct FrameEvent {
  int index = 0;  // position in cfg.measurements
  double proper_time = 0.0;
  measurement::MeasurementSpec spec;
  gaussian::CovarianceState reduced_before;
  measurement::CollapseLedger ledger;
};

struct FrameRun {
  Frame frame = Frame::T;
  gaussian::CovarianceState initial;
  gaussian::CovarianceState final_state;
  std::vector<FrameEvent> events;  // in this frame's time order
  std::vector<dynamics::SymplecticPropagator> segments;  // kept on request
  double max_symplectic_defect = 0.0;
};

FrameRun run_one_frame(const ScenarioConfig& cfg, Frame frame, bool keep_segments = false);

struct ConsistencyReport {
  double comparison_time = 0.0;
  std::vector<std::string> labels;
  Matrix corr_t;
  Matrix corr_eta;
  double max_abs = 0.0;
  double frobenius_relative = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  std::vector<double> reduced_relative;  // per event, cfg.measurements order
  bool conditioned_comparable = true;    // both frames collapse in the same order
  std::optional<double> joint_reduced_relative;  // unconditioned, runs with segments only
  double reduced_tolerance = 0.0;
  bool reduced_pass = true;
};

/// Joint covariance of the measured detectors' (Q, P), each at its own event
/// and with no collapse applied, ordered as cfg.measurements. Independent of
/// the slicing up to discretization error.
Matrix event_detector_covariance(const FrameRun& run);

/// Observable set of the comparison on the T-slice of the given frame.
std::vector<std::string> observable_labels(const ScenarioConfig& cfg);
std::vector<gaussian::Observable> comparison_observables(const ScenarioConfig& cfg, Frame frame,
                                                         double slice_time);

ConsistencyReport compare_frames(const FrameRun& run_t, const FrameRun& run_eta,
                                 const ScenarioConfig& cfg);

struct DecompositionReport {
  Frame frame = Frame::T;
  int measurements = 0;
  double field_defect = 0.0;  // max |difference| over the Phi-Phi block
  double full_defect = 0.0;   // max |difference| over all of Sigma
  std::optional<double> literal_defect;  // two-detector literal form, spacelike case
  double retarded_block = 0.0;           // max |S21[B, A]|
  double tolerance = 0.0;
  bool pass = false;
};

DecompositionReport paper_decomposition_check(const ScenarioConfig& cfg, Frame frame);
/// Same, reusing a run made with keep_segments.
DecompositionReport paper_decomposition_check(const ScenarioConfig& cfg, const FrameRun& run);

struct SwapComparison {
  double frobenius_relative = 0.0;
  double max_abs = 0.0;
};

struct OrderSwapReport {
  Separation spacelike_classification = Separation::Unspecified;
  ConsistencyReport spacelike_frames;
  std::vector<int> order_t;    // detector order in the t-frame
  std::vector<int> order_eta;  // detector order in the eta-frame
  SwapComparison spacelike_in_frame;
  bool spacelike_commutes = false;

  ScenarioConfig timelike_cfg;
  ConsistencyReport timelike_frames;
  std::vector<int> timelike_order_t;
  std::vector<int> timelike_order_eta;
  SwapComparison timelike_in_frame;
  dynamics::DelayReport delay;
  bool negative_control = false;  // timelike swap breaks by >= 10x tolerance
};

/// Reorders the two collapses inside one frame (the later one applied first,
/// the earlier one conjugated through the propagator) and compares with the
/// natural order at the comparison slice.
SwapComparison in_frame_swap(const ScenarioConfig& cfg, Frame frame);
SwapComparison in_frame_swap(const ScenarioConfig& cfg, const FrameRun& run);

/// Same detectors and chart; A at t1 = 0.3, B at t2 = t1 + pi + 0.5,
/// compared at t = eta = 2 pi.
ScenarioConfig timelike_control(const ScenarioConfig& spacelike);

OrderSwapReport order_swap_experiment(const ScenarioConfig& cfg);
/// Reuses the spacelike runs; run_t must have kept its segments.
OrderSwapReport order_swap_experiment(const ScenarioConfig& cfg, const FrameRun& run_t,
                                      const FrameRun& run_eta);

struct SweepLevel {
  double dx = 0.0;
  int n_pairs = 0;
  ConsistencyReport report;
};

struct SweepReport {
  std::vector<SweepLevel> levels;
  std::vector<double> observed_order;  // log2 of successive error ratios
  bool monotone = false;
};

inline constexpr int kMaxPairs = 4096;

/// Level k uses dx = cfg dx * 2^(levels - 1 - k): the finest level is the
/// configured resolution.
SweepReport refinement_sweep(const ScenarioConfig& cfg, int levels);

}  // namespace csim::scenarios
