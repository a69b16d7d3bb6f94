#pragma once

#include <cstdint>
#include <vector>

#include "fieldgen/trial.hpp"

namespace fieldgen {

/// The eight standard target directions (deg CCW from +x).
std::vector<double> standard_directions();

/// Per-protocol trial timing and the controllers stamped on trials.
/// Baseline-phase trials carry the naive state: representation
/// amplitude zero and the baseline impedance gains; adaptation and test
/// phases carry the configured (adapted) controller.
struct ProtocolOptions {
  ControllerSpec controller;  // adapted state
  ImpedanceScaling baseline_scaling{0.7278, 0.0723};
  double field_alpha = 15.0;  // trained curl gain (signed)
  double duration_s = 0.5;
  double step_s = 5e-4;
  double log_rate_hz = 1000.0;
};

/// Full experiment schedule for one training-direction group: four
/// blocks, 548 trials. Immutable after construction.
struct Protocol {
  double group_deg = 0.0;
  std::uint64_t seed = 0;
  std::vector<TrialSpec> trials;
};

/// Build the four-block schedule for one group:
///   block 1, baseline: 208 trials, 26 per target (23 null with
///     feedback + 3 no-feedback clamps), pseudo-random order;
///   blocks 2-3, adaptation: 65 trials each to the training target
///     (60 field trials, 15 of them feedback-extinguished, plus 5
///     no-feedback clamps), shuffled;
///   block 4, test: 210 trials strictly alternating train target and
///     test targets; 105 test-target clamps (15 per test target) and
///     105 train-target trials split 53 field+feedback / 26 field
///     no-feedback / 26 clamp no-feedback.
/// Throws std::invalid_argument if group_deg is not one of the eight
/// standard directions.
Protocol build_protocol(double group_deg, std::uint64_t seed,
                        const SimSetup& setup, const ProtocolOptions& options);

struct AuditReport {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

/// Verify every count and ordering invariant of the schedule.
AuditReport audit_protocol(const Protocol& protocol);

}  // namespace fieldgen
