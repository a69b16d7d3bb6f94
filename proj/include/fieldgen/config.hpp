#pragma once

#include <map>
#include <string>

#include "fieldgen/fitting.hpp"
#include "fieldgen/protocol.hpp"

namespace fieldgen {

enum class TrialCsvMode { Concatenated, PerTrial };

std::string to_string(TrialCsvMode mode);
TrialCsvMode trial_csv_mode_from_string(const std::string& s);

/// Experiment configuration: a versioned, strictly validated JSON file.
/// Unknown keys are rejected so archived configs stay unambiguous.
struct ExperimentConfig {
  int schema_version = 1;

  ArmParams arm;  // base solved from the home posture on load
  Vec2 home = Vec2::Zero();
  double reach_distance = 0.10;
  double plan_duration = 0.375;

  double field_alpha = 15.0;  // signed curl gain; +15 is the trained field
  ChannelGeometry channel;    // template; stiff simulation defaults

  // signed perpendicular error of synthetic baseline movements per
  // direction (mm, CCW-positive), spanning the observed 3.66-11.58 mm
  std::map<int, double> baseline_pe_mm;

  double trial_duration = 0.5;
  double trial_step = 5e-4;
  double log_rate = 1000.0;

  std::uint64_t protocol_seed = 1;
  std::uint64_t noise_seed = 12345;

  ControllerSpec controller;  // adapted state stamped on simulated protocols
  ImpedanceScaling baseline_scaling{0.7278, 0.0723};  // naive-phase gains
  FitOptions fitting;

  TrialCsvMode csv_mode = TrialCsvMode::Concatenated;
  std::string output_dir = "out";

  static ExperimentConfig defaults();
  static ExperimentConfig from_json_file(const std::string& path);
  static ExperimentConfig from_json_text(const std::string& text,
                                         const std::string& origin = "<memory>");
  std::string to_json_text() const;

  void validate() const;

  /// Simulation context with the shoulder base solved and synthetic
  /// bump baselines built from the PE table.
  SimSetup make_setup() const;
  FitContext make_fit_context() const;
  ProtocolOptions make_protocol_options() const;
};

}  // namespace fieldgen
