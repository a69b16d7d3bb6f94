#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "fieldgen/config.hpp"

namespace fieldgen {

// Trial records. Per-trial files carry a '#'-prefixed header block
// echoing the TrialSpec above the column header
// t,x,y,vx,vy,fx,fy,q1,q2. The concatenated form adds a leading trial
// column and relies on the schedule CSV for the spec echo.
void write_trial_csv(const TrialRecord& record, const std::string& path);
TrialRecord read_trial_csv(const std::string& path);

void write_trials_concatenated(const std::vector<TrialRecord>& records,
                               const std::string& path);
std::vector<TrialRecord> read_trials_concatenated(
    const std::string& path, const std::vector<TrialSpec>& schedule);

// Schedule: one row per trial with the full condition echo.
void write_schedule_csv(const Protocol& protocol, const std::string& path);
std::vector<TrialSpec> read_schedule_csv(const std::string& path,
                                         double* group_deg = nullptr,
                                         std::uint64_t* seed = nullptr);

// Adaptation indices.
void write_indices_csv(const std::vector<AdaptationIndex>& indices,
                       const std::string& path);
std::vector<AdaptationIndex> read_indices_csv(const std::string& path);

// Generalization curves: offset_deg, mean, sem, n plus identification
// columns.
void write_curves_csv(const std::vector<GeneralizationCurve>& curves,
                      const std::string& path);
std::vector<GeneralizationCurve> read_curves_csv(const std::string& path);

// Asymmetries.
struct AsymmetryRow {
  CurveKind kind = CurveKind::Intra;
  bool baseline_corrected = false;
  double anchor_deg = 0.0;
  double value = 0.0;
};
void write_asymmetries_csv(const std::vector<AsymmetryRow>& rows,
                           const std::string& path);

// Fit results round-trip through JSON.
void write_fit_json(const FitResult& fit, const std::string& path);
FitResult read_fit_json(const std::string& path);

// Comparison report.
void write_comparison_csv(const ModelComparison& cmp, const std::string& path);
std::string comparison_text(const ModelComparison& cmp);

// Recovery report.
void write_recovery_csv(const ModelRecoveryReport& report, const std::string& path);
std::string recovery_text(const ModelRecoveryReport& report);

/// FNV-1a 64-bit content hash of a file (hex). Reproducibility aid, not
/// cryptographic.
std::string file_hash_hex(const std::string& path);

/// Write manifest.json next to the outputs: config echo, seeds, and a
/// content hash per produced file.
void write_manifest(const ExperimentConfig& config,
                    const std::vector<std::string>& produced_files,
                    const std::string& path);

/// Baseline trajectory import. Accepts either the trial-record schema
/// with a direction column (direction,t,x,y,vx,vy,fx,fy,q1,q2) or the
/// path-only variant (direction,t,x,y). Velocities and accelerations
/// are rebuilt with the analysis filter chain; each direction needs at
/// least 20 uniformly sampled rows. Every direction listed in
/// `required_directions` must be present.
std::shared_ptr<BaselineSet> import_baselines(
    const std::string& path, const std::vector<double>& required_directions);

}  // namespace fieldgen
