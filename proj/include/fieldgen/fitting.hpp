#pragma once

#include <cstdint>
#include <functional>

#include "fieldgen/analysis.hpp"

namespace fieldgen {

/// One group-mean adaptation-index observation.
struct IndexObservation {
  double group_deg = 0.0;
  double direction_deg = 0.0;
  Phase phase = Phase::Test;
  double index = 0.0;
};

/// Observations keyed by (group, direction, phase); duplicate keys are
/// rejected and directions must sit on the 45-degree grid.
class IndexDataset {
 public:
  void add(const IndexObservation& obs);
  const std::vector<IndexObservation>& rows() const { return rows_; }
  std::vector<IndexObservation> phase_rows(Phase phase) const;
  bool has(double group_deg, double direction_deg, Phase phase) const;
  double value(double group_deg, double direction_deg, Phase phase) const;
  std::vector<double> groups(Phase phase) const;  // sorted unique groups

  /// Order- and representation-stable content hash (FNV-1a 64).
  std::uint64_t fingerprint() const;

  /// Group-mean aggregation of per-trial indices.
  static IndexDataset group_means(std::span<const AdaptationIndex> indices);

 private:
  std::vector<IndexObservation> rows_;
};

// ---------------------------------------------------------------------------
// Derivative-free optimization

using Objective = std::function<double(const std::vector<double>&)>;

struct SimplexResult {
  std::vector<double> x;
  double f = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Nelder-Mead with box bounds (candidate points are clamped).
/// Converges when the simplex NLL spread drops below `tol`.
SimplexResult nelder_mead(const Objective& fn, std::vector<double> x0,
                          const std::vector<double>& step,
                          const std::vector<double>& lo,
                          const std::vector<double>& hi, int max_iterations,
                          double tol);

struct MultiStartResult {
  SimplexResult best;
  int total_iterations = 0;
  int starts = 0;
  bool converged = false;  // best start converged
};

/// Multi-start Nelder-Mead from Latin-hypercube initial points.
MultiStartResult multi_start_simplex(const Objective& fn,
                                     const std::vector<double>& lo,
                                     const std::vector<double>& hi, int starts,
                                     int max_iterations, double tol,
                                     std::uint64_t seed);

// ---------------------------------------------------------------------------
// Likelihood and information criteria

/// Gaussian NLL with the residual variance profiled out analytically:
/// NLL = (n/2)(1 + ln(2 pi SSE/n)), SSE floored at 1e-12.
double profiled_nll(double sse, std::size_t n);

/// Corrected Akaike information criterion
/// AICc = 2 NLL + 2k + 2k(k+1)/(n-k-1); throws SmallSampleError when
/// n <= k+1 (callers fall back to plain AIC, flagged).
double aicc(double nll, int k, int n);

/// Plain AIC = 2 NLL + 2k.
double aic(double nll, int k);

// ---------------------------------------------------------------------------
// Model fitting

struct GroupRepresentation {
  double group_deg = 0.0;
  double amplitude = 0.0;
  double sigma_deg = 30.0;
  double mu_deg = 0.0;  // standard model only
};

struct FitOptions {
  int restarts = 16;         // Latin-hypercube multi-starts
  int max_iterations = 5000;  // per start
  double tolerance = 1e-8;   // simplex NLL spread
  std::uint64_t seed = 0;
  double amp_lo = 0.0, amp_hi = 2.0;
  double sigma_lo = 2.0, sigma_hi = 120.0;
  double mu_lo = -90.0, mu_hi = 90.0;
  double imp_lo = 0.0, imp_hi = 3.0;
  int aicc_n_override = 0;  // 0: n = number of fitted observations
  int jobs = 0;             // 0: FIELDGEN_JOBS / hardware
  // re-optimize impedance group parameters against full simulations at
  // the fitted gains (removes the interpolation bias of the search)
  bool exact_group_polish = true;
};

struct FitResult {
  ModelKind model = ModelKind::Standard;
  std::vector<GroupRepresentation> groups;
  ImpedanceScaling scaling{0.0, 0.0};  // impedance fits only
  double nll = 0.0;
  double rmse = 0.0;
  double aicc = 0.0;  // holds AIC when aicc_is_aic is set
  int k = 0;
  int n = 0;
  bool aicc_is_aic = false;
  bool converged = false;
  int iterations = 0;
  int restarts = 0;
  std::uint64_t seed = 0;
  std::uint64_t dataset_fingerprint = 0;
  std::vector<std::string> notes;

  const GroupRepresentation& group(double group_deg) const;
};

/// Simulation context for the impedance model's predictions.
struct FitContext {
  SimSetup setup;  // baselines required for impedance fits
  double duration_s = 0.5;
  double step_s = 5e-4;
  double log_rate_hz = 1000.0;
  int jobs = 0;
};

/// Standard-model predictions, aligned with data.rows(): Gaussian
/// read-out for test rows, identically zero for baseline rows. When
/// `measured_baselines` is given, its baseline index for the row's
/// (group, direction) is added to test-row predictions (the paper's
/// superposition construction for uncorrected curves).
std::vector<double> predict_standard(const std::vector<GroupRepresentation>& groups,
                                     const IndexDataset& data,
                                     const IndexDataset* measured_baselines = nullptr);

/// Impedance-model predictions via full closed-loop simulation of each
/// row's error-clamp trial (baseline rows use amplitude 0).
std::vector<double> predict_impedance(const std::vector<GroupRepresentation>& groups,
                                      const ImpedanceScaling& scaling,
                                      const IndexDataset& data,
                                      const FitContext& ctx);

/// Maximum-likelihood fit of the standard model: per-group (A, sigma,
/// mu) against that group's test-phase rows; k = 3 x groups.
FitResult fit_standard(const IndexDataset& data, const FitOptions& options);

/// Maximum-likelihood fit of the impedance model: per-group (A, sigma)
/// plus shared (alpha_k, alpha_b) against test-phase rows; k = 2 x
/// groups + 2. The search uses a superposition-accelerated objective
/// (wall forces are affine in the estimated gain inside the channel);
/// the reported NLL/RMSE/AICc come from a final full-simulation
/// evaluation at the fitted parameters.
FitResult fit_impedance(const IndexDataset& data, const FitOptions& options,
                        const FitContext& ctx);

/// Impedance fit to baseline-phase rows with the representation
/// amplitude pinned at zero: only (alpha_k, alpha_b) are free; k = 2.
FitResult fit_impedance_baseline(const IndexDataset& data,
                                 const FitOptions& options,
                                 const FitContext& ctx);

// ---------------------------------------------------------------------------
// Model comparison

struct ComparisonRow {
  ModelKind model = ModelKind::Standard;
  double nll = 0.0, rmse = 0.0, aicc = 0.0, delta_aicc = 0.0;
  int k = 0, n = 0;
  bool converged = false, aicc_is_aic = false;
};

struct PredictedAsymmetry {
  ModelKind model = ModelKind::Standard;
  double group_deg = 0.0;
  double asymmetry = 0.0;
};

struct ModelComparison {
  std::vector<ComparisonRow> rows;  // sorted by AICc, best first
  ModelKind winner = ModelKind::Standard;
  std::vector<PredictedAsymmetry> asymmetries;
};

/// Rank fits of the same dataset by AICc and tabulate per-group
/// predicted intra-curve asymmetries. Throws std::invalid_argument if
/// the fits carry different dataset fingerprints.
ModelComparison compare_models(const std::vector<FitResult>& fits,
                               const IndexDataset& data, const FitContext* ctx);

// ---------------------------------------------------------------------------
// Recovery studies

struct RecoveryCase {
  ModelKind generator = ModelKind::Standard;
  std::uint64_t seed = 0;
  ModelKind winner = ModelKind::Standard;
  double delta_aicc = 0.0;  // winner margin
};

struct ModelRecoveryReport {
  int datasets_per_model = 0;
  double noise_sd = 0.0;
  int standard_recovered = 0;   // standard-generated datasets won by standard
  int impedance_recovered = 0;  // impedance-generated datasets won by impedance
  std::vector<RecoveryCase> cases;

  double standard_rate() const {
    return datasets_per_model ? double(standard_recovered) / datasets_per_model : 0.0;
  }
  double impedance_rate() const {
    return datasets_per_model ? double(impedance_recovered) / datasets_per_model : 0.0;
  }
};

/// Generate synthetic datasets from each model (iid Gaussian index
/// noise), fit both models to every dataset, and count how often AICc
/// selects the generating model.
ModelRecoveryReport model_recovery_study(int datasets_per_model, double noise_sd,
                                         std::uint64_t seed,
                                         const FitOptions& options,
                                         const FitContext& ctx);

}  // namespace fieldgen
