#include "fieldgen/fitting.hpp"

#include <algorithm>
#include <random>

#include "fieldgen/parallel.hpp"
#include "fieldgen/protocol.hpp"

namespace fieldgen {

namespace {

int key_of(double deg) { return static_cast<int>(std::llround(wrap_deg(deg))); }

bool same_dir(double a, double b) { return key_of(a) == key_of(b); }

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

void IndexDataset::add(const IndexObservation& obs) {
  if (key_of(obs.direction_deg) % 45 != 0 || key_of(obs.group_deg) % 45 != 0)
    throw std::invalid_argument("IndexDataset: directions must sit on the 45-degree grid");
  if (!std::isfinite(obs.index))
    throw std::invalid_argument("IndexDataset: index must be finite");
  if (has(obs.group_deg, obs.direction_deg, obs.phase))
    throw std::invalid_argument("IndexDataset: duplicate (group, direction, phase) key");
  rows_.push_back(obs);
}

std::vector<IndexObservation> IndexDataset::phase_rows(Phase phase) const {
  std::vector<IndexObservation> out;
  for (const auto& r : rows_)
    if (r.phase == phase) out.push_back(r);
  return out;
}

bool IndexDataset::has(double group_deg, double direction_deg, Phase phase) const {
  for (const auto& r : rows_)
    if (r.phase == phase && same_dir(r.group_deg, group_deg) &&
        same_dir(r.direction_deg, direction_deg))
      return true;
  return false;
}

double IndexDataset::value(double group_deg, double direction_deg,
                           Phase phase) const {
  for (const auto& r : rows_)
    if (r.phase == phase && same_dir(r.group_deg, group_deg) &&
        same_dir(r.direction_deg, direction_deg))
      return r.index;
  throw MissingDataError("IndexDataset: no observation for group " +
                         std::to_string(group_deg) + ", direction " +
                         std::to_string(direction_deg) + ", phase " +
                         to_string(phase));
}

std::vector<double> IndexDataset::groups(Phase phase) const {
  std::vector<int> keys;
  for (const auto& r : rows_)
    if (r.phase == phase) keys.push_back(key_of(r.group_deg));
  std::sort(keys.begin(), keys.end());
  keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
  std::vector<double> out;
  for (int k : keys) out.push_back(static_cast<double>(k));
  return out;
}

std::uint64_t IndexDataset::fingerprint() const {
  struct Canon {
    int group, dir, phase;
    double value;
  };
  std::vector<Canon> canon;
  canon.reserve(rows_.size());
  for (const auto& r : rows_)
    canon.push_back({key_of(r.group_deg), key_of(r.direction_deg),
                     static_cast<int>(r.phase), r.index});
  std::sort(canon.begin(), canon.end(), [](const Canon& a, const Canon& b) {
    return std::tie(a.phase, a.group, a.dir) < std::tie(b.phase, b.group, b.dir);
  });
  std::uint64_t h = 14695981039346656037ULL;
  auto mix = [&h](const void* data, std::size_t n) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= bytes[i];
      h *= 1099511628211ULL;
    }
  };
  for (const auto& c : canon) {
    mix(&c.group, sizeof c.group);
    mix(&c.dir, sizeof c.dir);
    mix(&c.phase, sizeof c.phase);
    mix(&c.value, sizeof c.value);
  }
  return h;
}

IndexDataset IndexDataset::group_means(std::span<const AdaptationIndex> indices) {
  struct Acc {
    double sum = 0.0;
    int n = 0;
  };
  std::map<std::tuple<int, int, int>, Acc> acc;
  for (const auto& idx : indices) {
    auto& a = acc[{static_cast<int>(idx.phase), key_of(idx.group_deg),
                   key_of(idx.direction_deg)}];
    a.sum += idx.value;
    a.n += 1;
  }
  IndexDataset ds;
  for (const auto& [key, a] : acc) {
    IndexObservation obs;
    obs.phase = static_cast<Phase>(std::get<0>(key));
    obs.group_deg = std::get<1>(key);
    obs.direction_deg = std::get<2>(key);
    obs.index = a.sum / a.n;
    ds.add(obs);
  }
  return ds;
}

// ---------------------------------------------------------------------------

namespace {

SimplexResult nelder_mead_once(const Objective& fn, std::vector<double> x0,
                               const std::vector<double>& step,
                               const std::vector<double>& lo,
                               const std::vector<double>& hi,
                               int max_iterations, double tol) {
  const std::size_t d = x0.size();

  auto clamp_point = [&](std::vector<double>& x) {
    for (std::size_t i = 0; i < d; ++i) x[i] = std::clamp(x[i], lo[i], hi[i]);
  };

  clamp_point(x0);
  std::vector<std::vector<double>> verts(d + 1, x0);
  for (std::size_t i = 0; i < d; ++i) {
    verts[i + 1][i] += step[i];
    clamp_point(verts[i + 1]);
    // keep the simplex non-degenerate against the upper bound
    if (verts[i + 1][i] == x0[i]) verts[i + 1][i] = x0[i] - step[i];
    clamp_point(verts[i + 1]);
  }
  std::vector<double> fv(d + 1);
  for (std::size_t i = 0; i <= d; ++i) fv[i] = fn(verts[i]);

  SimplexResult result;
  std::vector<std::size_t> order(d + 1);
  for (int iter = 0; iter < max_iterations; ++iter) {
    for (std::size_t i = 0; i <= d; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
    const std::size_t best = order.front(), worst = order.back();
    const std::size_t second_worst = order[d - 1];

    result.iterations = iter;
    if (fv[worst] - fv[best] < tol) {
      result.converged = true;
      break;
    }

    std::vector<double> centroid(d, 0.0);
    for (std::size_t i = 0; i <= d; ++i) {
      if (i == worst) continue;
      for (std::size_t j = 0; j < d; ++j) centroid[j] += verts[i][j];
    }
    for (double& c : centroid) c /= static_cast<double>(d);

    auto blend = [&](double coeff) {
      std::vector<double> x(d);
      for (std::size_t j = 0; j < d; ++j)
        x[j] = centroid[j] + coeff * (verts[worst][j] - centroid[j]);
      clamp_point(x);
      return x;
    };

    const auto reflected = blend(-1.0);
    const double f_ref = fn(reflected);
    if (f_ref < fv[best]) {
      const auto expanded = blend(-2.0);
      const double f_exp = fn(expanded);
      if (f_exp < f_ref) {
        verts[worst] = expanded;
        fv[worst] = f_exp;
      } else {
        verts[worst] = reflected;
        fv[worst] = f_ref;
      }
    } else if (f_ref < fv[second_worst]) {
      verts[worst] = reflected;
      fv[worst] = f_ref;
    } else {
      const bool outside = f_ref < fv[worst];
      const auto contracted = blend(outside ? -0.5 : 0.5);
      const double f_con = fn(contracted);
      if (f_con < std::min(f_ref, fv[worst])) {
        verts[worst] = contracted;
        fv[worst] = f_con;
      } else {
        // shrink toward the best vertex
        for (std::size_t i = 0; i <= d; ++i) {
          if (i == best) continue;
          for (std::size_t j = 0; j < d; ++j)
            verts[i][j] = verts[best][j] + 0.5 * (verts[i][j] - verts[best][j]);
          clamp_point(verts[i]);
          fv[i] = fn(verts[i]);
        }
      }
    }
  }

  std::size_t best = 0;
  for (std::size_t i = 1; i <= d; ++i)
    if (fv[i] < fv[best]) best = i;
  result.x = verts[best];
  result.f = fv[best];
  return result;
}

}  // namespace

SimplexResult nelder_mead(const Objective& fn, std::vector<double> x0,
                          const std::vector<double>& step,
                          const std::vector<double>& lo,
                          const std::vector<double>& hi, int max_iterations,
                          double tol) {
  const std::size_t d = x0.size();
  if (step.size() != d || lo.size() != d || hi.size() != d)
    throw std::invalid_argument("nelder_mead: dimension mismatch");

  // Re-seed a fresh simplex around the converged point while it keeps
  // helping; clamping against the box and narrow valleys can collapse
  // the simplex before the floor is reached.
  SimplexResult result = nelder_mead_once(fn, std::move(x0), step, lo, hi,
                                          max_iterations, tol);
  for (int restart = 0; restart < 5; ++restart) {
    std::vector<double> restep(d);
    for (std::size_t j = 0; j < d; ++j)
      restep[j] = std::max(0.05 * std::abs(step[j]), 1e-4 * (hi[j] - lo[j]));
    SimplexResult next = nelder_mead_once(fn, result.x, restep, lo, hi,
                                          max_iterations, tol);
    next.iterations += result.iterations;
    const bool improved = next.f < result.f - tol;
    if (next.f < result.f) {
      next.converged = next.converged || result.converged;
      result = next;
    } else {
      result.iterations = next.iterations;
      result.converged = result.converged || next.converged;
    }
    if (!improved) break;
  }
  return result;
}

MultiStartResult multi_start_simplex(const Objective& fn,
                                     const std::vector<double>& lo,
                                     const std::vector<double>& hi, int starts,
                                     int max_iterations, double tol,
                                     std::uint64_t seed) {
  const std::size_t d = lo.size();
  if (hi.size() != d) throw std::invalid_argument("multi_start_simplex: bounds mismatch");
  starts = std::max(1, starts);

  // Latin hypercube: one stratum per start and dimension
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<std::vector<double>> points(starts, std::vector<double>(d));
  for (std::size_t j = 0; j < d; ++j) {
    std::vector<int> cells(starts);
    for (int i = 0; i < starts; ++i) cells[i] = i;
    for (std::size_t i = cells.size(); i > 1; --i)
      std::swap(cells[i - 1], cells[rng() % i]);
    for (int i = 0; i < starts; ++i) {
      const double u = (cells[i] + uniform01(rng)) / starts;
      points[i][j] = lo[j] + u * (hi[j] - lo[j]);
    }
  }

  MultiStartResult out;
  out.starts = starts;
  bool first = true;
  for (int s = 0; s < starts; ++s) {
    std::vector<double> step(d);
    for (std::size_t j = 0; j < d; ++j) step[j] = 0.1 * (hi[j] - lo[j]);
    SimplexResult res =
        nelder_mead_once(fn, points[s], step, lo, hi, max_iterations, tol);
    out.total_iterations += res.iterations;
    if (first || res.f < out.best.f) {
      out.best = res;
      first = false;
    }
  }
  // restart polish on the winning start only
  {
    std::vector<double> step(d);
    for (std::size_t j = 0; j < d; ++j) step[j] = 0.01 * (hi[j] - lo[j]);
    SimplexResult polished =
        nelder_mead(fn, out.best.x, step, lo, hi, max_iterations, tol);
    out.total_iterations += polished.iterations;
    if (polished.f < out.best.f) {
      polished.converged = polished.converged || out.best.converged;
      out.best = polished;
    }
  }
  out.converged = out.best.converged;
  return out;
}

// ---------------------------------------------------------------------------

double profiled_nll(double sse, std::size_t n) {
  if (n == 0) throw std::invalid_argument("profiled_nll: empty dataset");
  const double floored = std::max(sse, 1e-12);
  const double nn = static_cast<double>(n);
  return 0.5 * nn * (1.0 + std::log(2.0 * kPi * floored / nn));
}

double aic(double nll, int k) { return 2.0 * nll + 2.0 * k; }

double aicc(double nll, int k, int n) {
  if (n <= k + 1)
    throw SmallSampleError("aicc: n = " + std::to_string(n) +
                           " is too small for k = " + std::to_string(k) +
                           " (need n > k + 1); report AIC instead");
  return aic(nll, k) + 2.0 * k * (k + 1.0) / (static_cast<double>(n) - k - 1.0);
}

// ---------------------------------------------------------------------------

const GroupRepresentation& FitResult::group(double group_deg) const {
  for (const auto& g : groups)
    if (same_dir(g.group_deg, group_deg)) return g;
  throw MissingDataError("FitResult: no group at " + std::to_string(group_deg));
}

namespace {

const GroupRepresentation* find_group(const std::vector<GroupRepresentation>& groups,
                                      double group_deg) {
  for (const auto& g : groups)
    if (same_dir(g.group_deg, group_deg)) return &g;
  return nullptr;
}

double gaussian_tuning(const GroupRepresentation& g, double direction_deg,
                       bool with_mu) {
  const double delta =
      wrap_deg(direction_deg - g.group_deg - (with_mu ? g.mu_deg : 0.0));
  return g.amplitude * std::exp(-delta * delta / (2.0 * g.sigma_deg * g.sigma_deg));
}

/// One clamp-trial simulation for the impedance model.
double simulate_impedance_index(double group_deg, double direction_deg,
                                double amplitude, double sigma_deg,
                                const ImpedanceScaling& scaling,
                                const FitContext& ctx, Phase phase) {
  TrialSpec spec;
  spec.direction_deg = direction_deg;
  spec.field.kind = FieldKind::Clamp;
  spec.field.alpha = ctx.setup.alpha_true;
  spec.kind = phase == Phase::Baseline ? TrialKind::BaselineClamp
                                       : TrialKind::TestClamp;
  spec.feedback = false;
  spec.duration_s = ctx.duration_s;
  spec.step_s = ctx.step_s;
  spec.log_rate_hz = ctx.log_rate_hz;
  spec.controller.kind = ModelKind::Impedance;
  spec.controller.rep.model = ModelKind::Impedance;
  spec.controller.rep.amplitude = amplitude;
  spec.controller.rep.sigma_deg = sigma_deg;
  spec.controller.rep.mu_deg = 0.0;
  spec.controller.rep.theta_train_deg = group_deg;
  spec.controller.scaling = scaling;
  align_channel(spec, ctx.setup);
  const TrialRecord rec = simulate_trial(spec, ctx.setup);
  return adaptation_index(rec, ctx.setup.alpha_true).value;
}

double sse_of(const std::vector<double>& pred,
              const std::vector<IndexObservation>& rows) {
  double sse = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double r = pred[i] - rows[i].index;
    sse += r * r;
  }
  return sse;
}

}  // namespace

std::vector<double> predict_standard(const std::vector<GroupRepresentation>& groups,
                                     const IndexDataset& data,
                                     const IndexDataset* measured_baselines) {
  std::vector<double> pred(data.rows().size(), 0.0);
  for (std::size_t i = 0; i < data.rows().size(); ++i) {
    const auto& row = data.rows()[i];
    if (row.phase == Phase::Baseline) continue;  // the standard model predicts zero
    const auto* g = find_group(groups, row.group_deg);
    if (!g)
      throw MissingDataError("predict_standard: no parameters for group " +
                             std::to_string(row.group_deg));
    pred[i] = gaussian_tuning(*g, row.direction_deg, /*with_mu=*/true);
    if (measured_baselines)
      pred[i] += measured_baselines->value(row.group_deg, row.direction_deg,
                                           Phase::Baseline);
  }
  return pred;
}

std::vector<double> predict_impedance(const std::vector<GroupRepresentation>& groups,
                                      const ImpedanceScaling& scaling,
                                      const IndexDataset& data,
                                      const FitContext& ctx) {
  const auto& rows = data.rows();
  std::vector<double> pred(rows.size(), 0.0);
  parallel_for(rows.size(), ctx.jobs, [&](std::size_t i) {
    const auto& row = rows[i];
    double amplitude = 0.0, sigma = 30.0;
    if (row.phase != Phase::Baseline) {
      const auto* g = find_group(groups, row.group_deg);
      if (!g)
        throw MissingDataError("predict_impedance: no parameters for group " +
                               std::to_string(row.group_deg));
      amplitude = g->amplitude;
      sigma = g->sigma_deg;
    }
    pred[i] = simulate_impedance_index(row.group_deg, row.direction_deg,
                                       amplitude, sigma, scaling, ctx, row.phase);
  });
  return pred;
}

FitResult fit_standard(const IndexDataset& data, const FitOptions& options) {
  auto test_rows = data.phase_rows(Phase::Test);
  if (test_rows.empty())
    throw MissingDataError("fit_standard: dataset has no test-phase rows");
  const auto groups = data.groups(Phase::Test);

  FitResult result;
  result.model = ModelKind::Standard;
  result.seed = options.seed;
  result.dataset_fingerprint = data.fingerprint();
  result.converged = true;

  // The standard model reads the representation out of baseline-
  // corrected forces: subtract measured baseline indices when the
  // dataset carries them. Residuals against the uncorrected data with
  // the baseline added back are identical, so NLL/RMSE stay comparable
  // with fits made on the same dataset.
  bool corrected = false;
  for (auto& row : test_rows) {
    if (data.has(row.group_deg, row.direction_deg, Phase::Baseline)) {
      row.index -= data.value(row.group_deg, row.direction_deg, Phase::Baseline);
      corrected = true;
    }
  }
  if (corrected)
    result.notes.push_back("fit to baseline-corrected adaptation indices");

  double sse_total = 0.0;
  for (double g : groups) {
    std::vector<IndexObservation> rows;
    for (const auto& r : test_rows)
      if (same_dir(r.group_deg, g)) rows.push_back(r);

    const std::vector<double> lo{options.amp_lo, options.sigma_lo, options.mu_lo};
    const std::vector<double> hi{options.amp_hi, options.sigma_hi, options.mu_hi};
    auto objective = [&](const std::vector<double>& x) {
      GroupRepresentation rep{g, x[0], x[1], x[2]};
      double sse = 0.0;
      for (const auto& r : rows) {
        const double e = gaussian_tuning(rep, r.direction_deg, true) - r.index;
        sse += e * e;
      }
      return profiled_nll(sse, rows.size());
    };
    const auto ms = multi_start_simplex(objective, lo, hi, options.restarts,
                                        options.max_iterations, options.tolerance,
                                        options.seed + static_cast<std::uint64_t>(key_of(g)));
    GroupRepresentation fitted{g, ms.best.x[0], ms.best.x[1], ms.best.x[2]};
    // a zero-amplitude model that matches the optimum wins the tie:
    // narrow off-grid Gaussians can dodge every sampled direction,
    // leaving the amplitude unidentified
    {
      double sse0 = 0.0;
      for (const auto& r : rows) sse0 += r.index * r.index;
      if (profiled_nll(sse0, rows.size()) <= ms.best.f + options.tolerance)
        fitted = GroupRepresentation{g, 0.0, fitted.sigma_deg, 0.0};
    }
    result.groups.push_back(fitted);
    result.iterations += ms.total_iterations;
    result.restarts = ms.starts;
    result.converged = result.converged && ms.converged;
    if (fitted.amplitude < 1e-3)
      result.notes.push_back("group " + std::to_string(key_of(g)) +
                             ": amplitude ~ 0, sigma and mu unidentifiable");
    for (const auto& r : rows) {
      const double e = gaussian_tuning(fitted, r.direction_deg, true) - r.index;
      sse_total += e * e;
    }
  }

  result.k = 3 * static_cast<int>(groups.size());
  result.n = options.aicc_n_override > 0 ? options.aicc_n_override
                                         : static_cast<int>(test_rows.size());
  result.nll = profiled_nll(sse_total, test_rows.size());
  result.rmse = std::sqrt(sse_total / static_cast<double>(test_rows.size()));
  try {
    result.aicc = aicc(result.nll, result.k, result.n);
  } catch (const SmallSampleError&) {
    result.aicc = aic(result.nll, result.k);
    result.aicc_is_aic = true;
    result.notes.push_back("n <= k + 1: reporting AIC instead of AICc");
  }
  return result;
}

namespace {

/// Per-direction index response in the representation tuning, sampled
/// at a few anchors and interpolated. The simulated index at direction
/// th depends on the group only through the tuning value, so anchors at
/// tune = 0, 0.25 and 1 capture the response: it is linear in the
/// estimated gain once the hand sits on the wall, with a kink at small
/// tuning where the free play changes sides. Verified against full
/// simulation by the fitting tests.
struct ImpedanceSurrogate {
  std::vector<double> directions;
  static constexpr double kAnchors[3] = {0.0, 0.25, 1.0};
  std::vector<std::array<double, 3>> values;  // [direction][anchor]

  double predict(const GroupRepresentation& g, double direction_deg) const {
    const std::size_t i = index_of(direction_deg);
    const double t = gaussian_tuning(g, direction_deg, false);
    const auto& v = values[i];
    if (t <= kAnchors[1])
      return v[0] + (v[1] - v[0]) * (t - kAnchors[0]) / (kAnchors[1] - kAnchors[0]);
    // linear continuation from the upper segment (the response stays
    // linear well past tune = 1)
    return v[1] + (v[2] - v[1]) * (t - kAnchors[1]) / (kAnchors[2] - kAnchors[1]);
  }

  std::size_t index_of(double direction_deg) const {
    for (std::size_t i = 0; i < directions.size(); ++i)
      if (same_dir(directions[i], direction_deg)) return i;
    throw MissingDataError("ImpedanceSurrogate: unknown direction " +
                           std::to_string(direction_deg));
  }
};

ImpedanceSurrogate make_surrogate(const std::vector<double>& directions,
                                  const ImpedanceScaling& scaling,
                                  const FitContext& ctx) {
  ImpedanceSurrogate s;
  s.directions = directions;
  s.values.resize(directions.size());
  parallel_for(3 * directions.size(), ctx.jobs, [&](std::size_t i) {
    const std::size_t di = i % directions.size();
    const std::size_t ai = i / directions.size();
    s.values[di][ai] = simulate_impedance_index(
        directions[di], directions[di], ImpedanceSurrogate::kAnchors[ai], 30.0,
        scaling, ctx, Phase::Test);
  });
  return s;
}

struct GroupFit {
  GroupRepresentation rep;
  double sse = 0.0;
};

/// Best (A, sigma) for one group against the surrogate: coarse grid,
/// then a simplex polish. Surrogate evaluations are simulation-free.
GroupFit fit_group_against_surrogate(double group_deg,
                                     const std::vector<IndexObservation>& rows,
                                     const ImpedanceSurrogate& surrogate,
                                     const FitOptions& options) {
  auto eval_sse = [&](double a, double sigma) {
    GroupRepresentation g{group_deg, a, sigma, 0.0};
    double sse = 0.0;
    for (const auto& row : rows) {
      const double e = surrogate.predict(g, row.direction_deg) - row.index;
      sse += e * e;
    }
    return sse;
  };

  double best_a = 0.0, best_sigma = options.sigma_lo, best_sse = 0.0;
  bool first = true;
  const int grid = 24;
  for (int ks = 0; ks < grid; ++ks) {
    const double sigma =
        options.sigma_lo * std::pow(options.sigma_hi / options.sigma_lo,
                                    static_cast<double>(ks) / (grid - 1));
    for (int ka = 0; ka < grid; ++ka) {
      const double a = options.amp_lo + (options.amp_hi - options.amp_lo) *
                                            static_cast<double>(ka) / (grid - 1);
      const double sse = eval_sse(a, sigma);
      if (first || sse < best_sse) {
        best_a = a;
        best_sigma = sigma;
        best_sse = sse;
        first = false;
      }
    }
  }

  const std::vector<double> lo{options.amp_lo, options.sigma_lo};
  const std::vector<double> hi{options.amp_hi, options.sigma_hi};
  const auto polish = nelder_mead(
      [&](const std::vector<double>& x) { return eval_sse(x[0], x[1]); },
      {best_a, best_sigma}, {0.05, 2.0}, lo, hi, options.max_iterations,
      options.tolerance * 1e-2);
  GroupFit fit;
  fit.rep = GroupRepresentation{group_deg, polish.x[0], polish.x[1], 0.0};
  fit.sse = polish.f;
  return fit;
}

}  // namespace

FitResult fit_impedance(const IndexDataset& data, const FitOptions& options,
                        const FitContext& ctx) {
  if (!ctx.setup.baselines)
    throw MissingBaselineError("fit_impedance: context has no baseline trajectories");
  const auto test_rows = data.phase_rows(Phase::Test);
  if (test_rows.empty())
    throw MissingDataError("fit_impedance: dataset has no test-phase rows");
  const auto groups = data.groups(Phase::Test);

  std::vector<double> directions;
  for (const auto& r : test_rows)
    if (std::none_of(directions.begin(), directions.end(),
                     [&](double d) { return same_dir(d, r.direction_deg); }))
      directions.push_back(r.direction_deg);
  std::sort(directions.begin(), directions.end());

  std::vector<std::vector<IndexObservation>> rows_by_group(groups.size());
  for (std::size_t gi = 0; gi < groups.size(); ++gi)
    for (const auto& r : test_rows)
      if (same_dir(r.group_deg, groups[gi])) rows_by_group[gi].push_back(r);

  std::vector<GroupRepresentation> best_groups(groups.size());
  auto objective = [&](const std::vector<double>& x) {
    const ImpedanceScaling scaling{x[0], x[1]};
    const auto surrogate = make_surrogate(directions, scaling, ctx);
    double sse = 0.0;
    for (std::size_t gi = 0; gi < groups.size(); ++gi)
      sse += fit_group_against_surrogate(groups[gi], rows_by_group[gi], surrogate,
                                         options)
                 .sse;
    return profiled_nll(sse, test_rows.size());
  };

  const std::vector<double> lo{options.imp_lo, options.imp_lo};
  const std::vector<double> hi{options.imp_hi, options.imp_hi};
  const auto ms = multi_start_simplex(objective, lo, hi, options.restarts,
                                      options.max_iterations, options.tolerance,
                                      options.seed + 77);

  const ImpedanceScaling fitted_scaling{ms.best.x[0], ms.best.x[1]};
  const auto surrogate = make_surrogate(directions, fitted_scaling, ctx);
  for (std::size_t gi = 0; gi < groups.size(); ++gi)
    best_groups[gi] =
        fit_group_against_surrogate(groups[gi], rows_by_group[gi], surrogate, options)
            .rep;

  if (options.exact_group_polish) {
    for (std::size_t gi = 0; gi < groups.size(); ++gi) {
      const auto& rows = rows_by_group[gi];
      auto exact_sse = [&](const std::vector<double>& x) {
        std::vector<double> pred(rows.size());
        parallel_for(rows.size(), ctx.jobs, [&](std::size_t i) {
          pred[i] = simulate_impedance_index(groups[gi], rows[i].direction_deg,
                                             x[0], x[1], fitted_scaling, ctx,
                                             Phase::Test);
        });
        return sse_of(pred, rows);
      };
      const auto res = nelder_mead(
          exact_sse, {best_groups[gi].amplitude, best_groups[gi].sigma_deg},
          {0.03, 2.0}, {options.amp_lo, options.sigma_lo},
          {options.amp_hi, options.sigma_hi}, 40, options.tolerance);
      best_groups[gi].amplitude = res.x[0];
      best_groups[gi].sigma_deg = res.x[1];
    }
  }

  FitResult result;
  result.model = ModelKind::Impedance;
  result.groups = best_groups;
  result.scaling = fitted_scaling;
  result.seed = options.seed;
  result.dataset_fingerprint = data.fingerprint();
  result.converged = ms.converged;
  result.iterations = ms.total_iterations;
  result.restarts = ms.starts;

  // report the exact simulation objective at the fitted parameters
  IndexDataset test_only;
  for (const auto& r : test_rows) test_only.add(r);
  const auto exact = predict_impedance(best_groups, fitted_scaling, test_only, ctx);
  const double sse = sse_of(exact, test_only.rows());
  result.k = 2 * static_cast<int>(groups.size()) + 2;
  result.n = options.aicc_n_override > 0 ? options.aicc_n_override
                                         : static_cast<int>(test_rows.size());
  result.nll = profiled_nll(sse, test_rows.size());
  result.rmse = std::sqrt(sse / static_cast<double>(test_rows.size()));
  try {
    result.aicc = aicc(result.nll, result.k, result.n);
  } catch (const SmallSampleError&) {
    result.aicc = aic(result.nll, result.k);
    result.aicc_is_aic = true;
    result.notes.push_back("n <= k + 1: reporting AIC instead of AICc");
  }
  return result;
}

FitResult fit_impedance_baseline(const IndexDataset& data,
                                 const FitOptions& options,
                                 const FitContext& ctx) {
  if (!ctx.setup.baselines)
    throw MissingBaselineError(
        "fit_impedance_baseline: context has no baseline trajectories");
  const auto rows = data.phase_rows(Phase::Baseline);
  if (rows.empty())
    throw MissingDataError("fit_impedance_baseline: dataset has no baseline rows");

  auto objective = [&](const std::vector<double>& x) {
    const ImpedanceScaling scaling{x[0], x[1]};
    std::vector<double> pred(rows.size());
    parallel_for(rows.size(), ctx.jobs, [&](std::size_t i) {
      pred[i] = simulate_impedance_index(rows[i].group_deg, rows[i].direction_deg,
                                         0.0, 30.0, scaling, ctx, Phase::Baseline);
    });
    return profiled_nll(sse_of(pred, rows), rows.size());
  };

  const std::vector<double> lo{options.imp_lo, options.imp_lo};
  const std::vector<double> hi{options.imp_hi, options.imp_hi};
  const auto ms = multi_start_simplex(objective, lo, hi, options.restarts,
                                      options.max_iterations, options.tolerance,
                                      options.seed + 101);

  FitResult result;
  result.model = ModelKind::Impedance;
  result.scaling = ImpedanceScaling{ms.best.x[0], ms.best.x[1]};
  result.seed = options.seed;
  result.dataset_fingerprint = data.fingerprint();
  result.converged = ms.converged;
  result.iterations = ms.total_iterations;
  result.restarts = ms.starts;
  result.notes.push_back("baseline fit: representation amplitude pinned at 0");

  std::vector<double> pred(rows.size());
  parallel_for(rows.size(), ctx.jobs, [&](std::size_t i) {
    pred[i] = simulate_impedance_index(rows[i].group_deg, rows[i].direction_deg,
                                       0.0, 30.0, result.scaling, ctx,
                                       Phase::Baseline);
  });
  const double sse = sse_of(pred, rows);
  result.k = 2;
  result.n = options.aicc_n_override > 0 ? options.aicc_n_override
                                         : static_cast<int>(rows.size());
  result.nll = profiled_nll(sse, rows.size());
  result.rmse = std::sqrt(sse / static_cast<double>(rows.size()));
  try {
    result.aicc = aicc(result.nll, result.k, result.n);
  } catch (const SmallSampleError&) {
    result.aicc = aic(result.nll, result.k);
    result.aicc_is_aic = true;
    result.notes.push_back("n <= k + 1: reporting AIC instead of AICc");
  }
  return result;
}

ModelComparison compare_models(const std::vector<FitResult>& fits,
                               const IndexDataset& data, const FitContext* ctx) {
  if (fits.empty()) throw std::invalid_argument("compare_models: no fits");
  const std::uint64_t fp = data.fingerprint();
  for (const auto& f : fits)
    if (f.dataset_fingerprint != fp)
      throw std::invalid_argument(
          "compare_models: fit was computed on a different dataset");

  ModelComparison cmp;
  for (const auto& f : fits)
    cmp.rows.push_back({f.model, f.nll, f.rmse, f.aicc, 0.0, f.k, f.n,
                        f.converged, f.aicc_is_aic});
  std::sort(cmp.rows.begin(), cmp.rows.end(),
            [](const ComparisonRow& a, const ComparisonRow& b) {
              return a.aicc < b.aicc;
            });
  for (auto& row : cmp.rows) row.delta_aicc = row.aicc - cmp.rows.front().aicc;
  cmp.winner = cmp.rows.front().model;

  // Predicted inter-generalization asymmetries (the Fig 4A/5A panel):
  // for anchor direction th, groups at th+45 and th-45 reaching th.
  const bool have_baselines = !data.phase_rows(Phase::Baseline).empty();
  for (const auto& f : fits) {
    for (const auto& g : f.groups) {
      const double anchor = g.group_deg;
      auto predicted = [&](double group_deg, double dir_deg) -> double {
        const auto* gp = find_group(f.groups, group_deg);
        if (!gp) return std::numeric_limits<double>::quiet_NaN();
        if (f.model == ModelKind::Standard) {
          double p = gaussian_tuning(*gp, dir_deg, true);
          if (have_baselines && data.has(group_deg, dir_deg, Phase::Baseline))
            p += data.value(group_deg, dir_deg, Phase::Baseline);
          return p;
        }
        if (!ctx) return std::numeric_limits<double>::quiet_NaN();
        return simulate_impedance_index(group_deg, dir_deg, gp->amplitude,
                                        gp->sigma_deg, f.scaling, *ctx,
                                        Phase::Test);
      };
      const double plus = predicted(wrap_deg(anchor + 45.0), anchor);
      const double minus = predicted(wrap_deg(anchor - 45.0), anchor);
      if (std::isfinite(plus) && std::isfinite(minus))
        cmp.asymmetries.push_back({f.model, anchor, plus - minus});
    }
  }
  return cmp;
}

ModelRecoveryReport model_recovery_study(int datasets_per_model, double noise_sd,
                                         std::uint64_t seed,
                                         const FitOptions& options,
                                         const FitContext& ctx) {
  ModelRecoveryReport report;
  report.datasets_per_model = datasets_per_model;
  report.noise_sd = noise_sd;

  const auto dirs = standard_directions();

  for (int rep = 0; rep < datasets_per_model; ++rep) {
    for (ModelKind generator : {ModelKind::Standard, ModelKind::Impedance}) {
      const std::uint64_t case_seed =
          seed + 1000003ULL * static_cast<std::uint64_t>(rep) +
          (generator == ModelKind::Impedance ? 1 : 0);
      std::mt19937_64 rng(case_seed ^ 0xc2b2ae3d27d4eb4fULL);

      std::vector<GroupRepresentation> truth;
      ImpedanceScaling truth_scaling{0.0, 0.0};
      for (double g : dirs) {
        GroupRepresentation t;
        t.group_deg = g;
        if (generator == ModelKind::Standard) {
          t.amplitude = 0.7 + 0.6 * uniform01(rng);
          t.sigma_deg = 20.0 + 30.0 * uniform01(rng);
          t.mu_deg = -15.0 + 30.0 * uniform01(rng);
        } else {
          t.amplitude = 0.7 + 0.4 * uniform01(rng);
          t.sigma_deg = 20.0 + 30.0 * uniform01(rng);
          t.mu_deg = 0.0;
        }
        truth.push_back(t);
      }
      if (generator == ModelKind::Impedance) {
        truth_scaling.alpha_k = 0.4 + 0.8 * uniform01(rng);
        truth_scaling.alpha_b = 0.05 + 0.7 * uniform01(rng);
      }

      IndexDataset keys;
      for (double g : dirs)
        for (double d : dirs)
          keys.add({g, d, Phase::Test, 0.0});

      std::vector<double> values;
      if (generator == ModelKind::Standard) {
        values = predict_standard(truth, keys);
      } else {
        values = predict_impedance(truth, truth_scaling, keys, ctx);
      }

      std::normal_distribution<double> noise(0.0, noise_sd);
      IndexDataset data;
      for (std::size_t i = 0; i < keys.rows().size(); ++i) {
        IndexObservation obs = keys.rows()[i];
        obs.index = values[i] + (noise_sd > 0.0 ? noise(rng) : 0.0);
        data.add(obs);
      }

      FitOptions fit_opt = options;
      fit_opt.seed = case_seed;
      const FitResult fs = fit_standard(data, fit_opt);
      const FitResult fi = fit_impedance(data, fit_opt, ctx);

      RecoveryCase rc;
      rc.generator = generator;
      rc.seed = case_seed;
      rc.winner = fs.aicc < fi.aicc ? ModelKind::Standard : ModelKind::Impedance;
      rc.delta_aicc = std::abs(fs.aicc - fi.aicc);
      report.cases.push_back(rc);
      if (generator == ModelKind::Standard && rc.winner == ModelKind::Standard)
        ++report.standard_recovered;
      if (generator == ModelKind::Impedance && rc.winner == ModelKind::Impedance)
        ++report.impedance_recovered;
    }
  }
  return report;
}

}  // namespace fieldgen
