#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "fieldgen/fitting.hpp"
#include "fieldgen/protocol.hpp"

using namespace fieldgen;

namespace {

IndexObservation obs(double g, double d, Phase phase, double value) {
  IndexObservation o;
  o.group_deg = g;
  o.direction_deg = d;
  o.phase = phase;
  o.index = value;
  return o;
}

IndexDataset gaussian_data(double A, double sigma, double mu) {
  IndexDataset data;
  for (double g : standard_directions())
    for (double d : standard_directions()) {
      const double delta = wrap_deg(d - g - mu);
      data.add(obs(g, d, Phase::Test,
                   A * std::exp(-delta * delta / (2 * sigma * sigma))));
    }
  return data;
}

FitContext curved_context(double step = 5e-4) {
  FitContext ctx;
  ctx.setup = default_setup();
  ctx.step_s = step;
  ctx.jobs = 2;
  auto baselines = std::make_shared<BaselineSet>();
  const double pe_mm[8] = {7.0, 11.5, 8.0, 4.2, 7.0, 11.0, 8.5, 4.0};
  for (int i = 0; i < 8; ++i) {
    const double dir = 45.0 * i;
    baselines->set(dir, std::make_shared<BumpPlan>(ctx.setup.home,
                                                   ctx.setup.target(dir),
                                                   ctx.setup.plan_duration,
                                                   pe_mm[i] * 1e-3));
  }
  ctx.setup.baselines = baselines;
  return ctx;
}

}  // namespace

TEST_CASE("dataset rejects duplicates and off-grid directions") {
  IndexDataset data;
  data.add(obs(0, 45, Phase::Test, 0.5));
  CHECK_THROWS_AS(data.add(obs(0, 45, Phase::Test, 0.7)), std::invalid_argument);
  CHECK_NOTHROW(data.add(obs(0, 45, Phase::Baseline, 0.1)));
  CHECK_THROWS_AS(data.add(obs(0, 30, Phase::Test, 0.5)), std::invalid_argument);
  CHECK(data.value(0, 45, Phase::Test) == 0.5);
  CHECK_THROWS_AS((void)data.value(90, 45, Phase::Test), MissingDataError);
}

TEST_CASE("dataset fingerprint is order-independent and content-sensitive") {
  IndexDataset a, b;
  a.add(obs(0, 0, Phase::Test, 0.1));
  a.add(obs(0, 45, Phase::Test, 0.2));
  b.add(obs(0, 45, Phase::Test, 0.2));
  b.add(obs(0, 0, Phase::Test, 0.1));
  CHECK(a.fingerprint() == b.fingerprint());
  IndexDataset c;
  c.add(obs(0, 0, Phase::Test, 0.1));
  c.add(obs(0, 45, Phase::Test, 0.2000001));
  CHECK(a.fingerprint() != c.fingerprint());
}

TEST_CASE("group_means aggregates repetitions") {
  std::vector<AdaptationIndex> indices = {
      {0.4, 90.0, Phase::Test, 45.0},
      {0.6, 90.0, Phase::Test, 45.0},
      {0.1, 90.0, Phase::Baseline, 45.0},
  };
  const auto data = IndexDataset::group_means(indices);
  CHECK(data.rows().size() == 2);
  CHECK(data.value(45, 90, Phase::Test) == doctest::Approx(0.5));
  CHECK(data.value(45, 90, Phase::Baseline) == doctest::Approx(0.1));
}

TEST_CASE("simplex minimizes quadratics and Rosenbrock inside bounds") {
  auto quad = [](const std::vector<double>& x) {
    const double a = x[0] - 0.3, b = x[1] + 1.2;
    return 3.0 * a * a + 0.02 * b * b;
  };
  const auto r = multi_start_simplex(quad, {-2, -2}, {2, 2}, 6, 4000, 1e-12, 9);
  CHECK(r.best.x[0] == doctest::Approx(0.3).epsilon(1e-5));
  CHECK(r.best.x[1] == doctest::Approx(-1.2).epsilon(1e-4));
  CHECK(r.converged);

  auto rosen = [](const std::vector<double>& x) {
    const double a = 1 - x[0], b = x[1] - x[0] * x[0];
    return a * a + 100 * b * b;
  };
  const auto r2 = multi_start_simplex(rosen, {-2, -2}, {2, 2}, 6, 5000, 1e-14, 1);
  CHECK(r2.best.f < 1e-10);
}

TEST_CASE("profiled NLL algebra") {
  // doubling all residuals scales SSE by 4 and adds n ln 2 to the NLL
  const std::size_t n = 16;
  const double sse = 0.08;
  CHECK(profiled_nll(4.0 * sse, n) ==
        doctest::Approx(profiled_nll(sse, n) + n * std::log(2.0)).epsilon(1e-12));
  // perfect fit hits the SSE floor instead of diverging
  CHECK(std::isfinite(profiled_nll(0.0, 8)));
  CHECK(profiled_nll(0.0, 8) == profiled_nll(1e-13, 8));
  // direct evaluation at the spec's example size
  const double expected = 0.5 * 8.0 * (1.0 + std::log(2.0 * kPi * 0.08 / 8.0));
  CHECK(profiled_nll(0.08, 8) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("AICc formula and small-sample behavior") {
  CHECK(aicc(12.5, 0, 10) == doctest::Approx(2.0 * 12.5).epsilon(1e-12));
  // equal NLL: fewer parameters win
  CHECK(aicc(-30.0, 18, 64) < aicc(-30.0, 24, 64));
  // large-n limit approaches plain AIC
  CHECK(aicc(5.0, 6, 100000000) == doctest::Approx(aic(5.0, 6)).epsilon(1e-6));
  CHECK_THROWS_AS((void)aicc(1.0, 10, 11), SmallSampleError);
  CHECK_THROWS_AS((void)aicc(1.0, 10, 10), SmallSampleError);
  // hand-computed values: 2*10 + 6 + 24/16, and 48 + 1200/39
  CHECK(aicc(10.0, 3, 20) == doctest::Approx(27.5).epsilon(1e-12));
  CHECK(aicc(0.0, 24, 64) == doctest::Approx(78.76923076923077).epsilon(1e-12));
}

TEST_CASE("NLL and SSE minimization pick the same parameter") {
  // 1-parameter family: predictions c * shape; scan both objectives
  const std::vector<double> shape = {0.1, 0.5, 1.0, 0.5, 0.1};
  const std::vector<double> target = {0.13, 0.62, 1.21, 0.58, 0.14};
  double best_sse_c = 0, best_nll_c = 0, best_sse = 1e30, best_nll = 1e30;
  for (double c = 0.0; c <= 2.0; c += 1e-4) {
    double sse = 0.0;
    for (std::size_t i = 0; i < shape.size(); ++i) {
      const double r = c * shape[i] - target[i];
      sse += r * r;
    }
    if (sse < best_sse) {
      best_sse = sse;
      best_sse_c = c;
    }
    const double nll = profiled_nll(sse, shape.size());
    if (nll < best_nll) {
      best_nll = nll;
      best_nll_c = c;
    }
  }
  CHECK(best_sse_c == best_nll_c);
}

TEST_CASE("standard fit recovers noiseless Gaussian data") {
  const auto data = gaussian_data(0.9, 35.0, 10.0);
  FitOptions options;
  options.seed = 13;
  const FitResult fit = fit_standard(data, options);
  CHECK(fit.k == 24);
  CHECK(fit.n == 64);
  CHECK(fit.groups.size() == 8);
  for (const auto& g : fit.groups) {
    CHECK(g.amplitude == doctest::Approx(0.9).epsilon(0.011));
    CHECK(g.sigma_deg == doctest::Approx(35.0).epsilon(0.03));
    CHECK(std::abs(g.mu_deg - 10.0) < 1.0);
  }
  CHECK(fit.rmse < 1e-5);
}

TEST_CASE("standard fits are deterministic given data, seed and options") {
  const auto data = gaussian_data(0.8, 30.0, -5.0);
  FitOptions options;
  options.seed = 3;
  const FitResult a = fit_standard(data, options);
  const FitResult b = fit_standard(data, options);
  for (std::size_t i = 0; i < a.groups.size(); ++i) {
    CHECK(a.groups[i].amplitude == b.groups[i].amplitude);
    CHECK(a.groups[i].sigma_deg == b.groups[i].sigma_deg);
    CHECK(a.groups[i].mu_deg == b.groups[i].mu_deg);
  }
  CHECK(a.nll == b.nll);
}

TEST_CASE("all-zero data drives the amplitude to zero and is flagged") {
  IndexDataset data;
  for (double g : standard_directions())
    for (double d : standard_directions()) data.add(obs(g, d, Phase::Test, 0.0));
  FitOptions options;
  options.seed = 2;
  const FitResult fit = fit_standard(data, options);
  for (const auto& g : fit.groups) CHECK(g.amplitude < 1e-3);
  CHECK_FALSE(fit.notes.empty());
}

TEST_CASE("standard fit is covariant under a global rotation of directions") {
  const auto data = gaussian_data(0.85, 28.0, 12.0);
  IndexDataset rotated;
  for (const auto& r : data.rows())
    rotated.add(obs(wrap_deg(r.group_deg + 45.0), wrap_deg(r.direction_deg + 45.0),
                    r.phase, r.index));
  FitOptions options;
  options.seed = 17;
  const FitResult base = fit_standard(data, options);
  const FitResult rot = fit_standard(rotated, options);
  for (const auto& g : base.groups) {
    const auto& match = rot.group(wrap_deg(g.group_deg + 45.0));
    CHECK(match.amplitude == doctest::Approx(g.amplitude).epsilon(1e-6));
    CHECK(match.sigma_deg == doctest::Approx(g.sigma_deg).epsilon(1e-5));
    CHECK(match.mu_deg == doctest::Approx(g.mu_deg).epsilon(1e-4));
  }
}

TEST_CASE("baseline-aware standard fit subtracts measured baselines") {
  IndexDataset data = gaussian_data(0.9, 35.0, 0.0);
  IndexDataset with_base;
  for (const auto& r : data.rows())
    with_base.add(obs(r.group_deg, r.direction_deg, Phase::Test, r.index + 0.12));
  for (double g : standard_directions())
    for (double d : standard_directions())
      with_base.add(obs(g, d, Phase::Baseline, 0.12));
  FitOptions options;
  options.seed = 5;
  const FitResult fit = fit_standard(with_base, options);
  for (const auto& g : fit.groups)
    CHECK(g.amplitude == doctest::Approx(0.9).epsilon(0.011));
}

TEST_CASE("impedance predictions superpose base and tuned readout") {
  const FitContext ctx = curved_context(1e-3);
  const ImpedanceScaling scaling{0.5, 0.3};
  // response anchors per direction
  for (double dir : {45.0, 270.0}) {
    IndexDataset one;
    one.add(obs(dir, dir, Phase::Test, 0.0));
    auto predict_at = [&](double amplitude) {
      const std::vector<GroupRepresentation> g{{dir, amplitude, 30.0, 0.0}};
      return predict_impedance(g, scaling, one, ctx)[0];
    };
    const double base = predict_at(0.0);
    const double full = predict_at(1.0);
    for (double tune : {0.4, 0.7}) {
      const double exact = predict_at(tune);
      const double superposed = base + tune * (full - base);
      CHECK(std::abs(superposed - exact) < 0.02);
    }
  }
}

TEST_CASE("impedance fit recovers synthetic impedance data") {
  const FitContext ctx = curved_context(1e-3);
  std::vector<GroupRepresentation> truth;
  for (double g : standard_directions()) truth.push_back({g, 0.9, 35.0, 0.0});
  const ImpedanceScaling truth_scaling{0.7278, 0.0723};

  IndexDataset keys;
  for (double g : standard_directions())
    for (double d : standard_directions()) keys.add(obs(g, d, Phase::Test, 0.0));
  const auto values = predict_impedance(truth, truth_scaling, keys, ctx);
  IndexDataset data;
  for (std::size_t i = 0; i < keys.rows().size(); ++i) {
    auto o = keys.rows()[i];
    o.index = values[i];
    data.add(o);
  }

  FitOptions options;
  options.seed = 23;
  options.restarts = 3;
  const FitResult fit = fit_impedance(data, options, ctx);
  CHECK(fit.k == 18);
  CHECK(fit.n == 64);
  for (const auto& g : fit.groups) {
    CHECK(std::abs(g.amplitude - 0.9) < 0.05);
    CHECK(std::abs(g.sigma_deg - 35.0) < 5.0);
    CHECK(g.mu_deg == 0.0);
  }
  CHECK(std::abs(fit.scaling.alpha_k - 0.7278) < 0.1);
  CHECK(fit.rmse < 0.02);
}

TEST_CASE("baseline impedance fit recovers the feedback gains") {
  const FitContext ctx = curved_context(1e-3);
  IndexDataset keys;
  for (double d : standard_directions()) keys.add(obs(d, d, Phase::Baseline, 0.0));
  const std::vector<GroupRepresentation> none;
  const auto values = predict_impedance(none, ImpedanceScaling{0.7278, 0.0723},
                                        keys, ctx);
  IndexDataset data;
  for (std::size_t i = 0; i < keys.rows().size(); ++i) {
    auto o = keys.rows()[i];
    o.index = values[i];
    data.add(o);
  }
  FitOptions options;
  options.seed = 29;
  options.restarts = 4;
  const FitResult fit = fit_impedance_baseline(data, options, ctx);
  CHECK(fit.k == 2);
  CHECK(fit.n == 8);
  CHECK(std::abs(fit.scaling.alpha_k - 0.7278) < 0.02);
  CHECK(std::abs(fit.scaling.alpha_b - 0.0723) < 0.1);
  CHECK(fit.rmse < 0.005);
}

TEST_CASE("model comparison ranks by AICc and guards the dataset") {
  const auto data = gaussian_data(0.9, 35.0, 10.0);
  FitOptions options;
  options.seed = 31;
  FitResult good = fit_standard(data, options);
  FitResult worse = good;
  worse.model = ModelKind::Impedance;
  worse.nll = good.nll + 40.0;
  worse.k = 18;
  worse.aicc = aicc(worse.nll, worse.k, worse.n);

  const auto cmp = compare_models({good, worse}, data, nullptr);
  CHECK(cmp.winner == ModelKind::Standard);
  CHECK(cmp.rows.front().delta_aicc == 0.0);
  CHECK(cmp.rows.back().delta_aicc > 0.0);

  SUBCASE("identical fits tie at zero delta") {
    const auto tie = compare_models({good, good}, data, nullptr);
    CHECK(tie.rows[0].aicc == tie.rows[1].aicc);
    CHECK(tie.rows[1].delta_aicc == 0.0);
  }
  SUBCASE("fits from a different dataset are rejected") {
    const auto other = gaussian_data(0.8, 30.0, 0.0);
    CHECK_THROWS_AS((void)compare_models({good}, other, nullptr),
                    std::invalid_argument);
  }
  SUBCASE("a strictly better NLL with fewer parameters wins") {
    FitResult dominant = good;
    dominant.model = ModelKind::Impedance;
    dominant.k = 18;
    dominant.nll = good.nll - 1.0;
    dominant.aicc = aicc(dominant.nll, dominant.k, dominant.n);
    const auto c = compare_models({good, dominant}, data, nullptr);
    CHECK(c.winner == ModelKind::Impedance);
  }
}

TEST_CASE("model recovery sanity on a small run") {
  const FitContext ctx = curved_context(1e-3);
  FitOptions options;
  options.restarts = 2;
  options.max_iterations = 300;
  const auto report = model_recovery_study(1, 0.05, 77, options, ctx);
  CHECK(report.cases.size() == 2);
  CHECK(report.standard_recovered == 1);
  CHECK(report.impedance_recovered == 1);
}
