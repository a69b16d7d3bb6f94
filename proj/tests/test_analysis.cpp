#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "fieldgen/analysis.hpp"

using namespace fieldgen;

namespace {

// clamp-trial record with prescribed sampled positions and forces
TrialRecord synthetic_clamp(const std::vector<Vec2>& positions,
                            const std::vector<Vec2>& forces, double rate,
                            const Vec2& origin, const Vec2& target) {
  TrialRecord rec;
  rec.spec.kind = TrialKind::TestClamp;
  rec.spec.field.kind = FieldKind::Clamp;
  rec.spec.field.channel.origin = origin;
  rec.spec.field.channel.target = target;
  rec.spec.log_rate_hz = rate;
  rec.spec.direction_deg = rad2deg(std::atan2((target - origin).y(),
                                              (target - origin).x()));
  for (std::size_t i = 0; i < positions.size(); ++i) {
    rec.t.push_back(static_cast<double>(i) / rate);
    rec.p.push_back(positions[i]);
    rec.v.push_back(Vec2::Zero());
    rec.f.push_back(i < forces.size() ? forces[i] : Vec2::Zero());
    rec.q.push_back(Vec2::Zero());
    rec.qd.push_back(Vec2::Zero());
  }
  return rec;
}

// minimum-jerk positions along +y over [0, n/rate]
std::vector<Vec2> minjerk_path(double D, double T, double rate, int n,
                               double lateral_peak = 0.0) {
  std::vector<Vec2> p;
  const MinJerkProfile prof{T};
  for (int i = 0; i < n; ++i) {
    const double t = i / rate;
    const double s = prof.s(t);
    p.emplace_back(-lateral_peak * std::sin(kPi * s), D * s);
  }
  return p;
}

}  // namespace

TEST_CASE("filter design hits the Butterworth landmarks") {
  const auto filt = ButterworthLowpass::design(50.0, 1000.0);
  CHECK(filt.magnitude(0.0, 1000.0) == doctest::Approx(1.0).epsilon(1e-9));
  const double db = 20.0 * std::log10(filt.magnitude(50.0, 1000.0));
  CHECK(db == doctest::Approx(-3.0103).epsilon(0.17));  // within 0.5 dB
  CHECK(filt.magnitude(400.0, 1000.0) < 0.01);
  CHECK_THROWS_AS((void)ButterworthLowpass::design(600.0, 1000.0),
                  std::invalid_argument);
}

TEST_CASE("constant series filter to themselves and differentiate to zero") {
  const std::vector<Vec2> pos(64, Vec2(0.13, -0.07));
  const auto vel = filtered_velocity(pos, 1000.0);
  for (const auto& v : vel) CHECK(v.norm() < 1e-12);

  const auto filt = ButterworthLowpass::design(50.0, 1000.0);
  std::vector<double> constant(64, 3.7);
  for (double y : filt.filtfilt(constant)) CHECK(y == doctest::Approx(3.7).epsilon(1e-12));
}

TEST_CASE("sinusoid velocity amplitude matches the analytic derivative") {
  const double rate = 1000.0, f = 5.0, amp = 0.03;
  std::vector<Vec2> pos;
  for (int i = 0; i < 2000; ++i) {
    const double t = i / rate;
    pos.emplace_back(amp * std::sin(2.0 * kPi * f * t), 0.0);
  }
  const auto vel = filtered_velocity(pos, rate);
  double peak = 0.0;
  for (std::size_t i = 500; i < 1500; ++i)  // away from the edges
    peak = std::max(peak, std::abs(vel[i].x()));
  CHECK(peak == doctest::Approx(2.0 * kPi * f * amp).epsilon(0.01));
}

TEST_CASE("zero-phase filtering preserves the peak of a symmetric pulse") {
  const auto filt = ButterworthLowpass::design(50.0, 1000.0);
  std::vector<double> pulse(201, 0.0);
  for (int i = 0; i < 201; ++i) {
    const double u = (i - 100) / 25.0;
    pulse[static_cast<std::size_t>(i)] = std::exp(-u * u);
  }
  const auto smoothed = filt.filtfilt(pulse);
  std::size_t argmax = 0;
  for (std::size_t i = 1; i < smoothed.size(); ++i)
    if (smoothed[i] > smoothed[argmax]) argmax = i;
  CHECK(std::abs(static_cast<long>(argmax) - 100L) <= 1);
}

TEST_CASE("velocity estimation rejects bad inputs") {
  const std::vector<Vec2> short_series(10, Vec2::Zero());
  CHECK_THROWS_AS((void)filtered_velocity(short_series, 1000.0),
                  TooShortSeriesError);
  const std::vector<Vec2> ok(32, Vec2::Zero());
  CHECK_THROWS_AS((void)filtered_velocity(ok, 80.0), std::invalid_argument);
}

TEST_CASE("movement window brackets the reach") {
  const double rate = 1000.0, D = 0.10, T = 0.375;
  const auto pos = minjerk_path(D, T, rate, 500);
  const auto vel = filtered_velocity(pos, rate);
  const auto win = movement_window(vel, rate);

  // analytic start: first time the quintic speed exceeds 5 cm/s
  // (bisection on the closed-form speed profile)
  const MinJerkProfile prof{T};
  double lo = 0.0, hi = T / 2.0;
  for (int i = 0; i < 60; ++i) {
    const double mid = (lo + hi) / 2.0;
    (D * prof.sdot(mid) < kStartSpeed ? lo : hi) = mid;
  }
  CHECK(win.t_start == doctest::Approx(hi).epsilon(0.1));
  CHECK(win.t_start < win.t_stop);

  const std::vector<Vec2> still(100, Vec2::Zero());
  CHECK_THROWS_AS((void)movement_window(filtered_velocity(still, rate), rate),
                  NoMovementError);
}

TEST_CASE("perpendicular error of constructed paths") {
  const double rate = 1000.0, D = 0.10, T = 0.375;
  const Vec2 origin = Vec2::Zero(), target(0.0, D);

  SUBCASE("straight path has zero error") {
    const auto rec = synthetic_clamp(minjerk_path(D, T, rate, 500), {}, rate,
                                     origin, target);
    CHECK(std::abs(perpendicular_error(rec, target)) < 1e-6);
  }
  SUBCASE("a +4 mm CCW half-sine bump reads +4 mm") {
    const auto rec = synthetic_clamp(minjerk_path(D, T, rate, 500, 0.004), {},
                                     rate, origin, target);
    CHECK(perpendicular_error(rec, target) == doctest::Approx(4.0).epsilon(0.025));
  }
  SUBCASE("mirroring the path negates the error exactly") {
    auto bent = minjerk_path(D, T, rate, 500, 0.004);
    auto mirrored = bent;
    for (auto& p : mirrored) p.x() = -p.x();
    const auto rec_a = synthetic_clamp(bent, {}, rate, origin, target);
    const auto rec_b = synthetic_clamp(mirrored, {}, rate, origin, target);
    CHECK(perpendicular_error(rec_a, target) ==
          doctest::Approx(-perpendicular_error(rec_b, target)).epsilon(1e-9));
  }
}

TEST_CASE("adaptation index reads the force-to-ideal regression slope") {
  const double rate = 1000.0, D = 0.10, T = 0.375, alpha = 15.0;
  const Vec2 origin = Vec2::Zero(), target(0.0, D);
  const auto pos = minjerk_path(D, T, rate, 500);
  const auto vel = filtered_velocity(pos, rate);
  const Vec2 u = (target - origin).normalized();
  const Vec2 n = rot90_ccw(u);

  auto forces_scaled = [&](double scale) {
    std::vector<Vec2> f;
    for (const auto& v : vel) f.push_back(scale * alpha * u.dot(v) * n);
    return f;
  };

  SUBCASE("forces matching the ideal profile give slope one") {
    const auto rec = synthetic_clamp(pos, forces_scaled(1.0), rate, origin, target);
    CHECK(adaptation_index(rec, alpha).value == doctest::Approx(1.0).epsilon(1e-9));
  }
  SUBCASE("no wall forces give slope zero") {
    const auto rec = synthetic_clamp(pos, forces_scaled(0.0), rate, origin, target);
    CHECK(adaptation_index(rec, alpha).value == doctest::Approx(0.0).epsilon(1e-12));
  }
  SUBCASE("opposed forces give slope minus one") {
    const auto rec = synthetic_clamp(pos, forces_scaled(-1.0), rate, origin, target);
    CHECK(adaptation_index(rec, alpha).value == doctest::Approx(-1.0).epsilon(1e-9));
  }
  SUBCASE("the index is scale-equivariant in the measured forces") {
    std::mt19937_64 rng(6);
    std::normal_distribution<double> noise(0.0, 0.3);
    auto forces = forces_scaled(0.6);
    for (auto& f : forces) f += noise(rng) * n;
    const auto base = synthetic_clamp(pos, forces, rate, origin, target);
    const double idx = adaptation_index(base, alpha).value;
    for (auto& f : forces) f *= 2.5;
    const auto scaled = synthetic_clamp(pos, forces, rate, origin, target);
    CHECK(adaptation_index(scaled, alpha).value ==
          doctest::Approx(2.5 * idx).epsilon(1e-9));
  }
  SUBCASE("a constant force offset lands in the intercept, not the slope") {
    auto forces = forces_scaled(0.7);
    for (auto& f : forces) f += 0.8 * n;
    const auto rec = synthetic_clamp(pos, forces, rate, origin, target);
    CHECK(adaptation_index(rec, alpha).value == doctest::Approx(0.7).epsilon(1e-6));
  }
  SUBCASE("lateral-only motion degenerates the regression") {
    std::vector<Vec2> lateral;
    for (const auto& p : minjerk_path(D, T, rate, 500)) lateral.emplace_back(p.y(), 0.0);
    const auto rec = synthetic_clamp(lateral, {}, rate, origin, target);
    CHECK_THROWS_AS((void)adaptation_index(rec, alpha), DegenerateRegressionError);
  }
  SUBCASE("non-clamp records are rejected") {
    auto rec = synthetic_clamp(pos, {}, rate, origin, target);
    rec.spec.kind = TrialKind::AdaptField;
    CHECK_THROWS_AS((void)adaptation_index(rec, alpha), std::invalid_argument);
  }
}

namespace {

std::vector<AdaptationIndex> gaussian_dataset(double amplitude, double sigma,
                                              int reps, double noise_sd,
                                              std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, noise_sd);
  std::vector<AdaptationIndex> out;
  for (double g : {0.0, 45.0, 90.0, 135.0, 180.0, 225.0, 270.0, 315.0}) {
    for (double d : {0.0, 45.0, 90.0, 135.0, 180.0, 225.0, 270.0, 315.0}) {
      const double delta = wrap_deg(d - g);
      const double value = amplitude * std::exp(-delta * delta / (2 * sigma * sigma));
      for (int r = 0; r < reps; ++r) {
        out.push_back({value + (noise_sd > 0 ? noise(rng) : 0.0), d, Phase::Test, g});
        out.push_back({0.05, d, Phase::Baseline, g});
      }
    }
  }
  return out;
}

}  // namespace

TEST_CASE("generalization curves summarize test-phase indices") {
  const auto data = gaussian_dataset(0.9, 35.0, 3, 0.0, 1);

  const auto intra = intra_curve(data, 90.0);
  CHECK(intra.points.size() == 8);
  CHECK(intra.at_offset(0.0).mean == doctest::Approx(0.9));
  CHECK(intra.at_offset(45.0).mean ==
        doctest::Approx(0.9 * std::exp(-45.0 * 45.0 / (2 * 35.0 * 35.0))));
  CHECK(intra.at_offset(180.0).n == 3);
  CHECK(asymmetry(intra) == doctest::Approx(0.0).epsilon(1e-12));

  const auto inter = inter_curve(data, 90.0);
  CHECK(inter.at_offset(0.0).mean == doctest::Approx(intra.at_offset(0.0).mean));

  SUBCASE("baseline correction subtracts per-direction means") {
    const auto corrected = baseline_correct(intra, data);
    CHECK(corrected.baseline_corrected);
    for (const auto& pt : corrected.points) {
      const auto& raw = intra.at_offset(pt.offset_deg);
      CHECK(pt.mean == doctest::Approx(raw.mean - 0.05).epsilon(1e-12));
      CHECK(pt.sem == raw.sem);
    }
  }
  SUBCASE("baseline equal to the curve zeroes it") {
    std::vector<AdaptationIndex> self = data;
    for (auto& idx : self)
      if (idx.phase == Phase::Baseline) {
        const double delta = wrap_deg(idx.direction_deg - idx.group_deg);
        idx.value = 0.9 * std::exp(-delta * delta / (2 * 35.0 * 35.0));
      }
    const auto corrected = baseline_correct(intra_curve(self, 45.0), self);
    for (const auto& pt : corrected.points) CHECK(std::abs(pt.mean) < 1e-12);
  }
  SUBCASE("correction commutes with averaging over repetitions") {
    // subtract-then-mean equals mean-then-subtract for per-trial values
    const auto noisy = gaussian_dataset(0.9, 35.0, 5, 0.05, 3);
    std::vector<AdaptationIndex> pre_corrected = noisy;
    double baseline_mean = 0.05;  // constant in the synthetic set
    for (auto& idx : pre_corrected)
      if (idx.phase == Phase::Test) idx.value -= baseline_mean;
    const auto a = intra_curve(pre_corrected, 90.0);
    const auto b = baseline_correct(intra_curve(noisy, 90.0), noisy);
    for (const auto& pt : a.points)
      CHECK(pt.mean == doctest::Approx(b.at_offset(pt.offset_deg).mean).epsilon(1e-12));
  }
}

TEST_CASE("flat data gives flat curves and zero asymmetry") {
  std::vector<AdaptationIndex> flat;
  for (double g : {0.0, 45.0, 90.0, 135.0, 180.0, 225.0, 270.0, 315.0})
    for (double d : {0.0, 45.0, 90.0, 135.0, 180.0, 225.0, 270.0, 315.0})
      flat.push_back({0.0, d, Phase::Test, g});
  const auto curve = intra_curve(flat, 0.0);
  for (const auto& pt : curve.points) CHECK(pt.mean == 0.0);
  CHECK(asymmetry(curve) == 0.0);
  const auto inter = inter_curve(flat, 45.0);
  for (const auto& pt : inter.points) CHECK(pt.mean == 0.0);
}

TEST_CASE("asymmetry reads +45 minus -45 and negates with the data") {
  auto data = gaussian_dataset(0.9, 35.0, 1, 0.0, 1);
  for (auto& idx : data) {
    if (idx.phase != Phase::Test) continue;
    const double off = wrap_deg(idx.direction_deg - idx.group_deg);
    if (off == 45.0) idx.value = 0.4;
    if (off == -45.0) idx.value = 0.3;
  }
  const auto curve = intra_curve(data, 90.0);
  CHECK(asymmetry(curve) == doctest::Approx(0.1).epsilon(1e-12));
  for (auto& idx : data) idx.value = -idx.value;
  CHECK(asymmetry(intra_curve(data, 90.0)) == doctest::Approx(-0.1).epsilon(1e-12));
}

TEST_CASE("missing directions and baselines raise named errors") {
  auto data = gaussian_dataset(0.9, 35.0, 1, 0.0, 1);
  std::vector<AdaptationIndex> missing;
  for (const auto& idx : data)
    if (!(idx.phase == Phase::Test &&
          std::abs(wrap_deg(idx.direction_deg - 135.0)) < 1e-9))
      missing.push_back(idx);
  CHECK_THROWS_AS((void)intra_curve(missing, 0.0), MissingDataError);

  std::vector<AdaptationIndex> no_baseline;
  for (const auto& idx : data)
    if (idx.phase == Phase::Test) no_baseline.push_back(idx);
  const auto curve = intra_curve(no_baseline, 0.0);
  CHECK_THROWS_AS((void)baseline_correct(curve, no_baseline), MissingBaselineError);
}

TEST_CASE("simulated intra curve matches the generating representation") {
  // end-to-end: simulate clamp reaches for one group, analyze, compare
  // the curve against the representation's tuning profile
  SimSetup setup = default_setup();
  const double A = 0.85, sigma = 40.0, mu = 15.0, group = 90.0;
  std::vector<AdaptationIndex> indices;
  for (double d : {0.0, 45.0, 90.0, 135.0, 180.0, 225.0, 270.0, 315.0}) {
    TrialSpec spec;
    spec.direction_deg = d;
    spec.field.kind = FieldKind::Clamp;
    spec.kind = TrialKind::TestClamp;
    spec.controller.kind = ModelKind::Standard;
    spec.controller.rep.amplitude = A;
    spec.controller.rep.sigma_deg = sigma;
    spec.controller.rep.mu_deg = mu;
    spec.controller.rep.theta_train_deg = group;
    align_channel(spec, setup);
    indices.push_back(adaptation_index(simulate_trial(spec, setup), setup.alpha_true));
  }
  const auto curve = intra_curve(indices, group);
  RepresentationParams rep;
  rep.amplitude = A;
  rep.sigma_deg = sigma;
  rep.mu_deg = mu;
  rep.theta_train_deg = group;
  for (const auto& pt : curve.points) {
    const double expected =
        representation_strength(rep, pt.direction_deg, setup.alpha_true) /
        setup.alpha_true;
    CHECK(std::abs(pt.mean - expected) < 0.02);
  }
}

TEST_CASE("mirror symmetry ties inter curves to intra curves") {
  // identical representations across groups: the inter curve is the
  // intra curve read with the offset sign flipped
  const auto data = gaussian_dataset(0.85, 40.0, 2, 0.0, 5);
  const auto intra = intra_curve(data, 90.0);
  const auto inter = inter_curve(data, 90.0);
  for (const auto& pt : intra.points) {
    const double mirrored = pt.offset_deg == 180.0 ? 180.0 : -pt.offset_deg;
    CHECK(inter.at_offset(mirrored).mean == doctest::Approx(pt.mean).epsilon(1e-12));
  }
}
