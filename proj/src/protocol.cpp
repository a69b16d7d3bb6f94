#include "fieldgen/protocol.hpp"

#include <algorithm>
#include <map>
#include <random>
#include <sstream>

namespace fieldgen {

std::vector<double> standard_directions() {
  return {0.0, 45.0, 90.0, 135.0, 180.0, 225.0, 270.0, 315.0};
}

namespace {

// Unbiased bounded draw + Fisher-Yates, so schedules are reproducible
// across standard library implementations.
std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t n) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % n;
}

template <typename T>
void shuffle(std::vector<T>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i > 1; --i)
    std::swap(v[i - 1], v[bounded(rng, i)]);
}

TrialSpec make_trial(double direction_deg, TrialKind kind, bool feedback,
                     const SimSetup& setup, const ProtocolOptions& opt) {
  TrialSpec spec;
  spec.direction_deg = direction_deg;
  spec.kind = kind;
  spec.feedback = feedback;
  spec.controller = opt.controller;
  if (phase_of(kind) == Phase::Baseline) {
    // naive state: no field estimate yet, baseline impedance
    spec.controller.rep.amplitude = 0.0;
    spec.controller.scaling = opt.baseline_scaling;
  }
  spec.duration_s = opt.duration_s;
  spec.step_s = opt.step_s;
  spec.log_rate_hz = opt.log_rate_hz;
  if (is_clamp(kind)) {
    spec.field.kind = FieldKind::Clamp;
    spec.field.alpha = opt.field_alpha;
    align_channel(spec, setup);
  } else if (kind == TrialKind::AdaptField || kind == TrialKind::TrainField) {
    spec.field.kind = FieldKind::Curl;
    spec.field.alpha = opt.field_alpha;
  } else {
    spec.field.kind = FieldKind::Null;
  }
  return spec;
}

}  // namespace

Protocol build_protocol(double group_deg, std::uint64_t seed,
                        const SimSetup& setup, const ProtocolOptions& options) {
  const auto dirs = standard_directions();
  const bool valid = std::any_of(dirs.begin(), dirs.end(), [&](double d) {
    return std::abs(wrap_deg(group_deg - d)) < 1e-9;
  });
  if (!valid) {
    std::ostringstream oss;
    oss << "build_protocol: group direction " << group_deg
        << " is not one of the eight standard directions";
    throw std::invalid_argument(oss.str());
  }

  ProtocolOptions opt = options;
  opt.controller.rep.theta_train_deg = group_deg;

  std::seed_seq seq{seed, static_cast<std::uint64_t>(
                              std::llround(wrap_deg(group_deg) * 100.0) + 54000)};
  std::mt19937_64 rng(seq);

  Protocol protocol;
  protocol.group_deg = group_deg;
  protocol.seed = seed;
  protocol.trials.reserve(548);

  auto push_block = [&](std::vector<TrialSpec>& block, int number) {
    for (auto& spec : block) {
      spec.block = number;
      spec.trial_index = static_cast<int>(protocol.trials.size());
      protocol.trials.push_back(std::move(spec));
    }
  };

  // Block 1: 26 trials per target, 3 of them no-feedback clamps.
  {
    std::vector<TrialSpec> block;
    block.reserve(208);
    for (double dir : dirs) {
      for (int i = 0; i < 23; ++i)
        block.push_back(make_trial(dir, TrialKind::BaselineNull, true, setup, opt));
      for (int i = 0; i < 3; ++i)
        block.push_back(make_trial(dir, TrialKind::BaselineClamp, false, setup, opt));
    }
    shuffle(block, rng);
    push_block(block, 1);
  }

  // Blocks 2-3: training target only; 45 field + feedback, 15 field
  // feedback-extinguished, 5 no-feedback clamps.
  for (int adapt_block : {2, 3}) {
    std::vector<TrialSpec> block;
    block.reserve(65);
    for (int i = 0; i < 45; ++i)
      block.push_back(make_trial(group_deg, TrialKind::AdaptField, true, setup, opt));
    for (int i = 0; i < 15; ++i)
      block.push_back(make_trial(group_deg, TrialKind::AdaptField, false, setup, opt));
    for (int i = 0; i < 5; ++i)
      block.push_back(make_trial(group_deg, TrialKind::AdaptClamp, false, setup, opt));
    shuffle(block, rng);
    push_block(block, adapt_block);
  }

  // Block 4: strict train/test alternation starting with the train
  // target. Test-target trials are all no-feedback clamps.
  {
    std::vector<TrialSpec> train;
    train.reserve(105);
    for (int i = 0; i < 53; ++i)
      train.push_back(make_trial(group_deg, TrialKind::TrainField, true, setup, opt));
    for (int i = 0; i < 26; ++i)
      train.push_back(make_trial(group_deg, TrialKind::TrainField, false, setup, opt));
    for (int i = 0; i < 26; ++i)
      train.push_back(make_trial(group_deg, TrialKind::TrainClamp, false, setup, opt));
    shuffle(train, rng);

    std::vector<TrialSpec> test;
    test.reserve(105);
    for (double dir : dirs) {
      if (std::abs(wrap_deg(dir - group_deg)) < 1e-9) continue;
      for (int i = 0; i < 15; ++i)
        test.push_back(make_trial(dir, TrialKind::TestClamp, false, setup, opt));
    }
    shuffle(test, rng);

    std::vector<TrialSpec> block;
    block.reserve(210);
    for (std::size_t i = 0; i < 105; ++i) {
      block.push_back(std::move(train[i]));
      block.push_back(std::move(test[i]));
    }
    push_block(block, 4);
  }

  return protocol;
}

namespace {

int dir_key(double deg) { return static_cast<int>(std::llround(wrap_deg(deg))); }

struct Violations {
  std::vector<std::string> list;
  template <typename... Args>
  void expect(bool ok, Args&&... parts) {
    if (ok) return;
    std::ostringstream oss;
    (oss << ... << parts);
    list.push_back(oss.str());
  }
};

}  // namespace

AuditReport audit_protocol(const Protocol& protocol) {
  Violations v;
  const auto& trials = protocol.trials;
  v.expect(trials.size() == 548, "total trial count ", trials.size(), " != 548");

  std::map<int, std::vector<const TrialSpec*>> blocks;
  for (const auto& t : trials) blocks[t.block].push_back(&t);
  v.expect(blocks.size() == 4, "expected 4 blocks, found ", blocks.size());

  for (std::size_t i = 0; i < trials.size(); ++i)
    v.expect(trials[i].trial_index == static_cast<int>(i),
             "trial_index out of order at position ", i);

  const int group = dir_key(protocol.group_deg);

  for (const auto& t : trials)
    v.expect(dir_key(t.direction_deg) % 45 == 0, "trial ", t.trial_index,
             " direction off the 45-degree grid");

  // field kind consistent with the trial kind; clamp channels aligned
  for (const auto& t : trials) {
    const bool clamp_ok = !is_clamp(t.kind) || t.field.kind == FieldKind::Clamp;
    const bool curl_ok = (t.kind != TrialKind::AdaptField &&
                          t.kind != TrialKind::TrainField) ||
                         t.field.kind == FieldKind::Curl;
    const bool null_ok =
        t.kind != TrialKind::BaselineNull || t.field.kind == FieldKind::Null;
    v.expect(clamp_ok && curl_ok && null_ok, "trial ", t.trial_index,
             " field kind inconsistent with trial kind ", to_string(t.kind));
    if (is_clamp(t.kind) && t.field.kind == FieldKind::Clamp) {
      const Vec2 axis = t.field.channel.axis();
      const double axis_deg = rad2deg(std::atan2(axis.y(), axis.x()));
      v.expect(std::abs(wrap_deg(axis_deg - t.direction_deg)) < 1e-6, "trial ",
               t.trial_index, " channel axis misaligned with reach direction");
    }
  }

  if (blocks.count(1)) {
    const auto& b = blocks[1];
    v.expect(b.size() == 208, "block 1 size ", b.size(), " != 208");
    std::map<int, int> per_target, clamps;
    for (const auto* t : b) {
      ++per_target[dir_key(t->direction_deg)];
      if (t->kind == TrialKind::BaselineClamp) {
        ++clamps[dir_key(t->direction_deg)];
        v.expect(!t->feedback, "block 1 clamp trial ", t->trial_index,
                 " should have feedback extinguished");
      } else {
        v.expect(t->kind == TrialKind::BaselineNull && t->feedback,
                 "block 1 trial ", t->trial_index,
                 " should be a null trial with feedback");
      }
    }
    v.expect(per_target.size() == 8, "block 1 covers ", per_target.size(),
             " targets != 8");
    for (const auto& [dir, n] : per_target)
      v.expect(n == 26, "block 1 target ", dir, ": ", n, " trials != 26");
    int clamp_total = 0;
    for (const auto& [dir, n] : clamps) {
      clamp_total += n;
      v.expect(n == 3, "block 1 target ", dir, ": ", n, " clamp trials != 3");
    }
    v.expect(clamp_total == 24, "block 1 clamp total ", clamp_total, " != 24");
  }

  for (int bn : {2, 3}) {
    if (!blocks.count(bn)) continue;
    const auto& b = blocks[bn];
    v.expect(b.size() == 65, "block ", bn, " size ", b.size(), " != 65");
    int field = 0, field_nofb = 0, clamp = 0;
    for (const auto* t : b) {
      v.expect(dir_key(t->direction_deg) == group, "block ", bn, " trial ",
               t->trial_index, " not at the training target");
      if (t->kind == TrialKind::AdaptField) {
        ++field;
        if (!t->feedback) ++field_nofb;
      } else if (t->kind == TrialKind::AdaptClamp) {
        ++clamp;
        v.expect(!t->feedback, "block ", bn, " clamp trial ", t->trial_index,
                 " should have feedback extinguished");
      } else {
        v.expect(false, "block ", bn, " trial ", t->trial_index,
                 " has unexpected kind ", to_string(t->kind));
      }
    }
    v.expect(field == 60, "block ", bn, " field trials ", field, " != 60");
    v.expect(field_nofb == 15, "block ", bn,
             " feedback-extinguished field trials ", field_nofb, " != 15");
    v.expect(clamp == 5, "block ", bn, " clamp trials ", clamp, " != 5");
  }

  if (blocks.count(4)) {
    const auto& b = blocks[4];
    v.expect(b.size() == 210, "block 4 size ", b.size(), " != 210");
    std::map<int, int> test_clamps;
    int train_field_fb = 0, train_field_nofb = 0, train_clamp = 0;
    for (std::size_t i = 0; i < b.size(); ++i) {
      const auto* t = b[i];
      const bool train_pos = i % 2 == 0;  // odd 1-based positions
      if (train_pos) {
        v.expect(dir_key(t->direction_deg) == group, "block 4 position ", i + 1,
                 " should be the train target");
        if (t->kind == TrialKind::TrainField) {
          t->feedback ? ++train_field_fb : ++train_field_nofb;
        } else if (t->kind == TrialKind::TrainClamp) {
          ++train_clamp;
          v.expect(!t->feedback, "block 4 train clamp ", t->trial_index,
                   " should have feedback extinguished");
        } else {
          v.expect(false, "block 4 train-position trial ", t->trial_index,
                   " has kind ", to_string(t->kind));
        }
      } else {
        v.expect(dir_key(t->direction_deg) != group, "block 4 position ", i + 1,
                 " should be a test target");
        v.expect(t->kind == TrialKind::TestClamp && !t->feedback,
                 "block 4 test-position trial ", t->trial_index,
                 " should be a no-feedback clamp");
        ++test_clamps[dir_key(t->direction_deg)];
      }
    }
    v.expect(test_clamps.size() == 7, "block 4 covers ", test_clamps.size(),
             " test targets != 7");
    for (const auto& [dir, n] : test_clamps)
      v.expect(n == 15, "block 4 test target ", dir, ": ", n, " clamps != 15");
    v.expect(train_field_fb == 53, "block 4 train field+feedback ",
             train_field_fb, " != 53");
    v.expect(train_field_nofb == 26, "block 4 train field no-feedback ",
             train_field_nofb, " != 26");
    v.expect(train_clamp == 26, "block 4 train clamps ", train_clamp, " != 26");
  }

  return AuditReport{std::move(v.list)};
}

}  // namespace fieldgen
