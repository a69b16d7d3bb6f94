// fieldgen: simulate force-field reaching experiments, run the analysis
// pipeline, and fit/compare the two representation models.
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>

#include <CLI11.hpp>

#include "fieldgen/io.hpp"
#include "fieldgen/parallel.hpp"
#include "fieldgen/svg.hpp"

namespace fs = std::filesystem;
using namespace fieldgen;

namespace {

ExperimentConfig load_config(const std::string& path) {
  if (path.empty()) return ExperimentConfig::defaults();
  return ExperimentConfig::from_json_file(path);
}

std::vector<double> parse_groups(const std::string& group_flag) {
  if (group_flag == "all") return standard_directions();
  return {std::stod(group_flag)};
}

std::string group_tag(double g) {
  return std::to_string(static_cast<int>(std::llround(wrap_deg(g) < 0
                                                          ? wrap_deg(g) + 360.0
                                                          : wrap_deg(g))));
}

struct AnalysisProducts {
  std::vector<AdaptationIndex> indices;
  std::vector<GeneralizationCurve> curves;
  std::vector<AsymmetryRow> asymmetries;
};

/// Indices (clamp trials), perpendicular errors, and curves from a set
/// of simulated groups.
AnalysisProducts analyze_records(
    const std::map<int, std::vector<TrialRecord>>& by_group, double alpha_true,
    double reach_distance, std::ostream& pe_csv) {
  AnalysisProducts out;
  pe_csv << "group_deg,trial,block,kind,direction_deg,pe_mm\n";
  for (const auto& [group, records] : by_group) {
    for (const auto& rec : records) {
      // clamp trials carry the nominal target in the channel geometry
      const Vec2 pe_target =
          is_clamp(rec.spec.kind)
              ? rec.spec.field.channel.target
              : Vec2(rec.p.front() +
                     reach_distance * unit_from_deg(rec.spec.direction_deg));
      try {
        const double pe = perpendicular_error(rec, pe_target);
        pe_csv << group << ',' << rec.spec.trial_index << ',' << rec.spec.block
               << ',' << to_string(rec.spec.kind) << ','
               << rec.spec.direction_deg << ',' << pe << '\n';
      } catch (const NoMovementError&) {
        // trials that never exceed the start threshold carry no PE
      }
      if (!is_clamp(rec.spec.kind)) continue;
      out.indices.push_back(adaptation_index(rec, alpha_true));
    }
  }

  bool all_groups = by_group.size() == 8;
  for (const auto& [group, _] : by_group) {
    auto post = intra_curve(out.indices, group);
    auto corrected = baseline_correct(post, out.indices);
    out.asymmetries.push_back({CurveKind::Intra, false, post.anchor_deg,
                               asymmetry(post)});
    out.asymmetries.push_back({CurveKind::Intra, true, corrected.anchor_deg,
                               asymmetry(corrected)});
    out.curves.push_back(std::move(post));
    out.curves.push_back(std::move(corrected));
  }
  if (all_groups) {
    for (double test : standard_directions()) {
      auto post = inter_curve(out.indices, test);
      auto corrected = baseline_correct(post, out.indices);
      out.asymmetries.push_back({CurveKind::Inter, false, post.anchor_deg,
                                 asymmetry(post)});
      out.asymmetries.push_back({CurveKind::Inter, true, corrected.anchor_deg,
                                 asymmetry(corrected)});
      out.curves.push_back(std::move(post));
      out.curves.push_back(std::move(corrected));
    }
  }
  return out;
}

int run_simulate(const ExperimentConfig& config, const std::string& group_flag,
                 std::uint64_t seed, const std::string& out_dir, int jobs,
                 const std::string& baselines_csv) {
  SimSetup setup = config.make_setup();
  if (!baselines_csv.empty())
    setup.baselines = import_baselines(baselines_csv, standard_directions());
  const ProtocolOptions options = config.make_protocol_options();

  fs::create_directories(out_dir);
  std::vector<std::string> produced;
  for (double group : parse_groups(group_flag)) {
    const Protocol protocol = build_protocol(group, seed, setup, options);
    const auto audit = audit_protocol(protocol);
    if (!audit.ok())
      throw std::runtime_error("generated protocol failed its own audit: " +
                               audit.violations.front());

    std::vector<TrialRecord> records(protocol.trials.size());
    parallel_for(protocol.trials.size(), jobs, [&](std::size_t i) {
      records[i] = simulate_trial(protocol.trials[i], setup);
    });

    const std::string tag = group_tag(group);
    const std::string schedule_path = out_dir + "/schedule_g" + tag + ".csv";
    write_schedule_csv(protocol, schedule_path);
    produced.push_back(schedule_path);

    if (config.csv_mode == TrialCsvMode::Concatenated) {
      const std::string trials_path = out_dir + "/trials_g" + tag + ".csv";
      write_trials_concatenated(records, trials_path);
      produced.push_back(trials_path);
    } else {
      const std::string dir = out_dir + "/trials_g" + tag;
      fs::create_directories(dir);
      for (const auto& rec : records) {
        const std::string p =
            dir + "/trial_" + std::to_string(rec.spec.trial_index) + ".csv";
        write_trial_csv(rec, p);
        produced.push_back(p);
      }
    }
    std::cout << "group " << tag << ": " << records.size() << " trials simulated\n";
  }
  write_manifest(config, produced, out_dir + "/manifest.json");
  return 0;
}

std::map<int, std::vector<TrialRecord>> load_records(const std::string& in_dir) {
  std::map<int, std::vector<TrialRecord>> by_group;
  std::vector<fs::path> schedules;
  for (const auto& entry : fs::directory_iterator(in_dir)) {
    const std::string name = entry.path().filename().string();
    if (name.rfind("schedule_g", 0) == 0 && entry.path().extension() == ".csv")
      schedules.push_back(entry.path());
  }
  std::sort(schedules.begin(), schedules.end());
  if (schedules.empty())
    throw MissingDataError("no schedule_g*.csv files in '" + in_dir + "'");

  for (const auto& schedule_path : schedules) {
    double group = 0.0;
    const auto schedule = read_schedule_csv(schedule_path.string(), &group);
    const std::string tag =
        schedule_path.filename().string().substr(std::string("schedule_g").size());
    const std::string base = tag.substr(0, tag.size() - 4);  // strip .csv
    const fs::path concat = fs::path(in_dir) / ("trials_g" + base + ".csv");
    const fs::path per_trial_dir = fs::path(in_dir) / ("trials_g" + base);
    std::vector<TrialRecord> records;
    if (fs::exists(concat)) {
      records = read_trials_concatenated(concat.string(), schedule);
    } else if (fs::exists(per_trial_dir)) {
      for (const auto& f : fs::directory_iterator(per_trial_dir))
        if (f.path().extension() == ".csv")
          records.push_back(read_trial_csv(f.path().string()));
      std::sort(records.begin(), records.end(),
                [](const TrialRecord& a, const TrialRecord& b) {
                  return a.spec.trial_index < b.spec.trial_index;
                });
    } else {
      throw MissingDataError("no trials found for " + schedule_path.string());
    }
    by_group[static_cast<int>(std::llround(group))] = std::move(records);
  }
  return by_group;
}

int run_analyze(const ExperimentConfig& config, const std::string& in_dir,
                const std::string& out_dir) {
  const auto by_group = load_records(in_dir);
  fs::create_directories(out_dir);
  std::ofstream pe_csv(out_dir + "/pe.csv");
  const auto products = analyze_records(by_group, config.field_alpha,
                                        config.reach_distance, pe_csv);

  for (const auto& idx : products.indices)
    if (!index_in_sane_range(idx))
      std::cerr << "warning: index " << idx.value << " for group "
                << idx.group_deg << ", direction " << idx.direction_deg
                << " outside [-1.5, 1.5]\n";

  write_indices_csv(products.indices, out_dir + "/indices.csv");
  write_curves_csv(products.curves, out_dir + "/curves.csv");
  write_asymmetries_csv(products.asymmetries, out_dir + "/asymmetries.csv");
  std::cout << products.indices.size() << " clamp-trial indices, "
            << products.curves.size() << " curves\n";
  return 0;
}

int run_fit(const ExperimentConfig& config, const std::string& model,
            const std::string& phase, const std::string& indices_csv,
            const std::string& out_path, int jobs) {
  const auto indices = read_indices_csv(indices_csv);
  const IndexDataset data = IndexDataset::group_means(indices);
  FitOptions options = config.fitting;
  if (jobs > 0) options.jobs = jobs;
  options.seed = config.fitting.seed;

  FitResult fit;
  if (model == "standard") {
    if (phase == "baseline")
      throw std::invalid_argument(
          "the standard model predicts zero baseline forces; use --phase post");
    fit = fit_standard(data, options);
  } else {
    FitContext ctx = config.make_fit_context();
    if (jobs > 0) ctx.jobs = jobs;
    fit = phase == "baseline" ? fit_impedance_baseline(data, options, ctx)
                              : fit_impedance(data, options, ctx);
  }
  write_fit_json(fit, out_path);
  std::cout << to_string(fit.model) << " fit: nll=" << fit.nll
            << " rmse=" << fit.rmse << " " << (fit.aicc_is_aic ? "aic" : "aicc")
            << "=" << fit.aicc << " k=" << fit.k << " n=" << fit.n << "\n";
  return 0;
}

int run_compare(const ExperimentConfig& config,
                const std::vector<std::string>& fit_paths,
                const std::string& indices_csv, const std::string& out_dir,
                int jobs) {
  std::vector<FitResult> fits;
  for (const auto& p : fit_paths) fits.push_back(read_fit_json(p));
  const auto indices = read_indices_csv(indices_csv);
  const IndexDataset data = IndexDataset::group_means(indices);
  FitContext ctx = config.make_fit_context();
  if (jobs > 0) ctx.jobs = jobs;
  const auto cmp = compare_models(fits, data, &ctx);
  fs::create_directories(out_dir);
  write_comparison_csv(cmp, out_dir + "/comparison.csv");
  const std::string text = comparison_text(cmp);
  std::ofstream(out_dir + "/comparison.txt") << text;
  std::cout << text;
  return 0;
}

int run_recover(const ExperimentConfig& config, int datasets, double noise_sd,
                const std::string& out_dir, int jobs) {
  FitContext ctx = config.make_fit_context();
  if (jobs > 0) ctx.jobs = jobs;
  FitOptions options = config.fitting;
  if (jobs > 0) options.jobs = jobs;
  options.seed = config.noise_seed;

  const auto report =
      model_recovery_study(datasets, noise_sd, config.noise_seed, options, ctx);
  fs::create_directories(out_dir);
  write_recovery_csv(report, out_dir + "/recovery.csv");
  const std::string text = recovery_text(report);
  std::ofstream(out_dir + "/recovery.txt") << text;
  std::cout << text;
  return 0;
}

int run_plot(const std::string& curves_csv, const std::string& indices_csv,
             const std::vector<std::string>& fit_paths,
             const std::string& out_dir) {
  int emitted = 0;
  fs::create_directories(out_dir);
  if (!curves_csv.empty()) {
    const auto curves = read_curves_csv(curves_csv);
    std::map<int, std::vector<GeneralizationCurve>> intra;
    std::vector<AsymmetryRow> asym;
    for (const auto& c : curves) {
      if (c.kind == CurveKind::Intra)
        intra[static_cast<int>(std::llround(c.anchor_deg))].push_back(c);
      asym.push_back({c.kind, c.baseline_corrected, c.anchor_deg, asymmetry(c)});
    }
    for (const auto& [anchor, cs] : intra) {
      const int label = anchor < 0 ? anchor + 360 : anchor;
      const std::string p =
          out_dir + "/curve_intra_g" + std::to_string(label) + ".svg";
      emit_curve_panel(cs, "intra-generalization, train " +
                               std::to_string(label) + " deg", p);
      ++emitted;
    }
    std::vector<AsymmetryRow> intra_post;
    for (const auto& r : asym)
      if (r.kind == CurveKind::Intra && !r.baseline_corrected)
        intra_post.push_back(r);
    if (!intra_post.empty()) {
      emit_asymmetry_panel(intra_post, "intra-generalization asymmetries",
                           out_dir + "/asymmetry.svg");
      ++emitted;
    }
  }
  if (!indices_csv.empty()) {
    const auto indices = read_indices_csv(indices_csv);
    emit_baseline_panel(indices, "baseline adaptation indices",
                        out_dir + "/baseline.svg");
    ++emitted;
  }
  for (const auto& p : fit_paths) {
    const auto fit = read_fit_json(p);
    const std::string out =
        out_dir + "/representation_" + to_string(fit.model) + ".svg";
    emit_representation_polar(fit, to_string(fit.model) + " representations", out);
    ++emitted;
  }
  if (emitted == 0) throw MissingDataError("plot: nothing to plot");
  std::cout << emitted << " figures written to " << out_dir << "\n";
  return 0;
}

int run_audit(const ExperimentConfig& config, const std::string& group_flag,
              std::uint64_t seed) {
  const SimSetup setup = config.make_setup();
  const ProtocolOptions options = config.make_protocol_options();
  bool ok = true;
  for (double group : parse_groups(group_flag)) {
    const Protocol protocol = build_protocol(group, seed, setup, options);
    const auto report = audit_protocol(protocol);
    if (report.ok()) {
      std::cout << "group " << group_tag(group) << ": " << protocol.trials.size()
                << " trials, no violations\n";
    } else {
      ok = false;
      for (const auto& v : report.violations)
        std::cout << "group " << group_tag(group) << ": " << v << "\n";
    }
  }
  return ok ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"force-field adaptation simulation and model-fitting toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  app.add_option("--config", config_path, "experiment config JSON");

  std::string group_flag = "all";
  std::uint64_t seed = 0;
  bool seed_given = false;
  std::string out_dir = "";
  int jobs = 0;
  std::string model = "standard";
  std::string phase = "post";
  std::string in_dir = "out";
  std::string baselines_csv;
  std::string indices_csv;
  std::string curves_csv;
  std::vector<std::string> fit_paths;
  int datasets = 20;
  double noise_sd = 0.05;

  auto* sim = app.add_subcommand("simulate", "simulate a protocol per group");
  sim->add_option("--group", group_flag, "training direction in degrees, or 'all'");
  sim->add_option("--seed", seed, "protocol seed")->each([&](const std::string&) {
    seed_given = true;
  });
  sim->add_option("--out", out_dir, "output directory");
  sim->add_option("--jobs", jobs, "worker threads (default FIELDGEN_JOBS)");
  sim->add_option("--model", model, "controller model: standard|impedance")
      ->check(CLI::IsMember({"standard", "impedance"}));
  sim->add_option("--baselines", baselines_csv,
                  "baseline trajectories CSV (direction,t,x,y)");

  auto* ana = app.add_subcommand("analyze", "trial records -> indices and curves");
  ana->add_option("--in", in_dir, "directory with schedule/trial CSVs");
  ana->add_option("--out", out_dir, "output directory");

  auto* fit = app.add_subcommand("fit", "indices -> fitted representation model");
  fit->add_option("--model", model, "standard|impedance")
      ->check(CLI::IsMember({"standard", "impedance"}));
  fit->add_option("--phase", phase, "baseline|post")
      ->check(CLI::IsMember({"baseline", "post"}));
  fit->add_option("--in", indices_csv, "indices.csv from analyze")->required();
  fit->add_option("--out", out_dir, "output fit JSON path");
  fit->add_option("--jobs", jobs, "worker threads");

  auto* cmp = app.add_subcommand("compare", "rank fit results by AICc");
  cmp->add_option("fits", fit_paths, "fit JSON files")->expected(1, -1);
  cmp->add_option("--in", indices_csv, "indices.csv the fits were made on")
      ->required();
  cmp->add_option("--out", out_dir, "output directory");
  cmp->add_option("--jobs", jobs, "worker threads");

  auto* rec = app.add_subcommand("recover", "synthetic-data recovery studies");
  rec->add_option("--datasets", datasets, "datasets per generating model");
  rec->add_option("--noise", noise_sd, "index noise standard deviation");
  rec->add_option("--out", out_dir, "output directory");
  rec->add_option("--jobs", jobs, "worker threads");

  auto* plot = app.add_subcommand("plot", "curves/fits -> SVG figures");
  plot->add_option("--curves", curves_csv, "curves.csv from analyze");
  plot->add_option("--indices", indices_csv, "indices.csv from analyze");
  plot->add_option("--fits", fit_paths, "fit JSON files");
  plot->add_option("--out", out_dir, "output directory");

  auto* aud = app.add_subcommand("audit", "verify protocol count invariants");
  aud->add_option("--group", group_flag, "training direction or 'all'");
  aud->add_option("--seed", seed, "protocol seed")->each([&](const std::string&) {
    seed_given = true;
  });

  CLI11_PARSE(app, argc, argv);

  try {
    const ExperimentConfig config = load_config(config_path);
    const std::uint64_t protocol_seed = seed_given ? seed : config.protocol_seed;
    if (out_dir.empty()) out_dir = config.output_dir;

    if (sim->parsed()) {
      ExperimentConfig cfg = config;
      cfg.controller.kind = model_kind_from_string(model);
      cfg.controller.rep.model = cfg.controller.kind;
      if (cfg.controller.kind == ModelKind::Impedance) cfg.controller.rep.mu_deg = 0.0;
      return run_simulate(cfg, group_flag, protocol_seed, out_dir, jobs,
                          baselines_csv);
    }
    if (ana->parsed()) return run_analyze(config, in_dir, out_dir);
    if (fit->parsed()) {
      const std::string out_path =
          out_dir.empty() || fs::is_directory(out_dir)
              ? (out_dir.empty() ? std::string("fit_") + model + ".json"
                                 : out_dir + "/fit_" + model + ".json")
              : out_dir;
      return run_fit(config, model, phase, indices_csv, out_path, jobs);
    }
    if (cmp->parsed())
      return run_compare(config, fit_paths, indices_csv, out_dir, jobs);
    if (rec->parsed())
      return run_recover(config, datasets, noise_sd, out_dir, jobs);
    if (plot->parsed())
      return run_plot(curves_csv, indices_csv, fit_paths, out_dir);
    if (aud->parsed()) return run_audit(config, group_flag, protocol_seed);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
