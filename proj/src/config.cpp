#include "fieldgen/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace fieldgen {

using nlohmann::json;

std::string to_string(TrialCsvMode mode) {
  return mode == TrialCsvMode::Concatenated ? "concatenated" : "per-trial";
}

TrialCsvMode trial_csv_mode_from_string(const std::string& s) {
  if (s == "concatenated") return TrialCsvMode::Concatenated;
  if (s == "per-trial") return TrialCsvMode::PerTrial;
  throw SchemaError("unknown trial CSV mode '" + s + "'");
}

ExperimentConfig ExperimentConfig::defaults() {
  ExperimentConfig cfg;
  // Idealized stiff channel (see README); the apparatus hardware values
  // are 1 mm width, 5000 N/m and 5 N s/m.
  cfg.channel.k_wall = 100000.0;
  cfg.channel.b_wall = 400.0;
  cfg.channel.half_width = 1e-5;
  // CCW-positive synthetic baseline curvature, larger along the low
  // stiffness diagonal (45/225) and smaller along 135/315.
  cfg.baseline_pe_mm = {{0, 7.0},   {45, 11.5},  {90, 8.0},  {135, 4.2},
                        {180, 7.0}, {225, 11.0}, {270, 8.5}, {315, 4.0}};
  cfg.controller.kind = ModelKind::Standard;
  cfg.controller.rep.model = ModelKind::Standard;
  cfg.controller.rep.amplitude = 1.0;
  cfg.controller.rep.sigma_deg = 30.0;
  // adapted-phase gains; the naive baseline gains live next to them
  cfg.controller.scaling = ImpedanceScaling{0.1406, 0.7108};
  cfg.baseline_scaling = ImpedanceScaling{0.7278, 0.0723};
  return cfg;
}

namespace {

void reject_unknown_keys(const json& j, const std::set<std::string>& known,
                         const std::string& where) {
  for (const auto& [key, _] : j.items())
    if (!known.count(key))
      throw SchemaError("config: unknown key '" + key + "' in " + where);
}

double require_number(const json& j, const std::string& key,
                      const std::string& where) {
  if (!j.contains(key) || !j[key].is_number())
    throw SchemaError("config: " + where + "." + key + " must be a number");
  return j[key].get<double>();
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("config: cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return from_json_text(buf.str(), path);
}

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text,
                                                  const std::string& origin) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError("config: parse error in " + origin + ": " + e.what());
  }

  ExperimentConfig cfg = defaults();
  reject_unknown_keys(j,
                      {"schema_version", "arm", "workspace", "field", "channel",
                       "baseline_pe_mm", "trial", "seeds", "controller",
                       "fitting", "csv_mode", "output_dir"},
                      "top level");

  if (!j.contains("schema_version") || !j["schema_version"].is_number_integer())
    throw SchemaError("config: schema_version (integer) is required");
  cfg.schema_version = j["schema_version"].get<int>();
  if (cfg.schema_version != 1)
    throw SchemaError("config: unsupported schema_version " +
                      std::to_string(cfg.schema_version));

  if (j.contains("arm")) {
    const auto& a = j["arm"];
    reject_unknown_keys(a, {"m1", "m2", "l1", "l2", "r1", "r2", "i1", "i2"}, "arm");
    if (a.contains("m1")) cfg.arm.m1 = require_number(a, "m1", "arm");
    if (a.contains("m2")) cfg.arm.m2 = require_number(a, "m2", "arm");
    if (a.contains("l1")) cfg.arm.l1 = require_number(a, "l1", "arm");
    if (a.contains("l2")) cfg.arm.l2 = require_number(a, "l2", "arm");
    if (a.contains("r1")) cfg.arm.r1 = require_number(a, "r1", "arm");
    if (a.contains("r2")) cfg.arm.r2 = require_number(a, "r2", "arm");
    if (a.contains("i1")) cfg.arm.i1 = require_number(a, "i1", "arm");
    if (a.contains("i2")) cfg.arm.i2 = require_number(a, "i2", "arm");
  }

  if (j.contains("workspace")) {
    const auto& w = j["workspace"];
    reject_unknown_keys(w, {"home", "reach_distance", "plan_duration"}, "workspace");
    if (w.contains("home")) {
      if (!w["home"].is_array() || w["home"].size() != 2)
        throw SchemaError("config: workspace.home must be [x, y]");
      cfg.home = Vec2(w["home"][0].get<double>(), w["home"][1].get<double>());
    }
    if (w.contains("reach_distance"))
      cfg.reach_distance = require_number(w, "reach_distance", "workspace");
    if (w.contains("plan_duration"))
      cfg.plan_duration = require_number(w, "plan_duration", "workspace");
  }

  if (j.contains("field")) {
    const auto& f = j["field"];
    reject_unknown_keys(f, {"alpha"}, "field");
    if (f.contains("alpha")) cfg.field_alpha = require_number(f, "alpha", "field");
  }

  if (j.contains("channel")) {
    const auto& c = j["channel"];
    reject_unknown_keys(c, {"half_width", "k_wall", "b_wall"}, "channel");
    if (c.contains("half_width"))
      cfg.channel.half_width = require_number(c, "half_width", "channel");
    if (c.contains("k_wall")) cfg.channel.k_wall = require_number(c, "k_wall", "channel");
    if (c.contains("b_wall")) cfg.channel.b_wall = require_number(c, "b_wall", "channel");
  }

  if (j.contains("baseline_pe_mm")) {
    const auto& b = j["baseline_pe_mm"];
    if (!b.is_object()) throw SchemaError("config: baseline_pe_mm must be an object");
    cfg.baseline_pe_mm.clear();
    for (const auto& [key, value] : b.items()) {
      int dir = 0;
      try {
        dir = std::stoi(key);
      } catch (...) {
        throw SchemaError("config: baseline_pe_mm key '" + key +
                          "' is not a direction in degrees");
      }
      if (!value.is_number())
        throw SchemaError("config: baseline_pe_mm[" + key + "] must be a number");
      cfg.baseline_pe_mm[((dir % 360) + 360) % 360] = value.get<double>();
    }
  }

  if (j.contains("trial")) {
    const auto& t = j["trial"];
    reject_unknown_keys(t, {"duration", "step", "log_rate"}, "trial");
    if (t.contains("duration")) cfg.trial_duration = require_number(t, "duration", "trial");
    if (t.contains("step")) cfg.trial_step = require_number(t, "step", "trial");
    if (t.contains("log_rate")) cfg.log_rate = require_number(t, "log_rate", "trial");
  }

  if (j.contains("seeds")) {
    const auto& s = j["seeds"];
    reject_unknown_keys(s, {"protocol", "noise"}, "seeds");
    if (s.contains("protocol")) cfg.protocol_seed = s["protocol"].get<std::uint64_t>();
    if (s.contains("noise")) cfg.noise_seed = s["noise"].get<std::uint64_t>();
  }

  if (j.contains("controller")) {
    const auto& c = j["controller"];
    reject_unknown_keys(c,
                        {"model", "amplitude", "sigma", "mu", "alpha_k",
                         "alpha_b", "baseline_alpha_k", "baseline_alpha_b"},
                        "controller");
    if (c.contains("model")) {
      cfg.controller.kind = model_kind_from_string(c["model"].get<std::string>());
      cfg.controller.rep.model = cfg.controller.kind;
    }
    if (c.contains("amplitude"))
      cfg.controller.rep.amplitude = require_number(c, "amplitude", "controller");
    if (c.contains("sigma"))
      cfg.controller.rep.sigma_deg = require_number(c, "sigma", "controller");
    if (c.contains("mu")) cfg.controller.rep.mu_deg = require_number(c, "mu", "controller");
    if (c.contains("alpha_k"))
      cfg.controller.scaling.alpha_k = require_number(c, "alpha_k", "controller");
    if (c.contains("alpha_b"))
      cfg.controller.scaling.alpha_b = require_number(c, "alpha_b", "controller");
    if (c.contains("baseline_alpha_k"))
      cfg.baseline_scaling.alpha_k = require_number(c, "baseline_alpha_k", "controller");
    if (c.contains("baseline_alpha_b"))
      cfg.baseline_scaling.alpha_b = require_number(c, "baseline_alpha_b", "controller");
  }

  if (j.contains("fitting")) {
    const auto& f = j["fitting"];
    reject_unknown_keys(f,
                        {"restarts", "max_iterations", "tolerance", "seed",
                         "amp_bounds", "sigma_bounds", "mu_bounds",
                         "impedance_bounds", "aicc_n_override", "jobs",
                         "exact_group_polish"},
                        "fitting");
    auto bounds = [&](const char* key, double& lo, double& hi) {
      if (!f.contains(key)) return;
      if (!f[key].is_array() || f[key].size() != 2)
        throw SchemaError(std::string("config: fitting.") + key + " must be [lo, hi]");
      lo = f[key][0].get<double>();
      hi = f[key][1].get<double>();
    };
    if (f.contains("restarts")) cfg.fitting.restarts = f["restarts"].get<int>();
    if (f.contains("max_iterations"))
      cfg.fitting.max_iterations = f["max_iterations"].get<int>();
    if (f.contains("tolerance"))
      cfg.fitting.tolerance = require_number(f, "tolerance", "fitting");
    if (f.contains("seed")) cfg.fitting.seed = f["seed"].get<std::uint64_t>();
    bounds("amp_bounds", cfg.fitting.amp_lo, cfg.fitting.amp_hi);
    bounds("sigma_bounds", cfg.fitting.sigma_lo, cfg.fitting.sigma_hi);
    bounds("mu_bounds", cfg.fitting.mu_lo, cfg.fitting.mu_hi);
    bounds("impedance_bounds", cfg.fitting.imp_lo, cfg.fitting.imp_hi);
    if (f.contains("aicc_n_override"))
      cfg.fitting.aicc_n_override = f["aicc_n_override"].get<int>();
    if (f.contains("jobs")) cfg.fitting.jobs = f["jobs"].get<int>();
    if (f.contains("exact_group_polish"))
      cfg.fitting.exact_group_polish = f["exact_group_polish"].get<bool>();
  }

  if (j.contains("csv_mode"))
    cfg.csv_mode = trial_csv_mode_from_string(j["csv_mode"].get<std::string>());
  if (j.contains("output_dir")) cfg.output_dir = j["output_dir"].get<std::string>();

  cfg.validate();
  return cfg;
}

std::string ExperimentConfig::to_json_text() const {
  json j;
  j["schema_version"] = schema_version;
  j["arm"] = {{"m1", arm.m1}, {"m2", arm.m2}, {"l1", arm.l1}, {"l2", arm.l2},
              {"r1", arm.r1}, {"r2", arm.r2}, {"i1", arm.i1}, {"i2", arm.i2}};
  j["workspace"] = {{"home", {home.x(), home.y()}},
                    {"reach_distance", reach_distance},
                    {"plan_duration", plan_duration}};
  j["field"] = {{"alpha", field_alpha}};
  j["channel"] = {{"half_width", channel.half_width},
                  {"k_wall", channel.k_wall},
                  {"b_wall", channel.b_wall}};
  json pe = json::object();
  for (const auto& [dir, mm] : baseline_pe_mm) pe[std::to_string(dir)] = mm;
  j["baseline_pe_mm"] = pe;
  j["trial"] = {{"duration", trial_duration}, {"step", trial_step},
                {"log_rate", log_rate}};
  j["seeds"] = {{"protocol", protocol_seed}, {"noise", noise_seed}};
  j["controller"] = {{"model", to_string(controller.kind)},
                     {"amplitude", controller.rep.amplitude},
                     {"sigma", controller.rep.sigma_deg},
                     {"mu", controller.rep.mu_deg},
                     {"alpha_k", controller.scaling.alpha_k},
                     {"alpha_b", controller.scaling.alpha_b},
                     {"baseline_alpha_k", baseline_scaling.alpha_k},
                     {"baseline_alpha_b", baseline_scaling.alpha_b}};
  j["fitting"] = {{"restarts", fitting.restarts},
                  {"max_iterations", fitting.max_iterations},
                  {"tolerance", fitting.tolerance},
                  {"seed", fitting.seed},
                  {"amp_bounds", {fitting.amp_lo, fitting.amp_hi}},
                  {"sigma_bounds", {fitting.sigma_lo, fitting.sigma_hi}},
                  {"mu_bounds", {fitting.mu_lo, fitting.mu_hi}},
                  {"impedance_bounds", {fitting.imp_lo, fitting.imp_hi}},
                  {"aicc_n_override", fitting.aicc_n_override},
                  {"jobs", fitting.jobs},
                  {"exact_group_polish", fitting.exact_group_polish}};
  j["csv_mode"] = to_string(csv_mode);
  j["output_dir"] = output_dir;
  return j.dump(2) + "\n";
}

void ExperimentConfig::validate() const {
  arm.validate();
  channel.validate_gains();
  if (!(reach_distance > 0.0)) throw SchemaError("config: reach_distance must be > 0");
  if (!(plan_duration > 0.0)) throw SchemaError("config: plan_duration must be > 0");
  if (!std::isfinite(field_alpha)) throw SchemaError("config: field alpha must be finite");
  if (!(trial_duration >= plan_duration))
    throw SchemaError("config: trial duration must cover the desired trajectory");
  if (!(trial_step > 0.0) || log_rate <= 0.0 || log_rate > 1.0 / trial_step + 1e-9)
    throw SchemaError("config: log_rate must be in (0, 1/step]");
  for (const auto& [dir, _] : baseline_pe_mm)
    if (dir % 45 != 0)
      throw SchemaError("config: baseline_pe_mm direction " + std::to_string(dir) +
                        " is off the 45-degree grid");
  controller.rep.validate();
  controller.scaling.validate();
  baseline_scaling.validate();
}

SimSetup ExperimentConfig::make_setup() const {
  SimSetup setup;
  setup.arm = arm;
  setup.arm.base = solve_base_for_home(arm, home, Vec2(deg2rad(45.0), deg2rad(90.0)));
  setup.home = home;
  setup.reach_distance = reach_distance;
  setup.plan_duration = plan_duration;
  setup.alpha_true = field_alpha;
  setup.channel = channel;
  auto baselines = std::make_shared<BaselineSet>();
  for (const auto& [dir, mm] : baseline_pe_mm) {
    baselines->set(dir, std::make_shared<BumpPlan>(home, setup.target(dir),
                                                   plan_duration, mm * 1e-3));
  }
  setup.baselines = baselines;
  return setup;
}

FitContext ExperimentConfig::make_fit_context() const {
  FitContext ctx;
  ctx.setup = make_setup();
  ctx.duration_s = trial_duration;
  ctx.step_s = trial_step;
  ctx.log_rate_hz = log_rate;
  ctx.jobs = fitting.jobs;
  return ctx;
}

ProtocolOptions ExperimentConfig::make_protocol_options() const {
  ProtocolOptions opt;
  opt.controller = controller;
  opt.baseline_scaling = baseline_scaling;
  opt.field_alpha = field_alpha;
  opt.duration_s = trial_duration;
  opt.step_s = trial_step;
  opt.log_rate_hz = log_rate;
  return opt;
}

}  // namespace fieldgen
