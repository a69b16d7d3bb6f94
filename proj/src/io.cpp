#include "fieldgen/io.hpp"

#include <charconv>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

namespace fieldgen {

using nlohmann::json;

namespace {

// shortest round-trip formatting for doubles keeps CSV exports
// byte-stable across export -> import -> export
std::string fmt(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw SchemaError("cannot open '" + path + "' for writing");
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open '" + path + "'");
  return in;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

double parse_double(const std::string& s, const std::string& where) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (...) {
    throw SchemaError("cannot parse number '" + s + "' in " + where);
  }
}

void write_spec_header(std::ostream& out, const TrialSpec& spec) {
  out << "# trial_index: " << spec.trial_index << "\n"
      << "# block: " << spec.block << "\n"
      << "# kind: " << to_string(spec.kind) << "\n"
      << "# direction_deg: " << fmt(spec.direction_deg) << "\n"
      << "# field: " << to_string(spec.field.kind) << "\n"
      << "# alpha: " << fmt(spec.field.alpha) << "\n"
      << "# channel_origin: " << fmt(spec.field.channel.origin.x()) << " "
      << fmt(spec.field.channel.origin.y()) << "\n"
      << "# channel_target: " << fmt(spec.field.channel.target.x()) << " "
      << fmt(spec.field.channel.target.y()) << "\n"
      << "# channel_half_width: " << fmt(spec.field.channel.half_width) << "\n"
      << "# channel_k_wall: " << fmt(spec.field.channel.k_wall) << "\n"
      << "# channel_b_wall: " << fmt(spec.field.channel.b_wall) << "\n"
      << "# feedback: " << (spec.feedback ? 1 : 0) << "\n"
      << "# controller: " << to_string(spec.controller.kind) << "\n"
      << "# amplitude: " << fmt(spec.controller.rep.amplitude) << "\n"
      << "# sigma_deg: " << fmt(spec.controller.rep.sigma_deg) << "\n"
      << "# mu_deg: " << fmt(spec.controller.rep.mu_deg) << "\n"
      << "# theta_train_deg: " << fmt(spec.controller.rep.theta_train_deg) << "\n"
      << "# alpha_k: " << fmt(spec.controller.scaling.alpha_k) << "\n"
      << "# alpha_b: " << fmt(spec.controller.scaling.alpha_b) << "\n"
      << "# duration_s: " << fmt(spec.duration_s) << "\n"
      << "# step_s: " << fmt(spec.step_s) << "\n"
      << "# log_rate_hz: " << fmt(spec.log_rate_hz) << "\n";
}

void apply_spec_header(TrialSpec& spec, const std::string& key,
                       const std::string& value) {
  if (key == "trial_index") spec.trial_index = std::stoi(value);
  else if (key == "block") spec.block = std::stoi(value);
  else if (key == "kind") spec.kind = trial_kind_from_string(value);
  else if (key == "direction_deg") spec.direction_deg = parse_double(value, key);
  else if (key == "field") spec.field.kind = field_kind_from_string(value);
  else if (key == "alpha") spec.field.alpha = parse_double(value, key);
  else if (key == "channel_origin" || key == "channel_target") {
    std::istringstream iss(value);
    double x = 0, y = 0;
    iss >> x >> y;
    if (key == "channel_origin") spec.field.channel.origin = Vec2(x, y);
    else spec.field.channel.target = Vec2(x, y);
  } else if (key == "channel_half_width") spec.field.channel.half_width = parse_double(value, key);
  else if (key == "channel_k_wall") spec.field.channel.k_wall = parse_double(value, key);
  else if (key == "channel_b_wall") spec.field.channel.b_wall = parse_double(value, key);
  else if (key == "feedback") spec.feedback = value != "0";
  else if (key == "controller") {
    spec.controller.kind = model_kind_from_string(value);
    spec.controller.rep.model = spec.controller.kind;
  } else if (key == "amplitude") spec.controller.rep.amplitude = parse_double(value, key);
  else if (key == "sigma_deg") spec.controller.rep.sigma_deg = parse_double(value, key);
  else if (key == "mu_deg") spec.controller.rep.mu_deg = parse_double(value, key);
  else if (key == "theta_train_deg") spec.controller.rep.theta_train_deg = parse_double(value, key);
  else if (key == "alpha_k") spec.controller.scaling.alpha_k = parse_double(value, key);
  else if (key == "alpha_b") spec.controller.scaling.alpha_b = parse_double(value, key);
  else if (key == "duration_s") spec.duration_s = parse_double(value, key);
  else if (key == "step_s") spec.step_s = parse_double(value, key);
  else if (key == "log_rate_hz") spec.log_rate_hz = parse_double(value, key);
  else throw SchemaError("trial CSV: unknown header key '" + key + "'");
}

constexpr const char* kTrialColumns = "t,x,y,vx,vy,fx,fy,q1,q2";

void write_sample_row(std::ostream& out, const TrialRecord& rec, std::size_t i) {
  out << fmt(rec.t[i]) << ',' << fmt(rec.p[i].x()) << ',' << fmt(rec.p[i].y())
      << ',' << fmt(rec.v[i].x()) << ',' << fmt(rec.v[i].y()) << ','
      << fmt(rec.f[i].x()) << ',' << fmt(rec.f[i].y()) << ','
      << fmt(rec.q[i].x()) << ',' << fmt(rec.q[i].y()) << '\n';
}

void parse_sample_row(const std::vector<std::string>& cols, std::size_t offset,
                      TrialRecord& rec, const std::string& where) {
  rec.t.push_back(parse_double(cols[offset + 0], where));
  rec.p.emplace_back(parse_double(cols[offset + 1], where),
                     parse_double(cols[offset + 2], where));
  rec.v.emplace_back(parse_double(cols[offset + 3], where),
                     parse_double(cols[offset + 4], where));
  rec.f.emplace_back(parse_double(cols[offset + 5], where),
                     parse_double(cols[offset + 6], where));
  rec.q.emplace_back(parse_double(cols[offset + 7], where),
                     parse_double(cols[offset + 8], where));
  rec.qd.emplace_back(0.0, 0.0);  // joint velocities are not exported
}

}  // namespace

void write_trial_csv(const TrialRecord& record, const std::string& path) {
  auto out = open_out(path);
  write_spec_header(out, record.spec);
  out << kTrialColumns << "\n";
  for (std::size_t i = 0; i < record.size(); ++i) write_sample_row(out, record, i);
}

TrialRecord read_trial_csv(const std::string& path) {
  auto in = open_in(path);
  TrialRecord rec;
  std::string line;
  bool saw_columns = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto colon = line.find(':');
      if (colon == std::string::npos)
        throw SchemaError(path + ": malformed header line '" + line + "'");
      std::string key = line.substr(1, colon - 1);
      std::string value = line.substr(colon + 1);
      auto strip = [](std::string& s) {
        while (!s.empty() && (s.front() == ' ')) s.erase(s.begin());
        while (!s.empty() && (s.back() == ' ' || s.back() == '\r')) s.pop_back();
      };
      strip(key);
      strip(value);
      apply_spec_header(rec.spec, key, value);
      continue;
    }
    if (!saw_columns) {
      if (split_csv(line) != split_csv(kTrialColumns))
        throw SchemaError(path + ": expected columns " + kTrialColumns);
      saw_columns = true;
      continue;
    }
    const auto cols = split_csv(line);
    if (cols.size() != 9) throw SchemaError(path + ": expected 9 columns");
    parse_sample_row(cols, 0, rec, path);
  }
  if (rec.t.empty()) throw SchemaError(path + ": no samples");
  return rec;
}

void write_trials_concatenated(const std::vector<TrialRecord>& records,
                               const std::string& path) {
  auto out = open_out(path);
  out << "trial," << kTrialColumns << "\n";
  for (const auto& rec : records)
    for (std::size_t i = 0; i < rec.size(); ++i) {
      out << rec.spec.trial_index << ',';
      write_sample_row(out, rec, i);
    }
}

std::vector<TrialRecord> read_trials_concatenated(
    const std::string& path, const std::vector<TrialSpec>& schedule) {
  auto in = open_in(path);
  std::string line;
  if (!std::getline(in, line) ||
      split_csv(line) != split_csv(std::string("trial,") + kTrialColumns))
    throw SchemaError(path + ": expected columns trial," + kTrialColumns);

  std::map<int, const TrialSpec*> by_index;
  for (const auto& spec : schedule) by_index[spec.trial_index] = &spec;

  std::map<int, TrialRecord> records;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cols = split_csv(line);
    if (cols.size() != 10) throw SchemaError(path + ": expected 10 columns");
    const int trial = std::stoi(cols[0]);
    auto it = records.find(trial);
    if (it == records.end()) {
      const auto spec_it = by_index.find(trial);
      if (spec_it == by_index.end())
        throw SchemaError(path + ": trial " + cols[0] + " missing from the schedule");
      TrialRecord rec;
      rec.spec = *spec_it->second;
      it = records.emplace(trial, std::move(rec)).first;
    }
    parse_sample_row(cols, 1, it->second, path);
  }
  std::vector<TrialRecord> out;
  out.reserve(records.size());
  for (auto& [_, rec] : records) out.push_back(std::move(rec));
  return out;
}

namespace {

constexpr const char* kScheduleColumns =
    "trial,block,target_deg,field,feedback,kind,alpha,duration_s,step_s,"
    "log_rate_hz,group_deg,controller,amplitude,sigma_deg,mu_deg,alpha_k,"
    "alpha_b,channel_half_width,channel_k_wall,channel_b_wall,"
    "channel_origin_x,channel_origin_y,channel_target_x,channel_target_y";

}  // namespace

void write_schedule_csv(const Protocol& protocol, const std::string& path) {
  auto out = open_out(path);
  out << "# group_deg: " << fmt(protocol.group_deg) << "\n"
      << "# seed: " << protocol.seed << "\n"
      << kScheduleColumns << "\n";
  for (const auto& t : protocol.trials) {
    out << t.trial_index << ',' << t.block << ',' << fmt(t.direction_deg) << ','
        << to_string(t.field.kind) << ',' << (t.feedback ? 1 : 0) << ','
        << to_string(t.kind) << ',' << fmt(t.field.alpha) << ','
        << fmt(t.duration_s) << ',' << fmt(t.step_s) << ',' << fmt(t.log_rate_hz)
        << ',' << fmt(t.controller.rep.theta_train_deg) << ','
        << to_string(t.controller.kind) << ',' << fmt(t.controller.rep.amplitude)
        << ',' << fmt(t.controller.rep.sigma_deg) << ','
        << fmt(t.controller.rep.mu_deg) << ',' << fmt(t.controller.scaling.alpha_k)
        << ',' << fmt(t.controller.scaling.alpha_b) << ','
        << fmt(t.field.channel.half_width) << ',' << fmt(t.field.channel.k_wall)
        << ',' << fmt(t.field.channel.b_wall) << ','
        << fmt(t.field.channel.origin.x()) << ',' << fmt(t.field.channel.origin.y())
        << ',' << fmt(t.field.channel.target.x()) << ','
        << fmt(t.field.channel.target.y()) << '\n';
  }
}

std::vector<TrialSpec> read_schedule_csv(const std::string& path,
                                         double* group_deg, std::uint64_t* seed) {
  auto in = open_in(path);
  std::vector<TrialSpec> out;
  std::string line;
  bool saw_columns = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto colon = line.find(':');
      if (colon == std::string::npos) continue;
      const std::string key = line.substr(2, colon - 2);
      const std::string value = line.substr(colon + 2);
      if (key == "group_deg" && group_deg) *group_deg = parse_double(value, key);
      if (key == "seed" && seed) *seed = std::stoull(value);
      continue;
    }
    if (!saw_columns) {
      if (split_csv(line) != split_csv(kScheduleColumns))
        throw SchemaError(path + ": unexpected schedule columns");
      saw_columns = true;
      continue;
    }
    const auto cols = split_csv(line);
    if (cols.size() != 24) throw SchemaError(path + ": expected 24 columns");
    TrialSpec t;
    t.trial_index = std::stoi(cols[0]);
    t.block = std::stoi(cols[1]);
    t.direction_deg = parse_double(cols[2], "target_deg");
    t.field.kind = field_kind_from_string(cols[3]);
    t.feedback = cols[4] != "0";
    t.kind = trial_kind_from_string(cols[5]);
    t.field.alpha = parse_double(cols[6], "alpha");
    t.duration_s = parse_double(cols[7], "duration_s");
    t.step_s = parse_double(cols[8], "step_s");
    t.log_rate_hz = parse_double(cols[9], "log_rate_hz");
    t.controller.rep.theta_train_deg = parse_double(cols[10], "group_deg");
    t.controller.kind = model_kind_from_string(cols[11]);
    t.controller.rep.model = t.controller.kind;
    t.controller.rep.amplitude = parse_double(cols[12], "amplitude");
    t.controller.rep.sigma_deg = parse_double(cols[13], "sigma_deg");
    t.controller.rep.mu_deg = parse_double(cols[14], "mu_deg");
    t.controller.scaling.alpha_k = parse_double(cols[15], "alpha_k");
    t.controller.scaling.alpha_b = parse_double(cols[16], "alpha_b");
    t.field.channel.half_width = parse_double(cols[17], "channel_half_width");
    t.field.channel.k_wall = parse_double(cols[18], "channel_k_wall");
    t.field.channel.b_wall = parse_double(cols[19], "channel_b_wall");
    t.field.channel.origin = Vec2(parse_double(cols[20], "channel_origin_x"),
                                  parse_double(cols[21], "channel_origin_y"));
    t.field.channel.target = Vec2(parse_double(cols[22], "channel_target_x"),
                                  parse_double(cols[23], "channel_target_y"));
    out.push_back(t);
  }
  if (out.empty()) throw SchemaError(path + ": empty schedule");
  return out;
}

void write_indices_csv(const std::vector<AdaptationIndex>& indices,
                       const std::string& path) {
  auto out = open_out(path);
  out << "group_deg,direction_deg,phase,value\n";
  for (const auto& idx : indices)
    out << fmt(idx.group_deg) << ',' << fmt(idx.direction_deg) << ','
        << to_string(idx.phase) << ',' << fmt(idx.value) << '\n';
}

std::vector<AdaptationIndex> read_indices_csv(const std::string& path) {
  auto in = open_in(path);
  std::string line;
  if (!std::getline(in, line) ||
      split_csv(line) != split_csv("group_deg,direction_deg,phase,value"))
    throw SchemaError(path + ": expected columns group_deg,direction_deg,phase,value");
  std::vector<AdaptationIndex> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cols = split_csv(line);
    if (cols.size() != 4) throw SchemaError(path + ": expected 4 columns");
    AdaptationIndex idx;
    idx.group_deg = parse_double(cols[0], "group_deg");
    idx.direction_deg = parse_double(cols[1], "direction_deg");
    idx.phase = phase_from_string(cols[2]);
    idx.value = parse_double(cols[3], "value");
    out.push_back(idx);
  }
  return out;
}

namespace {

constexpr const char* kCurveColumns =
    "kind,anchor_deg,baseline_corrected,offset_deg,mean,sem,n,group_deg,"
    "direction_deg";

}  // namespace

void write_curves_csv(const std::vector<GeneralizationCurve>& curves,
                      const std::string& path) {
  auto out = open_out(path);
  out << kCurveColumns << "\n";
  for (const auto& curve : curves)
    for (const auto& pt : curve.points)
      out << (curve.kind == CurveKind::Intra ? "intra" : "inter") << ','
          << fmt(curve.anchor_deg) << ',' << (curve.baseline_corrected ? 1 : 0)
          << ',' << fmt(pt.offset_deg) << ',' << fmt(pt.mean) << ','
          << fmt(pt.sem) << ',' << pt.n << ',' << fmt(pt.group_deg) << ','
          << fmt(pt.direction_deg) << '\n';
}

std::vector<GeneralizationCurve> read_curves_csv(const std::string& path) {
  auto in = open_in(path);
  std::string line;
  if (!std::getline(in, line) || split_csv(line) != split_csv(kCurveColumns))
    throw SchemaError(path + ": unexpected curve columns");
  std::map<std::tuple<int, int, int>, GeneralizationCurve> curves;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cols = split_csv(line);
    if (cols.size() != 9) throw SchemaError(path + ": expected 9 columns");
    const CurveKind kind = cols[0] == "intra" ? CurveKind::Intra : CurveKind::Inter;
    if (cols[0] != "intra" && cols[0] != "inter")
      throw SchemaError(path + ": unknown curve kind '" + cols[0] + "'");
    const double anchor = parse_double(cols[1], "anchor_deg");
    const bool corrected = cols[2] != "0";
    const auto key = std::make_tuple(static_cast<int>(kind),
                                     static_cast<int>(std::llround(anchor)),
                                     corrected ? 1 : 0);
    auto& curve = curves[key];
    curve.kind = kind;
    curve.anchor_deg = anchor;
    curve.baseline_corrected = corrected;
    CurvePoint pt;
    pt.offset_deg = parse_double(cols[3], "offset_deg");
    pt.mean = parse_double(cols[4], "mean");
    pt.sem = parse_double(cols[5], "sem");
    pt.n = std::stoi(cols[6]);
    pt.group_deg = parse_double(cols[7], "group_deg");
    pt.direction_deg = parse_double(cols[8], "direction_deg");
    curve.points.push_back(pt);
  }
  std::vector<GeneralizationCurve> out;
  out.reserve(curves.size());
  for (auto& [_, c] : curves) out.push_back(std::move(c));
  return out;
}

void write_asymmetries_csv(const std::vector<AsymmetryRow>& rows,
                           const std::string& path) {
  auto out = open_out(path);
  out << "kind,baseline_corrected,anchor_deg,asymmetry\n";
  for (const auto& r : rows)
    out << (r.kind == CurveKind::Intra ? "intra" : "inter") << ','
        << (r.baseline_corrected ? 1 : 0) << ',' << fmt(r.anchor_deg) << ','
        << fmt(r.value) << '\n';
}

void write_fit_json(const FitResult& fit, const std::string& path) {
  json j;
  j["model"] = to_string(fit.model);
  json groups = json::array();
  for (const auto& g : fit.groups) {
    json jg;
    jg["group_deg"] = g.group_deg;
    jg["amplitude"] = g.amplitude;
    jg["sigma_deg"] = g.sigma_deg;
    if (fit.model == ModelKind::Standard) jg["mu_deg"] = g.mu_deg;
    groups.push_back(jg);
  }
  j["groups"] = groups;
  if (fit.model == ModelKind::Impedance)
    j["scaling"] = {{"alpha_k", fit.scaling.alpha_k},
                    {"alpha_b", fit.scaling.alpha_b}};
  j["nll"] = fit.nll;
  j["rmse"] = fit.rmse;
  j["aicc"] = fit.aicc;
  j["aicc_is_aic"] = fit.aicc_is_aic;
  j["k"] = fit.k;
  j["n"] = fit.n;
  j["seed"] = fit.seed;
  j["converged"] = fit.converged;
  j["iterations"] = fit.iterations;
  j["restarts"] = fit.restarts;
  j["dataset_fingerprint"] = fit.dataset_fingerprint;
  j["notes"] = fit.notes;
  auto out = open_out(path);
  out << j.dump(2) << "\n";
}

FitResult read_fit_json(const std::string& path) {
  auto in = open_in(path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw SchemaError(path + ": " + e.what());
  }
  FitResult fit;
  fit.model = model_kind_from_string(j.at("model").get<std::string>());
  for (const auto& jg : j.at("groups")) {
    GroupRepresentation g;
    g.group_deg = jg.at("group_deg").get<double>();
    g.amplitude = jg.at("amplitude").get<double>();
    g.sigma_deg = jg.at("sigma_deg").get<double>();
    if (jg.contains("mu_deg")) g.mu_deg = jg.at("mu_deg").get<double>();
    fit.groups.push_back(g);
  }
  if (j.contains("scaling")) {
    fit.scaling.alpha_k = j["scaling"].at("alpha_k").get<double>();
    fit.scaling.alpha_b = j["scaling"].at("alpha_b").get<double>();
  }
  fit.nll = j.at("nll").get<double>();
  fit.rmse = j.at("rmse").get<double>();
  fit.aicc = j.at("aicc").get<double>();
  fit.aicc_is_aic = j.value("aicc_is_aic", false);
  fit.k = j.at("k").get<int>();
  fit.n = j.at("n").get<int>();
  fit.seed = j.value("seed", std::uint64_t{0});
  fit.converged = j.value("converged", false);
  fit.iterations = j.value("iterations", 0);
  fit.restarts = j.value("restarts", 0);
  fit.dataset_fingerprint = j.value("dataset_fingerprint", std::uint64_t{0});
  if (j.contains("notes"))
    fit.notes = j["notes"].get<std::vector<std::string>>();
  return fit;
}

void write_comparison_csv(const ModelComparison& cmp, const std::string& path) {
  auto out = open_out(path);
  out << "model,nll,rmse,aicc,delta_aicc,k,n,converged,aicc_is_aic\n";
  for (const auto& r : cmp.rows)
    out << to_string(r.model) << ',' << fmt(r.nll) << ',' << fmt(r.rmse) << ','
        << fmt(r.aicc) << ',' << fmt(r.delta_aicc) << ',' << r.k << ',' << r.n
        << ',' << (r.converged ? 1 : 0) << ',' << (r.aicc_is_aic ? 1 : 0) << '\n';
  out << "\nmodel,anchor_deg,predicted_asymmetry\n";
  for (const auto& a : cmp.asymmetries)
    out << to_string(a.model) << ',' << fmt(a.group_deg) << ','
        << fmt(a.asymmetry) << '\n';
}

std::string comparison_text(const ModelComparison& cmp) {
  std::ostringstream out;
  out << "model       nll        rmse     aicc      dAICc   k   n  converged\n";
  for (const auto& r : cmp.rows) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%-10s %9.3f  %7.4f  %8.2f  %7.2f  %2d  %2d  %s%s\n",
                  to_string(r.model).c_str(), r.nll, r.rmse, r.aicc, r.delta_aicc,
                  r.k, r.n, r.converged ? "yes" : "no",
                  r.aicc_is_aic ? " (AIC: small sample)" : "");
    out << buf;
  }
  out << "winner: " << to_string(cmp.winner) << "\n";
  if (!cmp.asymmetries.empty()) {
    out << "\npredicted inter-generalization asymmetries\n";
    for (const auto& a : cmp.asymmetries) {
      char buf[80];
      std::snprintf(buf, sizeof buf, "  %-10s anchor %6.1f deg: %+.4f\n",
                    to_string(a.model).c_str(), a.group_deg, a.asymmetry);
      out << buf;
    }
  }
  return out.str();
}

void write_recovery_csv(const ModelRecoveryReport& report, const std::string& path) {
  auto out = open_out(path);
  out << "generator,seed,winner,delta_aicc\n";
  for (const auto& c : report.cases)
    out << to_string(c.generator) << ',' << c.seed << ',' << to_string(c.winner)
        << ',' << fmt(c.delta_aicc) << '\n';
}

std::string recovery_text(const ModelRecoveryReport& report) {
  std::ostringstream out;
  out << "model recovery: " << report.datasets_per_model
      << " datasets per generator, index noise sd " << report.noise_sd << "\n";
  char buf[120];
  std::snprintf(buf, sizeof buf,
                "  standard-generated:  %2d/%2d recovered (%.0f%%)\n",
                report.standard_recovered, report.datasets_per_model,
                100.0 * report.standard_rate());
  out << buf;
  std::snprintf(buf, sizeof buf,
                "  impedance-generated: %2d/%2d recovered (%.0f%%)\n",
                report.impedance_recovered, report.datasets_per_model,
                100.0 * report.impedance_rate());
  out << buf;
  return out.str();
}

std::string file_hash_hex(const std::string& path) {
  auto in = open_in(path);
  std::uint64_t h = 14695981039346656037ULL;
  char buf[1 << 14];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    const std::streamsize n = in.gcount();
    for (std::streamsize i = 0; i < n; ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 1099511628211ULL;
    }
    if (!in) break;
  }
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016" PRIx64, h);
  return std::string(hex);
}

void write_manifest(const ExperimentConfig& config,
                    const std::vector<std::string>& produced_files,
                    const std::string& path) {
  json j;
  j["config"] = json::parse(config.to_json_text());
  j["seeds"] = {{"protocol", config.protocol_seed}, {"noise", config.noise_seed}};
  json files = json::array();
  for (const auto& f : produced_files) {
    json entry;
    entry["path"] = std::filesystem::path(f).filename().string();
    entry["fnv1a64"] = file_hash_hex(f);
    entry["bytes"] = std::filesystem::file_size(f);
    files.push_back(entry);
  }
  j["files"] = files;
  auto out = open_out(path);
  out << j.dump(2) << "\n";
}

std::shared_ptr<BaselineSet> import_baselines(
    const std::string& path, const std::vector<double>& required_directions) {
  auto in = open_in(path);
  std::string line;
  if (!std::getline(in, line)) throw SchemaError(path + ": empty file");
  const auto header = split_csv(line);
  std::size_t t_col = 0, x_col = 0, y_col = 0, dir_col = 0;
  bool found_t = false, found_x = false, found_y = false, found_dir = false;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == "t") { t_col = i; found_t = true; }
    if (header[i] == "x") { x_col = i; found_x = true; }
    if (header[i] == "y") { y_col = i; found_y = true; }
    if (header[i] == "direction" || header[i] == "direction_deg") {
      dir_col = i;
      found_dir = true;
    }
  }
  if (!(found_t && found_x && found_y && found_dir))
    throw SchemaError(path + ": need columns direction,t,x,y (trial-record "
                             "columns vx..q2 are accepted and ignored)");

  std::map<int, std::vector<std::pair<double, Vec2>>> by_dir;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto cols = split_csv(line);
    if (cols.size() != header.size())
      throw SchemaError(path + ": ragged row '" + line + "'");
    const int dir = static_cast<int>(
        std::llround(wrap_deg(parse_double(cols[dir_col], "direction"))));
    by_dir[dir].emplace_back(parse_double(cols[t_col], "t"),
                             Vec2(parse_double(cols[x_col], "x"),
                                  parse_double(cols[y_col], "y")));
  }

  auto set = std::make_shared<BaselineSet>();
  for (auto& [dir, samples] : by_dir) {
    std::sort(samples.begin(), samples.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    if (samples.size() < 20)
      throw TooShortSeriesError(path + ": direction " + std::to_string(dir) +
                                " has " + std::to_string(samples.size()) +
                                " samples, need >= 20");
    const double dt = samples[1].first - samples[0].first;
    if (!(dt > 0.0))
      throw SchemaError(path + ": non-increasing time for direction " +
                        std::to_string(dir));
    for (std::size_t i = 1; i < samples.size(); ++i) {
      const double step = samples[i].first - samples[i - 1].first;
      if (std::abs(step - dt) > 1e-6)
        throw SchemaError(path + ": non-uniform sampling for direction " +
                          std::to_string(dir));
    }
    std::vector<double> ts;
    std::vector<Vec2> ps;
    ts.reserve(samples.size());
    ps.reserve(samples.size());
    for (const auto& [t, p] : samples) {
      ts.push_back(t);
      ps.push_back(p);
    }
    // velocities/accelerations via the analysis filter chain
    const double rate = 1.0 / dt;
    const auto vs = filtered_velocity(ps, rate);
    const auto as = filtered_velocity(vs, rate);
    set->set(dir, std::make_shared<SampledPlan>(std::move(ts), ps, vs, as));
  }

  for (double dir : required_directions) {
    const int key = static_cast<int>(std::llround(wrap_deg(dir)));
    if (!by_dir.count(key))
      throw MissingDataError(path + ": baseline trajectory for direction " +
                             std::to_string(key) + " deg is missing");
  }
  return set;
}

}  // namespace fieldgen
