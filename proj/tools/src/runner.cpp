#include "runner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "demailly/snapshot.hpp"

namespace demailly::app {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string degrees_text(const std::vector<int>& degrees) {
  std::string out;
  for (std::size_t i = 0; i < degrees.size(); ++i) {
    if (i > 0) out += ",";
    out += std::to_string(degrees[i]);
  }
  return out;
}

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json diagnostics_json(const DiagnosticsRecord& d) {
  json checks = json::array();
  for (const auto& c : d.checks) {
    checks.push_back({{"name", c.name},
                      {"value", c.value},
                      {"threshold", c.threshold},
                      {"bound", c.bound == Check::Bound::AtMost ? "at_most" : "at_least"},
                      {"passed", c.passed()}});
  }
  return {{"t", d.t},
          {"residual", d.residual},
          {"identity_errors", d.identity_errors},
          {"uy_violation", d.uy_violation},
          {"cone_margin", d.cone_margin},
          {"trace_defect", d.trace_defect},
          {"bounds",
           {{"min_f", d.bounds.min_f},
            {"max_f", d.bounds.max_f},
            {"max_exp_lambda_f", d.bounds.max_exp_lambda_f},
            {"laplacian_at_max", d.bounds.laplacian_at_max},
            {"laplacian_slack", d.bounds.laplacian_slack},
            {"product_excess", d.bounds.product_excess}}},
          {"weighted_u_sup", d.weighted_u_sup},
          {"checks", checks},
          {"passed", d.passed()},
          {"failures", d.failures()}};
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

std::string summary_header(int r) {
  std::string out = "t,min_f,max_f,cone_margin,newton_iterations,residual";
  for (int i = 1; i <= r; ++i) out += ",identity_err_" + std::to_string(i);
  out += ",uy_violation\n";
  return out;
}

std::string summary_row(const MarchStep& step) {
  const auto& d = step.diagnostics;
  std::string out = num(step.t) + "," + num(step.state.f.min()) + "," + num(step.state.f.max()) +
                    "," + num(d.cone_margin) + "," + std::to_string(step.newton.iterations) + "," +
                    num(d.residual);
  for (double e : d.identity_errors) out += "," + num(e);
  out += "," + num(d.uy_violation) + "\n";
  return out;
}

json step_json(const MarchStep& step, const std::string& snapshot) {
  return {{"t", step.t},
          {"snapshot", snapshot},
          {"newton_iterations", step.newton.iterations},
          {"krylov_iterations", step.newton.krylov_iterations},
          {"newton_residuals", step.newton.residuals},
          {"newton_step_lengths", step.newton.step_lengths},
          {"wall_seconds", step.wall_seconds},
          {"diagnostics", diagnostics_json(step.diagnostics)}};
}

std::string snapshot_name(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "step_%04zu.snap", index);
  return buf;
}

SolveRun input_error(std::ostream& log, const std::string& reason) {
  log << "error: " << reason << "\n";
  return {kInputError, reason, std::nullopt};
}

double final_state_distance(const State& a, const State& b) {
  const State& coarse = a.grid().n() <= b.grid().n() ? a : b;
  const State& fine = a.grid().n() <= b.grid().n() ? b : a;
  double out = sup_distance(fourier_interpolate(coarse.f, fine.grid()), fine.f);
  for (int i = 0; i < fine.rank(); ++i) {
    out = std::max(out, sup_distance(fourier_interpolate(coarse.u[i], fine.grid()), fine.u[i]));
  }
  return out;
}

json entry_json(const SweepEntry& e) {
  return {{"value", e.value},
          {"run_dir", e.run_dir},
          {"exit_code", e.exit_code},
          {"reason", e.reason},
          {"reached_t1", e.reached_end},
          {"breakdown_t", optional_json(e.breakdown_t)},
          {"final_t", e.final_t},
          {"final_min_f", optional_json(e.final_min_f)},
          {"final_cone_margin", optional_json(e.final_cone_margin)},
          {"accepted_steps", e.accepted_steps},
          {"rejected_steps", e.rejected_steps},
          {"closed_form_error", optional_json(e.closed_form_error)},
          {"self_convergence", optional_json(e.self_convergence)}};
}

bool is_sweep_axis(const std::string& axis) {
  return axis == "alpha0" || axis == "lambda" || axis == "n" || axis == "degrees";
}

std::string opt_num(const std::optional<double>& v) { return v ? num(*v) : std::string(); }

std::string csv_quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

SolveRun solve_to_dir(const RunConfig& config, const fs::path& out, std::ostream& log) {
  try {
    validate_config(config);
  } catch (const ConfigError& e) {
    return input_error(log, e.what());
  }

  std::error_code ec;
  fs::create_directories(out / "snapshots", ec);
  if (ec) return input_error(log, "cannot create output directory " + out.string());

  const int r = config.r;
  std::ofstream summary(out / "summary.csv", std::ios::binary | std::ios::trunc);
  if (!summary) return input_error(log, "cannot write " + (out / "summary.csv").string());
  summary << summary_header(r);

  double lambda = 0.0;
  double alpha0 = 0.0;
  json steps = json::array();
  const MarchObserver observer = [&](const MarchStep& step) {
    const std::string name = snapshot_name(steps.size());
    save_snapshot(out / "snapshots" / name, step.state, lambda, alpha0, config.degrees);
    summary << summary_row(step);
    summary.flush();
    steps.push_back(step_json(step, "snapshots/" + name));
    log << "t=" << step.t << " newton=" << step.newton.iterations
        << " residual=" << step.diagnostics.residual << " margin=" << step.diagnostics.cone_margin
        << "\n";
  };

  SolveRun run;
  json report;
  try {
    const BundleSpec spec = config.bundle_spec();
    const Grid grid = make_grid(config.n, config.total_degree());
    CurvatureData curv = build_curvature(spec, grid);
    T0Solution start = solve_t0(curv, config.params_request());
    lambda = start.params.lambda;
    alpha0 = start.params.alpha0;
    MarchReport march_report = march_from(start, curv, observer);

    json rejected = json::array();
    for (const auto& rj : march_report.rejected) {
      rejected.push_back({{"t_from", rj.t_from}, {"t_try", rj.t_try}, {"reason", rj.reason}});
    }
    run.exit_code = march_report.reached_end() ? kOk : kBreakdown;
    run.reason = march_report.reached_end() ? "reached t=1" : march_report.breakdown_reason;
    report = {{"status", march_report.reached_end() ? "completed" : "breakdown"},
              {"exit_code", run.exit_code},
              {"reached_t1", march_report.reached_end()},
              {"breakdown_t", optional_json(march_report.breakdown_t)},
              {"reason", run.reason},
              {"params",
               {{"lambda", lambda},
                {"alpha0", alpha0},
                {"mu", start.params.mu},
                {"a0_min", start.params.a0.min()},
                {"a0_max", start.params.a0.max()},
                {"cone_floor", start.params.cone_floor()},
                {"newton_tol", start.params.tol.newton_tol}}},
              {"config", format_config(config)},
              {"steps", steps},
              {"rejected", rejected}};
    run.result = MarchResult{std::move(curv), std::move(start.params), std::move(march_report)};
  } catch (const SnapshotError& e) {
    return input_error(log, e.what());
  } catch (const std::exception& e) {
    // The t = 0 construction itself failed; nothing was accepted.
    run.exit_code = kBreakdown;
    run.reason = std::string("t=0 construction failed: ") + e.what();
    report = {{"status", "breakdown"},
              {"exit_code", run.exit_code},
              {"reached_t1", false},
              {"breakdown_t", 0.0},
              {"reason", run.reason},
              {"config", format_config(config)},
              {"steps", steps},
              {"rejected", json::array()}};
  }

  try {
    write_text(out / "config.txt", format_config(config));
    write_text(out / "report.json", report.dump(2) + "\n");
  } catch (const std::exception& e) {
    return input_error(log, e.what());
  }
  if (run.exit_code == kBreakdown) log << "breakdown: " << run.reason << "\n";
  return run;
}

int run_solve(const fs::path& config_path, const fs::path& out, std::ostream& log) {
  RunConfig config;
  try {
    config = load_config(config_path);
  } catch (const ConfigError& e) {
    log << "error: " << e.what() << "\n";
    return kInputError;
  }
  const fs::path dir = out.empty() ? fs::path(config.output_dir) : out;
  if (dir.empty()) {
    log << "error: no output directory (pass --out or set output.dir)\n";
    return kInputError;
  }
  return solve_to_dir(config, dir, log).exit_code;
}

int run_verify(const fs::path& snapshot_path, const fs::path& config_path, std::ostream& out,
               std::ostream& log) {
  RunConfig config;
  std::optional<Snapshot> snap;
  try {
    config = load_config(config_path);
    snap = load_snapshot(snapshot_path);
  } catch (const std::exception& e) {
    log << "error: " << e.what() << "\n";
    return kInputError;
  }
  const auto& meta = snap->meta;
  if (meta.n != config.n || meta.r != config.r || meta.degrees != config.degrees) {
    log << "error: snapshot (n=" << meta.n << ", r=" << meta.r << ", degrees="
        << degrees_text(meta.degrees) << ") does not match the config\n";
    return kInputError;
  }
  if (!(meta.t >= 0.0 && meta.t <= 1.0)) {
    log << "error: snapshot t=" << meta.t << " outside [0, 1]\n";
    return kInputError;
  }

  DiagnosticsRecord record;
  try {
    const CurvatureData curv = build_curvature(config.bundle_spec(), snap->state.grid());
    ParamsRequest request = config.params_request();
    request.lambda = meta.lambda;
    request.alpha0 = meta.alpha0;
    T0Solution t0 = solve_t0(curv, request);
    if (std::abs(t0.params.alpha0 - meta.alpha0) > 1e-12 * meta.alpha0) {
      log << "error: snapshot alpha0=" << meta.alpha0
          << " is below the admissible value " << t0.params.alpha0 << " for this config\n";
      return kInputError;
    }
    record = diagnose(snap->state, curv, t0.params);
  } catch (const std::exception& e) {
    log << "error: " << e.what() << "\n";
    return kInputError;
  }
  out << diagnostics_json(record).dump(2) << "\n";
  if (record.passed()) return kOk;
  for (const auto& f : record.failures()) log << "failed: " << f << "\n";
  return kDiagnosticFailure;
}

std::vector<std::string> split_sweep_values(const std::string& axis, const std::string& values) {
  const char sep = axis == "degrees" ? ';' : ',';
  std::vector<std::string> out;
  std::stringstream in(values);
  std::string item;
  while (std::getline(in, item, sep)) {
    const auto first = item.find_first_not_of(" \t()");
    if (first == std::string::npos) continue;
    const auto last = item.find_last_not_of(" \t()");
    out.push_back(item.substr(first, last - first + 1));
  }
  return out;
}

RunConfig apply_axis(const RunConfig& base, const std::string& axis, const std::string& value) {
  if (!is_sweep_axis(axis)) throw ConfigError("unknown sweep axis '" + axis + "'");
  const std::string key = axis == "n" ? "grid.n" : axis == "degrees" ? "bundle.degrees"
                                                   : "params." + axis;
  std::string text;
  std::istringstream lines(format_config(base));
  std::string line;
  while (std::getline(lines, line)) {
    const std::string name = line.substr(0, line.find(" ="));
    if (name == key || (axis == "degrees" && name == "bundle.r")) continue;
    text += line + "\n";
  }
  text += key + " = " + value + "\n";
  if (axis == "degrees") {
    text += "bundle.r = " +
            std::to_string(std::count(value.begin(), value.end(), ',') + 1) + "\n";
  }
  return parse_config(text);
}

std::vector<SweepEntry> sweep(const RunConfig& base, const std::string& axis,
                              const std::vector<std::string>& values, const fs::path& out,
                              std::ostream& log) {
  std::vector<SweepEntry> entries;
  std::optional<State> previous_final;
  for (std::size_t i = 0; i < values.size(); ++i) {
    SweepEntry e;
    e.value = values[i];
    std::string tag = values[i];
    for (char& c : tag) {
      if (c == ',') c = '_';
    }
    e.run_dir = axis + "_" + std::to_string(i) + "_" + tag;
    log << "== " << axis << " = " << values[i] << "\n";

    RunConfig config;
    try {
      config = apply_axis(base, axis, values[i]);
    } catch (const ConfigError& err) {
      e.reason = err.what();
      log << "error: " << e.reason << "\n";
      entries.push_back(std::move(e));
      previous_final.reset();
      continue;
    }

    SolveRun run = solve_to_dir(config, out / e.run_dir, log);
    e.exit_code = run.exit_code;
    e.reason = run.reason;
    if (run.result) {
      const MarchReport& rep = run.result->report;
      e.reached_end = rep.reached_end();
      e.breakdown_t = rep.breakdown_t;
      e.accepted_steps = rep.steps.size();
      e.rejected_steps = rep.rejected.size();
      const MarchStep& last = rep.steps.back();
      e.final_t = last.t;
      e.final_min_f = last.state.f.min();
      e.final_cone_margin = last.diagnostics.cone_margin;

      const BundleSpec spec = config.bundle_spec();
      if (spec.unperturbed()) {
        try {
          double worst = 0.0;
          for (const auto& step : rep.steps) {
            worst = std::max(worst, state_distance(
                                        step.state,
                                        closed_form_state(spec, run.result->params, step.t)));
          }
          e.closed_form_error = worst;
        } catch (const std::invalid_argument&) {
        }
      }
      if (axis == "n" && previous_final && previous_final->t == last.t &&
          previous_final->rank() == last.state.rank()) {
        e.self_convergence = final_state_distance(*previous_final, last.state);
      }
      previous_final = last.state;
    } else {
      previous_final.reset();
    }
    entries.push_back(std::move(e));
  }
  return entries;
}

int run_sweep(const fs::path& config_path, const std::string& axis, const std::string& values,
              const fs::path& out, std::ostream& log) {
  if (!is_sweep_axis(axis)) {
    log << "error: unknown sweep axis '" << axis << "' (expected alpha0, lambda, n or degrees)\n";
    return kInputError;
  }
  const std::vector<std::string> list = split_sweep_values(axis, values);
  if (list.empty()) {
    log << "error: --values is empty\n";
    return kInputError;
  }
  RunConfig base;
  try {
    base = load_config(config_path);
  } catch (const ConfigError& e) {
    log << "error: " << e.what() << "\n";
    return kInputError;
  }
  const fs::path dir = out.empty() ? fs::path(base.output_dir) : out;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (dir.empty() || ec) {
    log << "error: cannot create output directory '" << dir.string() << "'\n";
    return kInputError;
  }

  const auto entries = sweep(base, axis, list, dir, log);
  std::string csv =
      "axis,value,exit_code,reached_t1,breakdown_t,final_t,final_min_f,final_cone_margin,"
      "accepted_steps,rejected_steps,closed_form_error,self_convergence,reason\n";
  json doc = {{"axis", axis}, {"runs", json::array()}};
  for (const auto& e : entries) {
    csv += axis + "," + csv_quote(e.value) + "," + std::to_string(e.exit_code) + "," +
           (e.reached_end ? "1" : "0") + "," + opt_num(e.breakdown_t) + "," + num(e.final_t) +
           "," + opt_num(e.final_min_f) + "," + opt_num(e.final_cone_margin) + "," +
           std::to_string(e.accepted_steps) + "," + std::to_string(e.rejected_steps) + "," +
           opt_num(e.closed_form_error) + "," + opt_num(e.self_convergence) + "," +
           csv_quote(e.reason) + "\n";
    doc["runs"].push_back(entry_json(e));
  }
  try {
    write_text(dir / "sweep.csv", csv);
    write_text(dir / "sweep.json", doc.dump(2) + "\n");
  } catch (const std::exception& e) {
    log << "error: " << e.what() << "\n";
    return kInputError;
  }
  return kOk;
}

}  // namespace demailly::app
