#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "demailly/config.hpp"
#include "demailly/homotopy.hpp"

namespace demailly::app {

/// Process exit codes. Nothing else is ever returned by the runners.
enum ExitCode : int {
  kOk = 0,
  kInputError = 1,
  kBreakdown = 2,
  kDiagnosticFailure = 3,
};

struct SolveRun {
  int exit_code = kInputError;
  std::string reason;
  std::optional<MarchResult> result;
};

/// Runs solve_t0 and the march for `config`, writing into `out`:
///   summary.csv     one row per accepted t
///   report.json     parameters, accepted steps, rejections, outcome
///   config.txt      the canonical form of `config`
///   snapshots/      step_NNNN.snap for every accepted state
SolveRun solve_to_dir(const RunConfig& config, const std::filesystem::path& out,
                      std::ostream& log);

/// `out` empty means output.dir from the config.
int run_solve(const std::filesystem::path& config_path, const std::filesystem::path& out,
              std::ostream& log);

/// Prints the diagnostics document as JSON on `out`; failure reasons go to `log`.
int run_verify(const std::filesystem::path& snapshot_path,
               const std::filesystem::path& config_path, std::ostream& out, std::ostream& log);

/// Axis is one of alpha0, lambda, n, degrees. Scalar values are comma
/// separated; degree tuples are separated by ';' (e.g. "1,3;2,2;-1,5").
/// Every value gets its own run directory under `out`; the combined table is
/// written to out/sweep.csv and out/sweep.json. Returns kInputError for a bad
/// template, axis or value list and kOk otherwise; per-run outcomes are
/// recorded in the table.
int run_sweep(const std::filesystem::path& config_path, const std::string& axis,
              const std::string& values, const std::filesystem::path& out, std::ostream& log);

struct SweepEntry {
  std::string value;
  std::string run_dir;
  int exit_code = kInputError;
  std::string reason;
  bool reached_end = false;
  std::optional<double> breakdown_t;
  double final_t = 0.0;
  std::optional<double> final_min_f;
  std::optional<double> final_cone_margin;
  std::size_t accepted_steps = 0;
  std::size_t rejected_steps = 0;
  /// Largest sup distance to the closed form over accepted states (unperturbed data only).
  std::optional<double> closed_form_error;
  /// Axis n only: sup distance between this final state and the previous
  /// entry's final state interpolated onto the finer grid.
  std::optional<double> self_convergence;
};

/// The sweep itself, without writing the combined table.
std::vector<SweepEntry> sweep(const RunConfig& base, const std::string& axis,
                              const std::vector<std::string>& values,
                              const std::filesystem::path& out, std::ostream& log);

/// Splits a --values argument for the given axis.
std::vector<std::string> split_sweep_values(const std::string& axis, const std::string& values);

/// Returns `base` with the axis set to `value`; throws ConfigError.
RunConfig apply_axis(const RunConfig& base, const std::string& axis, const std::string& value);

}  // namespace demailly::app
