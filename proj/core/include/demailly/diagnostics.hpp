#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "demailly/model.hpp"

namespace demailly {

/// One measured quantity compared against a fixed threshold.
struct Check {
  enum class Bound { AtMost, AtLeast };

  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  Bound bound = Bound::AtMost;

  bool passed() const noexcept {
    return bound == Bound::AtMost ? value <= threshold : value >= threshold;
  }
};

/// Values measured at the maximum of f.
struct BoundsRecord {
  double min_f = 0.0;
  double max_f = 0.0;
  double max_exp_lambda_f = 0.0;
  /// Delta f at the grid argmax of f; a discrete maximum principle witness.
  double laplacian_at_max = 0.0;
  double laplacian_slack = 0.0;
  /// (e^(lambda f) a0 - prod_i (1/r - e^f u_i + (1-t) alpha0)) / prod_i(...)
  /// at the argmax of f; non-positive up to rounding on solutions.
  double product_excess = 0.0;
};

struct DiagnosticsRecord {
  double t = 0.0;
  double residual = 0.0;
  std::vector<double> identity_errors;
  double uy_violation = 0.0;
  double cone_margin = 0.0;
  double trace_defect = 0.0;
  BoundsRecord bounds;
  /// sum_i sup |u_i e^f|.
  double weighted_u_sup = 0.0;
  std::vector<Check> checks;

  bool passed() const noexcept;
  std::vector<std::string> failures() const;
};

/// |integral of e^(mu f) u_i omega0 - (deg E / r - d_i)| for each i.
std::vector<double> check_integral_identity(const State& state, const CurvatureData& curv,
                                            double mu = 1.0);

/// max_x (e^f |u|^2 - (1/2) Delta |u|^2 - |u| |s|).
double check_uy_inequality(const State& state, const CurvatureData& curv, double mu = 1.0);

BoundsRecord check_bounds(const State& state, const DemaillyParams& params);

/// Thresholds applied to converged states.
struct DiagnosticThresholds {
  double identity = 1e-6;
  /// Scaled by 1 + |s|_inf^2.
  double uy = 1e-8;
  double trace = 1e-10;
  /// Scaled by 1 + |Delta f|_inf.
  double max_point_laplacian = 1e-6;
  double product_excess = 1e-8;
};

/// Runs every check on `state`. The residual check uses tol.newton_tol; a
/// state outside the cone records an infinite residual instead of throwing.
DiagnosticsRecord diagnose(const State& state, const CurvatureData& curv,
                           const DemaillyParams& params, const DiagnosticThresholds& thresholds = {});

struct MultistartOptions {
  double amplitude = 0.1;
  std::uint64_t seed = 0;
  int max_mode = 2;
  int max_draws = 100;
};

struct MultistartResult {
  double max_gap = 0.0;
  int converged = 0;
  std::vector<std::string> failures;
  std::vector<State> solutions;
};

/// Runs newton_at_t at t = 0 from k starting points: the constructed t = 0
/// state and k - 1 band-limited random perturbations of it (sup-norm at most
/// `amplitude` in f and in each u_i). Inadmissible draws are redrawn.
/// Returns the maximal pairwise sup-distance among converged runs.
MultistartResult multistart_uniqueness(const CurvatureData& curv, const DemaillyParams& params,
                                       int k, const MultistartOptions& options = {});

}  // namespace demailly
