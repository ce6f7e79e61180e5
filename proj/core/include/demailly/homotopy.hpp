#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "demailly/diagnostics.hpp"
#include "demailly/model.hpp"
#include "demailly/solvers.hpp"

namespace demailly {

struct MarchStep {
  double t = 0.0;
  State state;
  NewtonReport newton;
  DiagnosticsRecord diagnostics;
  double wall_seconds = 0.0;
};

/// A step attempt that was rejected and led to halving dt.
struct RejectedStep {
  double t_from = 0.0;
  double t_try = 0.0;
  std::string reason;
};

struct MarchReport {
  /// Accepted states, strictly increasing in t and starting at t = 0.
  std::vector<MarchStep> steps;
  std::vector<RejectedStep> rejected;
  /// Last accepted t when the march stopped short of t = 1.
  std::optional<double> breakdown_t;
  std::string breakdown_reason;

  bool reached_end() const noexcept { return !breakdown_t.has_value(); }
};

struct MarchResult {
  CurvatureData curvature;
  DemaillyParams params;
  MarchReport report;
};

/// Called after every accepted step.
using MarchObserver = std::function<void(const MarchStep&)>;

/// Continues the t = 0 solution to t = 1. Each step runs newton_at_t from the
/// previous accepted state (order-zero predictor) and accepts only converged
/// states that pass the diagnostics suite. dt starts at tol.dt0 and is halved
/// on every rejection, but not below tol.dt_floor; when a step of size
/// dt_floor is rejected the march records breakdown at the last accepted t
/// and stops.
///
/// Throws if the t = 0 construction fails.
MarchResult march(const BundleSpec& spec, const ParamsRequest& request, const Grid& grid,
                  const MarchObserver& observer = {});

/// Same, starting from an existing t = 0 construction.
MarchReport march_from(const T0Solution& start, const CurvatureData& curv,
                       const MarchObserver& observer = {});

/// Exact solution for unperturbed data: with d = deg E and s_i = d_i/d - 1/r,
/// f_t = (1/lambda) ln(prod_i(d_i/d + (1-t) alpha0) / prod_i(d_i/d + alpha0))
/// and u_i = -s_i e^(-mu f_t).
///
/// Throws std::invalid_argument for perturbed data or when some cone factor
/// d_i/d + (1-t) alpha0 is not positive.
State closed_form_state(const BundleSpec& spec, const DemaillyParams& params, double t);

}  // namespace demailly
