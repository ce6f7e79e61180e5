#pragma once

#include <vector>

#include "demailly/geometry.hpp"
#include "demailly/model.hpp"

namespace demailly {

/// Solves Delta w - c w = rhs for c > 0 pointwise.
///
/// Uses conjugate gradients on (c - Delta) with the constant-coefficient
/// operator (mean(c) - Delta) as spectral preconditioner, followed by
/// residual refinement until sup |Delta w - c w - rhs| <=
/// 1e-11 (|rhs|_inf + |w|_inf).
///
/// Throws std::invalid_argument if c <= 0 somewhere and LinearSolveFailure
/// if the tolerance is not reached.
ScalarField solve_helmholtz(const ScalarField& c, const ScalarField& rhs);

struct T0Solution {
  State state;
  DemaillyParams params;
};

/// The t = 0 construction: f = 0, u_i solves Delta u_i - u_i = s_i,
/// alpha0 = max(requested, 2, 2 max_i |u_i|_inf) and
/// a0 = prod_i (1/r + alpha0 - u_i). lambda defaults to 2r + 4.
///
/// Throws std::invalid_argument if lambda <= r.
T0Solution solve_t0(const CurvatureData& curv, const ParamsRequest& request);

/// The V operator: u_i = solve_helmholtz(e^(mu f), s_i).
std::vector<ScalarField> v_step(const ScalarField& f, const CurvatureData& curv,
                                double mu = 1.0);

struct UStepStats {
  int s_steps = 0;
  int newton_iterations = 0;
  double final_residual = 0.0;
};

/// The U operator: the solution of Delta U = L_A^{-1}(e^(lambda U) a0) with
/// A_i = 1/r + (1 - t) alpha0 - e^(mu f) u_i, reached along the path
/// Delta U = (1 - s)(U - f + Delta f) + s L_A^{-1}(e^(lambda U) a0)
/// starting from U = f at s = 0.
///
/// Throws PathStall if the path cannot be followed to s = 1.
ScalarField u_step(const ScalarField& f_in, const std::vector<ScalarField>& u, double t,
                   const CurvatureData& curv, const DemaillyParams& params,
                   UStepStats* stats = nullptr);

struct PicardResult {
  State state;
  /// sup distance between (f, u) and (U, V).
  double fixed_point_gap;
};

/// One step of the fixed-point iteration (f, u) -> (U, V) at fixed t.
PicardResult picard_step(const State& state, const CurvatureData& curv,
                         const DemaillyParams& params);

struct NewtonReport {
  int iterations = 0;
  double final_residual = 0.0;
  std::vector<double> step_lengths;
  /// Cone margin of the initial state and after each accepted step.
  std::vector<double> cone_margins;
  /// Residual sup-norm of the initial state and after each accepted step.
  std::vector<double> residuals;
  int krylov_iterations = 0;
  bool converged = false;
};

struct NewtonResult {
  State state;
  NewtonReport report;
};

/// Damped Newton-Krylov solve of the system at parameter t, starting from
/// `initial` (its own t is ignored). The unknowns are f and u_1..u_{r-1};
/// u_r = -sum_{i<r} u_i throughout.
///
/// Throws ConeViolation if `initial` is not admissible at t, NoDescent if
/// backtracking falls below 2^-20 and MaxIters if tol.max_iters is exhausted.
NewtonResult newton_at_t(const State& initial, double t, const CurvatureData& curv,
                         const DemaillyParams& params);

}  // namespace demailly
