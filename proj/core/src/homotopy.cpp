#include "demailly/homotopy.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "demailly/errors.hpp"

namespace demailly {

namespace {

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) {
    if (!out.empty()) out += "; ";
    out += s;
  }
  return out;
}

}  // namespace

MarchReport march_from(const T0Solution& start, const CurvatureData& curv,
                       const MarchObserver& observer) {
  using Clock = std::chrono::steady_clock;
  const DemaillyParams& params = start.params;
  MarchReport report;

  {
    const auto t0 = Clock::now();
    MarchStep first{0.0, start.state, {}, {}, 0.0};
    const double res = residual(start.state, curv, params).sup_norm();
    first.newton.final_residual = res;
    first.newton.residuals = {res};
    first.newton.cone_margins = {cone_margin(start.state, params)};
    first.newton.converged = res <= params.tol.newton_tol;
    first.diagnostics = diagnose(start.state, curv, params);
    first.wall_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    if (!first.diagnostics.passed()) {
      throw std::runtime_error("t=0 state fails diagnostics: " + join(first.diagnostics.failures()));
    }
    report.steps.push_back(std::move(first));
    if (observer) observer(report.steps.back());
  }

  double dt = params.tol.dt0;
  while (report.steps.back().t < 1.0) {
    const MarchStep& prev = report.steps.back();
    double t_try = prev.t + dt;
    // Absorb accumulated rounding so the schedule lands exactly on t = 1.
    if (t_try > 1.0 - 1e-9) t_try = 1.0;
    const auto t0 = Clock::now();
    std::string reason;
    try {
      auto solved = newton_at_t(prev.state, t_try, curv, params);
      DiagnosticsRecord diag = diagnose(solved.state, curv, params);
      if (diag.passed()) {
        const double wall = std::chrono::duration<double>(Clock::now() - t0).count();
        report.steps.push_back(MarchStep{t_try, std::move(solved.state), std::move(solved.report),
                                         std::move(diag), wall});
        if (observer) observer(report.steps.back());
        continue;
      }
      reason = "diagnostics failed: " + join(diag.failures());
    } catch (const SolverError& e) {
      reason = e.what();
    }

    report.rejected.push_back({prev.t, t_try, reason});
    if (dt <= params.tol.dt_floor) {
      report.breakdown_t = prev.t;
      report.breakdown_reason = reason;
      break;
    }
    dt = std::max(0.5 * dt, params.tol.dt_floor);
  }
  return report;
}

MarchResult march(const BundleSpec& spec, const ParamsRequest& request, const Grid& grid,
                  const MarchObserver& observer) {
  CurvatureData curv = build_curvature(spec, grid);
  T0Solution start = solve_t0(curv, request);
  MarchReport report = march_from(start, curv, observer);
  return {std::move(curv), std::move(start.params), std::move(report)};
}

State closed_form_state(const BundleSpec& spec, const DemaillyParams& params, double t) {
  if (!spec.unperturbed()) {
    throw std::invalid_argument("closed_form_state requires unperturbed curvature");
  }
  const int r = spec.rank();
  const double d = spec.total_degree();
  double log_ratio = 0.0;
  for (int di : spec.degrees) {
    const double factor = di / d + (1.0 - t) * params.alpha0;
    if (!(factor > 0.0)) {
      std::ostringstream msg;
      msg << "closed_form_state: cone factor " << factor << " at t=" << t;
      throw std::invalid_argument(msg.str());
    }
    log_ratio += std::log(factor) - std::log(di / d + params.alpha0);
  }
  const double f = log_ratio / params.lambda;
  const Grid& grid = params.a0.grid();
  State state{ScalarField(grid, f), {}, t};
  for (int di : spec.degrees) {
    const double s = di / d - 1.0 / r;
    state.u.emplace_back(grid, -s * std::exp(-params.mu * f));
  }
  return state;
}

}  // namespace demailly
