#include "demailly/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

#include "demailly/errors.hpp"
#include "demailly/solvers.hpp"

namespace demailly {

bool DiagnosticsRecord::passed() const noexcept {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed(); });
}

std::vector<std::string> DiagnosticsRecord::failures() const {
  std::vector<std::string> out;
  for (const auto& c : checks) {
    if (c.passed()) continue;
    std::ostringstream msg;
    msg << c.name << ": " << c.value << (c.bound == Check::Bound::AtMost ? " > " : " < ")
        << c.threshold;
    out.push_back(msg.str());
  }
  return out;
}

std::vector<double> check_integral_identity(const State& state, const CurvatureData& curv,
                                            double mu) {
  const int r = curv.rank();
  const double d = curv.total_degree();
  const ScalarField exp_f = exp(mu * state.f);
  std::vector<double> errors;
  errors.reserve(r);
  for (int i = 0; i < r; ++i) {
    const double expected = d / r - curv.degrees[i];
    errors.push_back(std::abs(integrate(exp_f * state.u[i]) - expected));
  }
  return errors;
}

double check_uy_inequality(const State& state, const CurvatureData& curv, double mu) {
  ScalarField u_sq(state.grid(), 0.0);
  for (const auto& ui : state.u) u_sq += ui * ui;
  const ScalarField u_norm = u_sq.map([](double v) { return std::sqrt(v); });
  const ScalarField lhs = exp(mu * state.f) * u_sq - 0.5 * laplacian(u_sq);
  const ScalarField rhs = u_norm * curv.trace_free_norm();
  return (lhs - rhs).max();
}

BoundsRecord check_bounds(const State& state, const DemaillyParams& params) {
  const int r = state.rank();
  BoundsRecord b;
  b.min_f = state.f.min();
  b.max_f = state.f.max();
  b.max_exp_lambda_f = std::exp(params.lambda * b.max_f);

  const std::size_t at = state.f.argmax();
  const ScalarField lap_f = laplacian(state.f);
  b.laplacian_at_max = lap_f[at];
  b.laplacian_slack = 1.0 + lap_f.sup_norm();

  const double ef = std::exp(params.mu * b.max_f);
  double product = 1.0;
  for (int i = 0; i < r; ++i) {
    product *= 1.0 / r - ef * state.u[i][at] + (1.0 - state.t) * params.alpha0;
  }
  b.product_excess = (b.max_exp_lambda_f * params.a0[at] - product) / std::abs(product);
  return b;
}

DiagnosticsRecord diagnose(const State& state, const CurvatureData& curv,
                           const DemaillyParams& params, const DiagnosticThresholds& th) {
  DiagnosticsRecord rec;
  rec.t = state.t;
  try {
    rec.residual = residual(state, curv, params).sup_norm();
  } catch (const ConeViolation&) {
    rec.residual = std::numeric_limits<double>::infinity();
  }
  rec.identity_errors = check_integral_identity(state, curv, params.mu);
  rec.uy_violation = check_uy_inequality(state, curv, params.mu);
  rec.cone_margin = cone_margin(state, params);
  rec.trace_defect = state.trace_defect();
  rec.bounds = check_bounds(state, params);
  const ScalarField exp_f = exp(params.mu * state.f);
  for (const auto& ui : state.u) rec.weighted_u_sup += (exp_f * ui).sup_norm();

  using B = Check::Bound;
  const double s_sup = curv.trace_free_norm().sup_norm();
  rec.checks.push_back({"residual", rec.residual, params.tol.newton_tol, B::AtMost});
  for (std::size_t i = 0; i < rec.identity_errors.size(); ++i) {
    rec.checks.push_back(
        {"integral_identity_" + std::to_string(i + 1), rec.identity_errors[i], th.identity, B::AtMost});
  }
  rec.checks.push_back({"uy_inequality", rec.uy_violation, th.uy * (1.0 + s_sup * s_sup), B::AtMost});
  rec.checks.push_back({"trace", rec.trace_defect, th.trace, B::AtMost});
  rec.checks.push_back({"cone_margin", rec.cone_margin, params.cone_floor(), B::AtLeast});
  rec.checks.push_back({"max_point_laplacian", rec.bounds.laplacian_at_max,
                        th.max_point_laplacian * rec.bounds.laplacian_slack, B::AtMost});
  rec.checks.push_back({"max_point_upper_bound", rec.bounds.product_excess, th.product_excess, B::AtMost});
  // NaN never passes an ordered comparison, so it shows up as a failure.
  return rec;
}

// --- multistart ---------------------------------------------------------------

namespace {

ScalarField random_band_limited(const Grid& grid, int max_mode, double sup, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> coeff(-1.0, 1.0);
  ScalarField out(grid, 0.0);
  for (int kx = 0; kx <= max_mode; ++kx) {
    for (int ky = -max_mode; ky <= max_mode; ++ky) {
      if (kx == 0 && ky <= 0) continue;
      const double a = coeff(rng);
      const double b = coeff(rng);
      out += ScalarField::sample(grid, [&](double x, double y) {
        const double phase = 2.0 * std::numbers::pi * (kx * x + ky * y);
        return a * std::cos(phase) + b * std::sin(phase);
      });
    }
  }
  const double norm = out.sup_norm();
  if (norm > 0.0) out *= sup / norm;
  return out;
}

}  // namespace

MultistartResult multistart_uniqueness(const CurvatureData& curv, const DemaillyParams& params,
                                       int k, const MultistartOptions& options) {
  if (k < 2) throw std::invalid_argument("multistart_uniqueness: k must be >= 2");
  const Grid& grid = curv.grid();
  const int r = curv.rank();

  State base{ScalarField(grid, 0.0), v_step(ScalarField(grid, 0.0), curv, params.mu), 0.0};
  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> scale(0.25, 1.0);

  std::vector<State> starts{base};
  while (static_cast<int>(starts.size()) < k) {
    State start = base;
    bool admissible = options.amplitude == 0.0;
    for (int draw = 0; draw < options.max_draws && !admissible; ++draw) {
      start = base;
      start.f += random_band_limited(grid, options.max_mode, options.amplitude * scale(rng), rng);
      for (int i = 0; i + 1 < r; ++i) {
        start.u[i] +=
            random_band_limited(grid, options.max_mode, options.amplitude * scale(rng), rng);
      }
      if (r > 1) {
        // Keep the trace zero; the last component absorbs the others.
        ScalarField last(grid, 0.0);
        for (int i = 0; i + 1 < r; ++i) last -= start.u[i];
        if (sup_distance(last, base.u.back()) > options.amplitude) continue;
        start.u.back() = std::move(last);
      }
      admissible = cone_margin(start, params) > params.cone_floor();
    }
    if (!admissible) throw std::runtime_error("multistart_uniqueness: no admissible start drawn");
    starts.push_back(std::move(start));
  }

  MultistartResult result;
  for (std::size_t j = 0; j < starts.size(); ++j) {
    try {
      auto solved = newton_at_t(starts[j], 0.0, curv, params);
      result.solutions.push_back(std::move(solved.state));
      ++result.converged;
    } catch (const SolverError& e) {
      result.failures.push_back("start " + std::to_string(j) + ": " + e.what());
    }
  }
  for (std::size_t a = 0; a < result.solutions.size(); ++a) {
    for (std::size_t b = a + 1; b < result.solutions.size(); ++b) {
      result.max_gap = std::max(result.max_gap, state_distance(result.solutions[a], result.solutions[b]));
    }
  }
  return result;
}

}  // namespace demailly
