#include "demailly/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>

#include "demailly/errors.hpp"
#include "krylov.hpp"

namespace demailly {

namespace {

using detail::Vector;

constexpr double kHelmholtzTol = 1e-11;
constexpr int kBacktrackHalvings = 20;

ScalarField helmholtz_operator(const ScalarField& c, const ScalarField& w) {
  return laplacian(w) - c * w;
}

// Rebuilds u_r from the others so that sum_i u_i = 0 holds to rounding.
void close_trace(std::vector<ScalarField>& u) {
  if (u.size() < 2) {
    if (u.size() == 1) u[0] = ScalarField(u[0].grid(), 0.0);
    return;
  }
  ScalarField last(u.front().grid(), 0.0);
  for (std::size_t i = 0; i + 1 < u.size(); ++i) last -= u[i];
  u.back() = std::move(last);
}

struct NewtonLayout {
  std::size_t points;
  int rank;

  std::size_t size() const { return points * static_cast<std::size_t>(rank); }

  // Unknowns and equations: f, then u_1..u_{r-1}.
  Vector pack(const ScalarField& f, const std::vector<ScalarField>& u) const {
    Vector out(size());
    std::copy(f.values().begin(), f.values().end(), out.begin());
    for (int i = 0; i + 1 < rank; ++i) {
      std::copy(u[i].values().begin(), u[i].values().end(),
                out.begin() + static_cast<std::ptrdiff_t>((i + 1) * points));
    }
    return out;
  }

  Perturbation unpack(const Grid& grid, const Vector& x) const {
    auto block = [&](int b) {
      const auto first = x.begin() + static_cast<std::ptrdiff_t>(b * points);
      return ScalarField(grid, std::vector<double>(first, first + static_cast<std::ptrdiff_t>(points)));
    };
    Perturbation p{block(0), {}};
    for (int i = 0; i + 1 < rank; ++i) p.u.push_back(block(i + 1));
    p.u.emplace_back(grid, 0.0);
    close_trace(p.u);
    return p;
  }
};

// Moves along the Newton direction while updating the products e^(mu f) u_i
// linearly: u_i(alpha) = e^(-mu alpha df) (u_i + alpha (du_i + mu u_i df)).
// The tangent at alpha = 0 is the Newton step, and near the cone boundary the
// factors M_i no longer pick up the second order error of a plain u update.
State retract(const State& x, double alpha, const Perturbation& p, double mu) {
  State out = x;
  out.f += alpha * p.f;
  const ScalarField decay = exp((-mu * alpha) * p.f);
  for (std::size_t i = 0; i < out.u.size(); ++i) {
    out.u[i] = decay * (x.u[i] + alpha * (p.u[i] + mu * (x.u[i] * p.f)));
  }
  close_trace(out.u);
  return out;
}

double safe_cone_margin(const State& state, const DemaillyParams& params) {
  const double m = cone_margin(state, params);
  return std::isnan(m) ? -std::numeric_limits<double>::infinity() : m;
}

}  // namespace

// --- Helmholtz --------------------------------------------------------------

ScalarField solve_helmholtz(const ScalarField& c, const ScalarField& rhs) {
  if (!(c.grid() == rhs.grid())) throw std::invalid_argument("solve_helmholtz: grid mismatch");
  if (!(c.min() > 0.0) || !c.all_finite()) {
    throw std::invalid_argument("solve_helmholtz: coefficient must be positive and finite");
  }
  if (!rhs.all_finite()) throw std::invalid_argument("solve_helmholtz: rhs not finite");

  const Grid& grid = c.grid();
  const double c_mean = mean_value(c);
  const double rhs_norm = rhs.sup_norm();

  // (c - Delta) w = -rhs is symmetric positive definite.
  const detail::LinearOperator apply = [&](const Vector& x) {
    const ScalarField w(grid, x);
    const ScalarField out = c * w - laplacian(w);
    return Vector(out.values().begin(), out.values().end());
  };
  const detail::LinearOperator precondition = [&](const Vector& x) {
    const ScalarField out = apply_laplacian_function(
        ScalarField(grid, x), [c_mean](double l) { return 1.0 / (c_mean - l); });
    return Vector(out.values().begin(), out.values().end());
  };

  ScalarField w(grid, 0.0);
  double defect = 0.0;
  for (int pass = 0; pass < 6; ++pass) {
    const ScalarField r = rhs - helmholtz_operator(c, w);
    defect = r.sup_norm();
    const double target = kHelmholtzTol * (rhs_norm + w.sup_norm());
    if (defect <= target) return w;

    const ScalarField neg = -r;
    const Vector b(neg.values().begin(), neg.values().end());
    const double inner_target = 0.05 * target;
    auto stop = [&](const Vector&, const Vector& res) {
      double m = 0.0;
      for (double v : res) m = std::max(m, std::abs(v));
      return m <= inner_target;
    };
    const auto sol = detail::pcg(apply, precondition, b, stop, 500);
    w += ScalarField(grid, sol.x);
  }
  const ScalarField r = rhs - helmholtz_operator(c, w);
  defect = r.sup_norm();
  if (defect <= kHelmholtzTol * (rhs_norm + w.sup_norm())) return w;
  std::ostringstream msg;
  msg << "solve_helmholtz did not converge: residual " << defect;
  throw LinearSolveFailure(msg.str());
}

// --- t = 0 ------------------------------------------------------------------

T0Solution solve_t0(const CurvatureData& curv, const ParamsRequest& request) {
  const int r = curv.rank();
  const double lambda = request.lambda.value_or(2.0 * r + 4.0);
  if (!(lambda > r)) {
    std::ostringstream msg;
    msg << "lambda must exceed the rank: lambda=" << lambda << ", r=" << r;
    throw std::invalid_argument(msg.str());
  }
  const Grid& grid = curv.grid();

  std::vector<ScalarField> u = v_step(ScalarField(grid, 0.0), curv, request.mu);
  ScalarField trace(grid, 0.0);
  double u_max = 0.0;
  for (const auto& ui : u) {
    trace += ui;
    u_max = std::max(u_max, ui.sup_norm());
  }
  if (trace.sup_norm() > 1e-10) {
    throw std::logic_error("t=0 solution violates sum u_i = 0");
  }
  close_trace(u);

  const double alpha0 = std::max({request.alpha0.value_or(0.0), 2.0, 2.0 * u_max});
  ScalarField a0(grid, 1.0);
  for (const auto& ui : u) a0 *= (-ui + (1.0 / r + alpha0));
  if (!(a0.min() > 0.0)) throw std::logic_error("t=0 reference density is not positive");

  DemaillyParams params{lambda, alpha0, request.mu, std::move(a0), request.tol};
  State state{ScalarField(grid, 0.0), std::move(u), 0.0};
  return {std::move(state), std::move(params)};
}

// --- V and U operators ------------------------------------------------------

std::vector<ScalarField> v_step(const ScalarField& f, const CurvatureData& curv, double mu) {
  if (!f.all_finite()) throw std::invalid_argument("v_step: f is not finite");
  const ScalarField coeff = exp(mu * f);
  std::vector<ScalarField> u;
  u.reserve(curv.rank());
  for (const auto& si : curv.s) u.push_back(solve_helmholtz(coeff, si));
  return u;
}

namespace {

struct UPathPoint {
  ScalarField value;
  int newton_iterations;
  double residual;
};

// Newton solve of Delta U = (1 - s)(U - f + Delta f) + s L_A^{-1}(e^(lambda U) a0).
// Returns nothing on failure.
std::optional<UPathPoint> solve_u_path(const ScalarField& start, const ScalarField& f,
                                       const ScalarField& lap_f,
                                       const std::vector<std::vector<double>>& shifts, double s,
                                       const DemaillyParams& params) {
  const Grid& grid = start.grid();
  const std::size_t points = grid.size();
  const std::size_t r = shifts.size();
  std::vector<double> a(r);

  auto evaluate = [&](const ScalarField& U, ScalarField* kappa) -> std::optional<ScalarField> {
    ScalarField g = laplacian(U) - (1.0 - s) * (U - f + lap_f);
    for (std::size_t x = 0; x < points; ++x) {
      const double eta = std::exp(params.lambda * U[x]) * params.a0[x];
      if (!(eta > 0.0) || !std::isfinite(eta)) return std::nullopt;
      for (std::size_t i = 0; i < r; ++i) a[i] = shifts[i][x];
      const double v = l_inverse(a, eta);
      g[x] -= s * v;
      if (kappa != nullptr) {
        double harmonic = 0.0;
        for (std::size_t i = 0; i < r; ++i) harmonic += 1.0 / (v + a[i]);
        (*kappa)[x] = (1.0 - s) + s * params.lambda / harmonic;
      }
    }
    if (!g.all_finite()) return std::nullopt;
    return g;
  };

  ScalarField U = start;
  ScalarField kappa(grid, 0.0);
  auto g = evaluate(U, &kappa);
  if (!g) return std::nullopt;
  double norm = g->sup_norm();
  for (int iter = 0; iter <= params.tol.max_iters; ++iter) {
    if (norm <= params.tol.newton_tol) return UPathPoint{U, iter, norm};
    if (iter == params.tol.max_iters) break;
    ScalarField step(grid, 0.0);
    try {
      // Delta dU - kappa dU = -G.
      step = solve_helmholtz(kappa, -*g);
    } catch (const std::exception&) {
      return std::nullopt;
    }
    bool accepted = false;
    double alpha = 1.0;
    for (int h = 0; h <= kBacktrackHalvings; ++h, alpha *= 0.5) {
      ScalarField trial = U + alpha * step;
      ScalarField trial_kappa(grid, 0.0);
      auto trial_g = evaluate(trial, &trial_kappa);
      if (trial_g && trial_g->sup_norm() < norm) {
        U = std::move(trial);
        kappa = std::move(trial_kappa);
        g = std::move(trial_g);
        norm = g->sup_norm();
        accepted = true;
        break;
      }
    }
    if (!accepted) return std::nullopt;
  }
  return std::nullopt;
}

}  // namespace

ScalarField u_step(const ScalarField& f_in, const std::vector<ScalarField>& u, double t,
                   const CurvatureData& curv, const DemaillyParams& params, UStepStats* stats) {
  const int r = curv.rank();
  if (static_cast<int>(u.size()) != r) throw std::invalid_argument("u_step: rank mismatch");
  const Grid& grid = f_in.grid();
  const std::size_t points = grid.size();

  const ScalarField exp_f = exp(params.mu * f_in);
  const double base = 1.0 / r + (1.0 - t) * params.alpha0;
  std::vector<std::vector<double>> shifts(r, std::vector<double>(points));
  std::vector<ScalarField> shift_fields;
  for (int i = 0; i < r; ++i) {
    ScalarField a = -(exp_f * u[i]) + base;
    std::copy(a.values().begin(), a.values().end(), shifts[i].begin());
    shift_fields.push_back(std::move(a));
  }
  const ScalarField lap_f = laplacian(f_in);

  UStepStats local;
  ScalarField U = f_in;
  double s = 0.0;
  double ds = params.tol.ds0;
  double last_residual = 0.0;
  while (s < 1.0) {
    const double s_try = std::min(1.0, s + ds);
    auto point = solve_u_path(U, f_in, lap_f, shifts, s_try, params);
    bool admissible = false;
    if (point) {
      const ScalarField lap_u = laplacian(point->value);
      admissible = true;
      for (const auto& a : shift_fields) {
        if (!((lap_u + a).min() > 0.0)) {
          admissible = false;
          break;
        }
      }
    }
    if (point && admissible) {
      U = std::move(point->value);
      local.newton_iterations += point->newton_iterations;
      last_residual = point->residual;
      ++local.s_steps;
      s = s_try;
    } else {
      ds *= 0.5;
      if (ds < params.tol.ds_floor) {
        std::ostringstream msg;
        msg << "u_step: continuation stalled at s=" << s;
        throw PathStall(msg.str(), s);
      }
    }
  }
  local.final_residual = last_residual;
  if (stats != nullptr) *stats = local;
  return U;
}

PicardResult picard_step(const State& state, const CurvatureData& curv,
                         const DemaillyParams& params) {
  ScalarField U = u_step(state.f, state.u, state.t, curv, params);
  std::vector<ScalarField> V = v_step(state.f, curv, params.mu);
  double gap = sup_distance(state.f, U);
  for (std::size_t i = 0; i < V.size(); ++i) gap = std::max(gap, sup_distance(state.u[i], V[i]));
  close_trace(V);
  return {State{std::move(U), std::move(V), state.t}, gap};
}

// --- Newton at fixed t -------------------------------------------------------

NewtonResult newton_at_t(const State& initial, double t, const CurvatureData& curv,
                         const DemaillyParams& params) {
  const int r = curv.rank();
  if (initial.rank() != r) throw std::invalid_argument("newton_at_t: rank mismatch");
  const Grid& grid = initial.grid();
  const double floor = params.cone_floor();

  State x = initial;
  x.t = t;
  close_trace(x.u);

  NewtonReport report;
  const double margin0 = safe_cone_margin(x, params);
  if (!(margin0 > floor)) {
    std::ostringstream msg;
    msg << "newton_at_t: initial state outside the cone at t=" << t << " (margin " << margin0
        << ")";
    throw ConeViolation(msg.str(), margin0);
  }
  Residual res = residual(x, curv, params);
  double rnorm = res.sup_norm();
  report.cone_margins.push_back(margin0);
  report.residuals.push_back(rnorm);

  const NewtonLayout layout{grid.size(), r};

  for (int iter = 0;; ++iter) {
    report.iterations = iter;
    report.final_residual = rnorm;
    if (rnorm <= params.tol.newton_tol) {
      report.converged = true;
      return {std::move(x), std::move(report)};
    }
    if (iter == params.tol.max_iters) break;

    const Linearization jac(x, params);
    const auto means = jac.mean_cone_factors();
    double harmonic = 0.0;
    for (double m : means) harmonic += 1.0 / m;
    const double exp_mean = jac.mean_exp_f();
    const double lambda = params.lambda;

    const detail::LinearOperator apply = [&](const Vector& v) {
      const Residual out = jac.apply(layout.unpack(grid, v));
      return layout.pack(out.f, out.u);
    };
    const detail::LinearOperator precondition = [&](const Vector& v) {
      Perturbation p = layout.unpack(grid, v);
      ScalarField pf = apply_laplacian_function(
          p.f, [&](double l) { return 1.0 / (harmonic * l - lambda); });
      std::vector<ScalarField> pu;
      for (int i = 0; i + 1 < r; ++i) {
        pu.push_back(
            apply_laplacian_function(p.u[i], [&](double l) { return 1.0 / (l - exp_mean); }));
      }
      return layout.pack(pf, pu);
    };

    Vector rhs = layout.pack(res.f, res.u);
    double rhs_norm = 0.0;
    for (double& v : rhs) {
      v = -v;
      rhs_norm += v * v;
    }
    rhs_norm = std::sqrt(rhs_norm);
    const double forcing = std::min(1e-3, rnorm);
    const auto krylov = detail::gmres(apply, precondition, rhs, forcing * rhs_norm, 50, 500);
    report.krylov_iterations += krylov.iterations;

    const Perturbation step = layout.unpack(grid, krylov.x);
    const double df = step.f.sup_norm();
    double alpha = df > params.tol.max_f_update ? params.tol.max_f_update / df : 1.0;

    bool accepted = false;
    for (int h = 0; h <= kBacktrackHalvings; ++h, alpha *= 0.5) {
      State trial = retract(x, alpha, step, params.mu);
      const double margin = safe_cone_margin(trial, params);
      if (!(margin > floor)) continue;
      Residual trial_res = residual(trial, curv, params);
      const double trial_norm = trial_res.sup_norm();
      if (trial_norm < rnorm) {
        x = std::move(trial);
        res = std::move(trial_res);
        rnorm = trial_norm;
        report.step_lengths.push_back(alpha);
        report.cone_margins.push_back(margin);
        report.residuals.push_back(rnorm);
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      std::ostringstream msg;
      msg << "newton_at_t: no descent at t=" << t << " after " << iter
          << " iterations (residual " << rnorm << ")";
      throw NoDescent(msg.str());
    }
  }

  std::ostringstream msg;
  msg << "newton_at_t: residual " << rnorm << " above tolerance after " << params.tol.max_iters
      << " iterations at t=" << t;
  throw MaxIters(msg.str());
}

}  // namespace demailly
