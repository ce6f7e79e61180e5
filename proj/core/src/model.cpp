#include "demailly/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "demailly/errors.hpp"

namespace demailly {

namespace {

ScalarField cosine_series(const Grid& grid, const std::vector<CosineMode>& modes) {
  ScalarField out(grid, 0.0);
  for (const auto& m : modes) {
    if (m.kx == 0 && m.ky == 0) {
      throw std::invalid_argument("perturbation mode (0,0) is not zero-mean");
    }
    out += ScalarField::sample(grid, [&](double x, double y) {
      return m.amplitude * std::cos(2.0 * std::numbers::pi * m.kx * x) *
             std::cos(2.0 * std::numbers::pi * m.ky * y);
    });
  }
  return out;
}

void require_compatible(const State& state, const DemaillyParams& params) {
  if (state.u.empty()) throw std::invalid_argument("state has rank zero");
  if (!(state.f.grid() == params.a0.grid())) {
    throw std::invalid_argument("state and parameters live on different grids");
  }
}

[[noreturn]] void throw_cone(double margin, double floor) {
  std::ostringstream msg;
  msg << "cone condition violated: margin " << margin << " <= floor " << floor;
  throw ConeViolation(msg.str(), margin);
}

}  // namespace

// --- BundleSpec -----------------------------------------------------------

int BundleSpec::total_degree() const noexcept {
  return std::accumulate(degrees.begin(), degrees.end(), 0);
}

bool BundleSpec::ample() const noexcept {
  return std::all_of(degrees.begin(), degrees.end(), [](int d) { return d > 0; });
}

bool BundleSpec::unperturbed() const noexcept {
  for (const auto& list : perturbations) {
    for (const auto& m : list) {
      if (m.amplitude != 0.0) return false;
    }
  }
  return true;
}

BundleSpec BundleSpec::cosine_pair(std::vector<int> degrees, double amplitude,
                                   std::vector<std::pair<int, int>> modes) {
  BundleSpec spec;
  spec.degrees = std::move(degrees);
  spec.perturbations.assign(spec.degrees.size(), {});
  if (amplitude != 0.0 && !modes.empty()) {
    if (spec.degrees.size() < 2) {
      throw std::invalid_argument("a cosine pair perturbation needs rank >= 2");
    }
    for (auto [kx, ky] : modes) {
      spec.perturbations[0].push_back({amplitude, kx, ky});
      spec.perturbations[1].push_back({-amplitude, kx, ky});
    }
  }
  return spec;
}

// --- CurvatureData --------------------------------------------------------

int CurvatureData::total_degree() const noexcept {
  return std::accumulate(degrees.begin(), degrees.end(), 0);
}

ScalarField CurvatureData::trace_free_norm() const {
  ScalarField sq(grid(), 0.0);
  for (const auto& si : s) sq += si * si;
  return sq.map([](double v) { return std::sqrt(v); });
}

CurvatureData build_curvature(const BundleSpec& spec, const Grid& grid) {
  const int r = spec.rank();
  if (r < 1) throw std::invalid_argument("bundle rank must be >= 1");
  const int d = spec.total_degree();
  if (d <= 0) throw std::invalid_argument("total degree must be positive");
  if (grid.total_area() != static_cast<double>(d)) {
    throw std::invalid_argument("grid area must equal the total degree");
  }
  if (!spec.perturbations.empty() && static_cast<int>(spec.perturbations.size()) != r) {
    throw std::invalid_argument("perturbation list length must equal the rank");
  }

  std::vector<ScalarField> phi;
  phi.reserve(r);
  for (int i = 0; i < r; ++i) {
    phi.push_back(spec.perturbations.empty() ? ScalarField(grid, 0.0)
                                             : cosine_series(grid, spec.perturbations[i]));
  }

  ScalarField total(grid, 0.0);
  for (const auto& p : phi) {
    if (std::abs(mean_value(p)) > 1e-12) {
      throw std::invalid_argument("perturbation is not zero-mean");
    }
    total += p;
  }
  if (total.sup_norm() > 1e-12) {
    throw std::invalid_argument("perturbations do not sum to zero");
  }

  CurvatureData curv;
  curv.degrees = spec.degrees;
  for (int i = 0; i < r; ++i) {
    ScalarField rho = phi[i] + static_cast<double>(spec.degrees[i]) / d;
    ScalarField s = rho + (-1.0 / r);
    curv.rho.push_back(std::move(rho));
    curv.s.push_back(std::move(s));
  }
  return curv;
}

// --- State ----------------------------------------------------------------

double State::trace_defect() const {
  ScalarField total(f.grid(), 0.0);
  for (const auto& ui : u) total += ui;
  return total.sup_norm();
}

double state_distance(const State& a, const State& b) {
  if (a.u.size() != b.u.size()) throw std::invalid_argument("state_distance: rank mismatch");
  double d = sup_distance(a.f, b.f);
  for (std::size_t i = 0; i < a.u.size(); ++i) d = std::max(d, sup_distance(a.u[i], b.u[i]));
  return d;
}

double Residual::sup_norm() const noexcept {
  double m = f.sup_norm();
  for (const auto& ui : u) m = std::max(m, ui.sup_norm());
  return m;
}

// --- cone -----------------------------------------------------------------

std::vector<ScalarField> cone_factors(const State& state, const DemaillyParams& params) {
  require_compatible(state, params);
  const int r = state.rank();
  const ScalarField lap_f = laplacian(state.f);
  const ScalarField exp_f = exp(params.mu * state.f);
  const double shift = 1.0 / r + (1.0 - state.t) * params.alpha0;
  std::vector<ScalarField> factors;
  factors.reserve(r);
  for (int i = 0; i < r; ++i) factors.push_back(lap_f - exp_f * state.u[i] + shift);
  return factors;
}

double cone_margin(const State& state, const DemaillyParams& params) {
  double margin = std::numeric_limits<double>::infinity();
  for (const auto& m : cone_factors(state, params)) margin = std::min(margin, m.min());
  return margin;
}

Residual residual(const State& state, const CurvatureData& curv, const DemaillyParams& params) {
  if (state.rank() != curv.rank()) throw std::invalid_argument("residual: rank mismatch");
  const auto factors = cone_factors(state, params);
  double margin = std::numeric_limits<double>::infinity();
  for (const auto& m : factors) margin = std::min(margin, m.min());
  // Written as !(>) so that NaN is rejected too.
  if (!(margin > params.cone_floor())) throw_cone(margin, params.cone_floor());

  ScalarField rf = -params.lambda * state.f - log(params.a0);
  for (const auto& m : factors) rf += log(m);

  const ScalarField exp_f = exp(params.mu * state.f);
  std::vector<ScalarField> ru;
  ru.reserve(state.rank());
  for (int i = 0; i < state.rank(); ++i) {
    ru.push_back(laplacian(state.u[i]) - curv.s[i] - exp_f * state.u[i]);
  }
  return {std::move(rf), std::move(ru)};
}

// --- L_A inverse ----------------------------------------------------------

double l_inverse(std::span<const double> shifts, double eta) {
  if (!(eta > 0.0) || !std::isfinite(eta)) throw std::invalid_argument("l_inverse: eta must be positive");
  if (shifts.empty()) throw std::invalid_argument("l_inverse: no shifts");
  if (shifts.size() == 1) return eta - shifts[0];

  const double a_min = *std::min_element(shifts.begin(), shifts.end());
  double a_abs = 0.0;
  for (double a : shifts) a_abs = std::max(a_abs, std::abs(a));
  const double r = static_cast<double>(shifts.size());
  const double log_eta = std::log(eta);

  // phi(v) = sum ln(v + A_i) - ln eta is increasing and concave on v > -min A.
  auto phi = [&](double v, double& slope) {
    double value = -log_eta;
    slope = 0.0;
    for (double a : shifts) {
      value += std::log(v + a);
      slope += 1.0 / (v + a);
    }
    return value;
  };

  double lo = -a_min;  // phi -> -inf here
  double hi = std::pow(eta, 1.0 / r) + a_abs;
  double slope = 0.0;
  // Start left of the root where Newton is monotone for a concave function.
  double v = -a_min + std::min(1.0, 0.5 * (hi + a_min));
  for (int iter = 0; iter < 200; ++iter) {
    const double value = phi(v, slope);
    if (value == 0.0) return v;
    if (value < 0.0) {
      lo = v;
    } else {
      hi = v;
    }
    double next = v - value / slope;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - v) <= 4.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(v))) {
      return next;
    }
    v = next;
  }
  return v;
}

// --- linearization --------------------------------------------------------

Linearization::Linearization(const State& state, const DemaillyParams& params)
    : lambda_(params.lambda), exp_f_(exp(params.mu * state.f)) {
  const auto factors = cone_factors(state, params);
  double margin = std::numeric_limits<double>::infinity();
  for (const auto& m : factors) margin = std::min(margin, m.min());
  if (!(margin > params.cone_floor())) throw_cone(margin, params.cone_floor());

  for (int i = 0; i < state.rank(); ++i) {
    f_coupling_.push_back(params.mu * (exp_f_ * state.u[i]));
    inv_factors_.push_back(factors[i].map([](double m) { return 1.0 / m; }));
    factor_means_.push_back(mean_value(factors[i]));
  }
}

std::vector<double> Linearization::mean_cone_factors() const { return factor_means_; }

Residual Linearization::apply(const Perturbation& p) const {
  const std::size_t r = inv_factors_.size();
  if (p.u.size() != r) throw std::invalid_argument("perturbation rank mismatch");
  const ScalarField lap_df = laplacian(p.f);

  ScalarField df = -lambda_ * p.f;
  std::vector<ScalarField> du;
  du.reserve(r);
  for (std::size_t i = 0; i < r; ++i) {
    // delta(e^(mu f) u_i)
    const ScalarField coupling = f_coupling_[i] * p.f + exp_f_ * p.u[i];
    df += inv_factors_[i] * (lap_df - coupling);
    du.push_back(laplacian(p.u[i]) - coupling);
  }
  return {std::move(df), std::move(du)};
}

Residual apply_linearization(const State& state, const CurvatureData& curv,
                             const DemaillyParams& params, const Perturbation& p) {
  if (state.rank() != curv.rank()) throw std::invalid_argument("linearization: rank mismatch");
  return Linearization(state, params).apply(p);
}

}  // namespace demailly
