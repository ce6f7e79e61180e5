#pragma once

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "demailly/geometry.hpp"

namespace demailly {

/// One term amplitude * cos(2 pi kx x) * cos(2 pi ky y) of a curvature
/// perturbation. (kx, ky) = (0, 0) is not allowed.
struct CosineMode {
  double amplitude = 0.0;
  int kx = 0;
  int ky = 0;
};

/// Direct sum of line bundles L_1 + ... + L_r over the flat torus.
///
/// `perturbations[i]` lists the cosine terms of phi_i. An empty list (or an
/// empty vector altogether) means phi_i = 0. The phi_i must sum to zero
/// pointwise; this is verified by build_curvature.
struct BundleSpec {
  std::vector<int> degrees;
  std::vector<std::vector<CosineMode>> perturbations;

  int rank() const noexcept { return static_cast<int>(degrees.size()); }
  int total_degree() const noexcept;
  bool ample() const noexcept;
  bool unperturbed() const noexcept;

  /// phi_1 = +P, phi_2 = -P, phi_i = 0 otherwise, with
  /// P = amplitude * sum of cos(2 pi kx x) cos(2 pi ky y) over the modes.
  static BundleSpec cosine_pair(std::vector<int> degrees, double amplitude,
                                std::vector<std::pair<int, int>> modes);
};

/// Curvature densities rho_i and their trace-free parts s_i = rho_i - 1/r.
struct CurvatureData {
  std::vector<int> degrees;
  std::vector<ScalarField> rho;
  std::vector<ScalarField> s;

  int rank() const noexcept { return static_cast<int>(rho.size()); }
  int total_degree() const noexcept;
  const Grid& grid() const noexcept { return rho.front().grid(); }
  /// Pointwise Euclidean norm (sum_i s_i^2)^(1/2).
  ScalarField trace_free_norm() const;
};

/// Throws std::invalid_argument if the grid area is not the total degree, the
/// total degree is not positive, or the perturbations are not zero-mean and
/// zero-sum.
CurvatureData build_curvature(const BundleSpec& spec, const Grid& grid);

/// Iteration controls shared by the solvers and the march.
struct Tolerances {
  double newton_tol = 1e-9;
  /// Defaults to 1e-6 * (1 + alpha0) when unset.
  std::optional<double> cone_floor;
  int max_iters = 50;
  double dt0 = 0.05;
  double dt_floor = 1e-4;
  double ds0 = 0.25;
  double ds_floor = 1e-4;
  double max_f_update = 5.0;
};

/// Parameters before the t = 0 construction has fixed alpha0 and a0.
struct ParamsRequest {
  std::optional<double> lambda;
  std::optional<double> alpha0;
  double mu = 1.0;
  Tolerances tol;
};

struct DemaillyParams {
  double lambda;
  double alpha0;
  double mu = 1.0;
  ScalarField a0;
  Tolerances tol;

  double cone_floor() const noexcept {
    return tol.cone_floor.value_or(1e-6 * (1.0 + alpha0));
  }
};

/// f together with u_i = ln of the i-th diagonal entry of g.
struct State {
  ScalarField f;
  std::vector<ScalarField> u;
  double t = 0.0;

  int rank() const noexcept { return static_cast<int>(u.size()); }
  const Grid& grid() const noexcept { return f.grid(); }
  /// sup_x |sum_i u_i(x)|.
  double trace_defect() const;
};

/// sup over f and all u_i of the pointwise distance.
double state_distance(const State& a, const State& b);

/// Tangent direction (delta f, delta u_i) with sum_i delta u_i = 0.
struct Perturbation {
  ScalarField f;
  std::vector<ScalarField> u;
};

struct Residual {
  ScalarField f;
  std::vector<ScalarField> u;

  double sup_norm() const noexcept;
};

/// Cone factors M_i = Delta f + 1/r - e^(mu f) u_i + (1 - t) alpha0.
std::vector<ScalarField> cone_factors(const State& state, const DemaillyParams& params);

/// min over i and x of M_i. May be negative.
double cone_margin(const State& state, const DemaillyParams& params);

/// R_f = sum_i ln M_i - lambda f - ln a0 and
/// R_i = Delta u_i - s_i - e^(mu f) u_i.
/// Throws ConeViolation when some M_i <= cone_floor.
Residual residual(const State& state, const CurvatureData& curv, const DemaillyParams& params);

/// Unique v with v + A_i > 0 for all i and prod_i (v + A_i) = eta.
/// Throws std::invalid_argument unless eta > 0.
double l_inverse(std::span<const double> shifts, double eta);

/// Frechet derivative of residual() at a fixed state. Coefficients are
/// evaluated once so that repeated applications (Krylov solves) are cheap.
class Linearization {
 public:
  /// Throws ConeViolation like residual().
  Linearization(const State& state, const DemaillyParams& params);

  Residual apply(const Perturbation& p) const;

  /// Spatial means of the cone factors and of e^(mu f); used for
  /// constant-coefficient preconditioning.
  std::vector<double> mean_cone_factors() const;
  double mean_exp_f() const { return mean_value(exp_f_); }
  double lambda() const noexcept { return lambda_; }

 private:
  double lambda_;
  ScalarField exp_f_;                     // e^(mu f)
  std::vector<ScalarField> f_coupling_;   // mu e^(mu f) u_i
  std::vector<ScalarField> inv_factors_;  // 1 / M_i
  std::vector<double> factor_means_;
};

/// Frechet derivative of residual() at `state` applied to `p`.
Residual apply_linearization(const State& state, const CurvatureData& curv,
                             const DemaillyParams& params, const Perturbation& p);

}  // namespace demailly
