#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <tuple>
#include <vector>

#include "demailly/geometry.hpp"
#include "demailly/model.hpp"

namespace demailly::testing {

inline constexpr double kPi = std::numbers::pi;

inline BundleSpec constant_spec(std::vector<int> degrees) {
  BundleSpec spec;
  spec.perturbations.assign(degrees.size(), {});
  spec.degrees = std::move(degrees);
  return spec;
}

inline ParamsRequest fixed_params(double lambda, double alpha0) {
  ParamsRequest req;
  req.lambda = lambda;
  req.alpha0 = alpha0;
  return req;
}

/// Sum of a few low Fourier modes with random coefficients, sup-norm scaled
/// to `amplitude` and zero mean.
inline ScalarField random_band_limited(const Grid& grid, std::mt19937_64& rng, double amplitude,
                                       int max_mode = 3) {
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * kPi);
  std::vector<std::tuple<int, int, double, double>> modes;
  for (int kx = -max_mode; kx <= max_mode; ++kx) {
    for (int ky = 0; ky <= max_mode; ++ky) {
      if (kx == 0 && ky == 0) continue;
      modes.emplace_back(kx, ky, coef(rng), phase(rng));
    }
  }
  ScalarField v = ScalarField::sample(grid, [&](double x, double y) {
    double s = 0.0;
    for (const auto& [kx, ky, a, p] : modes) s += a * std::cos(2.0 * kPi * (kx * x + ky * y) + p);
    return s;
  });
  v += -mean_value(v);
  v *= amplitude / v.sup_norm();
  return v;
}

inline double relative_sup(const ScalarField& a, const ScalarField& b) {
  return sup_distance(a, b) / std::max(1e-300, std::max(a.sup_norm(), b.sup_norm()));
}

}  // namespace demailly::testing
