#pragma once

#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "demailly/geometry.hpp"

namespace demailly::testing {

/// Dense Fourier differentiation matrix for the torus Laplacian, assembled
/// from the trigonometric sums directly (no FFT). Row-major (j, k) ordering.
inline Eigen::MatrixXd dense_laplacian(int n, double area) {
  const double pi = std::numbers::pi;
  Eigen::MatrixXd d2(n, n);
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      double s = 0.0;
      for (int k = -n / 2 + 1; k <= n / 2; ++k) {
        s += -4.0 * pi * pi * k * k * std::cos(2.0 * pi * k * (a - b) / n);
      }
      d2(a, b) = s / n;
    }
  }
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd lap(n * n, n * n);
  for (int j1 = 0; j1 < n; ++j1) {
    for (int k1 = 0; k1 < n; ++k1) {
      for (int j2 = 0; j2 < n; ++j2) {
        for (int k2 = 0; k2 < n; ++k2) {
          lap(j1 * n + k1, j2 * n + k2) = d2(j1, j2) * id(k1, k2) + id(j1, j2) * d2(k1, k2);
        }
      }
    }
  }
  return lap / (2.0 * area);
}

inline Eigen::VectorXd to_eigen(const ScalarField& v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out(static_cast<Eigen::Index>(i)) = v[i];
  return out;
}

}  // namespace demailly::testing
