#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <vector>

namespace demailly {

namespace detail {
class SpectralPlan;
}

/// Unit-square flat torus sampled at (j/n, k/n), carrying the area form
/// omega0 = total_area * dx^dy.
///
/// Grids are cheap handles: copies share the same transform plans.
class Grid {
 public:
  int n() const noexcept { return n_; }
  std::size_t size() const noexcept {
    return static_cast<std::size_t>(n_) * static_cast<std::size_t>(n_);
  }
  double total_area() const noexcept { return total_area_; }
  /// omega0-mass carried by one sample point.
  double cell_weight() const noexcept {
    return total_area_ / static_cast<double>(size());
  }
  double coordinate(int j) const noexcept {
    return static_cast<double>(j) / static_cast<double>(n_);
  }

  /// Eigenvalue of the Laplacian on the Fourier mode exp(2 pi i (kx x + ky y)).
  double laplacian_symbol(int kx, int ky) const noexcept;

  const detail::SpectralPlan& spectral() const noexcept { return *plan_; }

  friend bool operator==(const Grid& a, const Grid& b) noexcept {
    return a.n_ == b.n_ && a.total_area_ == b.total_area_;
  }

 private:
  Grid(int n, double total_area);
  friend Grid make_grid(int n, double total_area);

  int n_;
  double total_area_;
  std::shared_ptr<const detail::SpectralPlan> plan_;
};

/// Throws std::invalid_argument unless n is a power of two >= 8 and
/// total_area > 0.
Grid make_grid(int n, double total_area);

/// Real samples of a function on a Grid. Index (j, k) is the point
/// (j/n, k/n); storage is row-major in j.
class ScalarField {
 public:
  explicit ScalarField(const Grid& grid, double value = 0.0);
  ScalarField(const Grid& grid, std::vector<double> values);

  static ScalarField sample(const Grid& grid,
                            const std::function<double(double, double)>& fn);

  const Grid& grid() const noexcept { return grid_; }
  std::size_t size() const noexcept { return values_.size(); }

  std::span<const double> values() const noexcept { return values_; }
  std::span<double> values() noexcept { return values_; }

  double operator[](std::size_t i) const noexcept { return values_[i]; }
  double& operator[](std::size_t i) noexcept { return values_[i]; }
  double operator()(int j, int k) const noexcept {
    return values_[static_cast<std::size_t>(j) * grid_.n() + k];
  }
  double& operator()(int j, int k) noexcept {
    return values_[static_cast<std::size_t>(j) * grid_.n() + k];
  }

  double max() const noexcept;
  double min() const noexcept;
  double sup_norm() const noexcept;
  std::size_t argmax() const noexcept;
  std::size_t argmin() const noexcept;
  bool all_finite() const noexcept;

  template <class Fn>
  ScalarField map(Fn&& fn) const {
    ScalarField out(grid_, 0.0);
    for (std::size_t i = 0; i < values_.size(); ++i) out.values_[i] = fn(values_[i]);
    return out;
  }

  ScalarField& operator+=(const ScalarField& other);
  ScalarField& operator-=(const ScalarField& other);
  ScalarField& operator*=(const ScalarField& other);
  ScalarField& operator+=(double c) noexcept;
  ScalarField& operator*=(double c) noexcept;

 private:
  void require_same_grid(const ScalarField& other) const;

  Grid grid_;
  std::vector<double> values_;
};

ScalarField operator+(ScalarField a, const ScalarField& b);
ScalarField operator-(ScalarField a, const ScalarField& b);
ScalarField operator*(ScalarField a, const ScalarField& b);
ScalarField operator*(double c, ScalarField a);
ScalarField operator+(ScalarField a, double c);
ScalarField operator-(ScalarField a);

ScalarField exp(const ScalarField& v);
ScalarField log(const ScalarField& v);

/// sup_x |a(x) - b(x)|.
double sup_distance(const ScalarField& a, const ScalarField& b);

/// Laplacian normalised by omega0: (1 / (2 * total_area)) * (d_xx + d_yy),
/// evaluated spectrally. Non-positive at interior maxima.
ScalarField laplacian(const ScalarField& v);

/// Applies F(Delta) by multiplying each Fourier mode with F(symbol).
ScalarField apply_laplacian_function(const ScalarField& v,
                                     const std::function<double(double)>& fn);

/// Solves Delta w = v on zero-mean modes; the mean of v is discarded and w
/// has mean zero.
ScalarField inverse_laplacian(const ScalarField& v);

/// Average of v against omega0.
double mean_value(const ScalarField& v);

/// Integral of v against omega0.
double integrate(const ScalarField& v);

/// omega0-weighted inner product.
double inner(const ScalarField& a, const ScalarField& b);

/// Trigonometric interpolation of v onto a finer grid with the same area.
ScalarField fourier_interpolate(const ScalarField& v, const Grid& fine);

/// Translation-invariant Green kernel, values indexed by the offset x - y.
class GreenKernel {
 public:
  GreenKernel(const Grid& grid, std::vector<double> values);

  const Grid& grid() const noexcept { return grid_; }
  /// Kernel at offset (a/n, b/n), indices taken modulo n.
  double at(int a, int b) const noexcept;
  /// G(x, y) for grid points x = (j1, k1), y = (j2, k2).
  double operator()(int j1, int k1, int j2, int k2) const noexcept {
    return at(j1 - j2, k1 - k2);
  }
  std::span<const double> values() const noexcept { return values_; }

 private:
  Grid grid_;
  std::vector<double> values_;
};

/// Green kernel with Delta_y G(x, y) = delta_x(y) - 1/total_area, shifted so
/// that max G = 0.
GreenKernel greens_kernel(const Grid& grid);

/// Evaluates mean(v) + integral of G(x, y) Delta v(y) omega0(y) by direct
/// summation.
ScalarField green_reconstruct(const GreenKernel& kernel, const ScalarField& v);

}  // namespace demailly
