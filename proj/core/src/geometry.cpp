#include "demailly/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>

#include "spectral_plan.hpp"

namespace demailly {

namespace detail {

namespace {

// The FFTW planner is not reentrant.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwFree {
  void operator()(void* p) const noexcept { fftw_free(p); }
};
template <class T>
using FftwBuffer = std::unique_ptr<T[], FftwFree>;

template <class T>
FftwBuffer<T> fftw_buffer(std::size_t count) {
  auto* p = static_cast<T*>(fftw_malloc(sizeof(T) * count));
  if (p == nullptr) throw std::bad_alloc();
  return FftwBuffer<T>(p);
}

}  // namespace

SpectralPlan::SpectralPlan(int n, double total_area) : n_(n) {
  const int h = half();
  symbols_.resize(static_cast<std::size_t>(n) * h);
  const double scale = -2.0 * std::numbers::pi * std::numbers::pi / total_area;
  for (int j = 0; j < n; ++j) {
    const double kx = wavenumber(j);
    for (int k = 0; k < h; ++k) {
      const double ky = k;
      symbols_[static_cast<std::size_t>(j) * h + k] = scale * (kx * kx + ky * ky);
    }
  }

  const std::size_t real_size = static_cast<std::size_t>(n) * n;
  auto real = fftw_buffer<double>(real_size);
  auto cplx = fftw_buffer<fftw_complex>(spectral_size());
  std::lock_guard lock(planner_mutex());
  forward_plan_ = fftw_plan_dft_r2c_2d(n, n, real.get(), cplx.get(), FFTW_ESTIMATE);
  backward_plan_ = fftw_plan_dft_c2r_2d(n, n, cplx.get(), real.get(), FFTW_ESTIMATE);
  if (forward_plan_ == nullptr || backward_plan_ == nullptr) {
    throw std::runtime_error("FFTW planning failed for n=" + std::to_string(n));
  }
}

SpectralPlan::~SpectralPlan() {
  std::lock_guard lock(planner_mutex());
  if (forward_plan_ != nullptr) fftw_destroy_plan(forward_plan_);
  if (backward_plan_ != nullptr) fftw_destroy_plan(backward_plan_);
}

std::vector<std::complex<double>> SpectralPlan::forward(std::span<const double> in) const {
  auto real = fftw_buffer<double>(in.size());
  auto cplx = fftw_buffer<fftw_complex>(spectral_size());
  std::copy(in.begin(), in.end(), real.get());
  fftw_execute_dft_r2c(forward_plan_, real.get(), cplx.get());
  std::vector<std::complex<double>> out(spectral_size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = {cplx[i][0], cplx[i][1]};
  return out;
}

std::vector<double> SpectralPlan::backward(std::span<const std::complex<double>> in) const {
  const std::size_t real_size = static_cast<std::size_t>(n_) * n_;
  auto real = fftw_buffer<double>(real_size);
  auto cplx = fftw_buffer<fftw_complex>(spectral_size());
  for (std::size_t i = 0; i < in.size(); ++i) {
    cplx[i][0] = in[i].real();
    cplx[i][1] = in[i].imag();
  }
  fftw_execute_dft_c2r(backward_plan_, cplx.get(), real.get());
  const double norm = 1.0 / static_cast<double>(real_size);
  std::vector<double> out(real_size);
  for (std::size_t i = 0; i < real_size; ++i) out[i] = real[i] * norm;
  return out;
}

}  // namespace detail

// --- Grid -----------------------------------------------------------------

Grid::Grid(int n, double total_area)
    : n_(n),
      total_area_(total_area),
      plan_(std::make_shared<const detail::SpectralPlan>(n, total_area)) {}

Grid make_grid(int n, double total_area) {
  if (n < 8 || (n & (n - 1)) != 0) {
    throw std::invalid_argument("grid size must be a power of two >= 8, got " +
                                std::to_string(n));
  }
  if (!(total_area > 0.0) || !std::isfinite(total_area)) {
    throw std::invalid_argument("total_area must be positive and finite");
  }
  return Grid(n, total_area);
}

double Grid::laplacian_symbol(int kx, int ky) const noexcept {
  return -2.0 * std::numbers::pi * std::numbers::pi *
         (static_cast<double>(kx) * kx + static_cast<double>(ky) * ky) / total_area_;
}

// --- ScalarField ----------------------------------------------------------

ScalarField::ScalarField(const Grid& grid, double value)
    : grid_(grid), values_(grid.size(), value) {}

ScalarField::ScalarField(const Grid& grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.size()) {
    throw std::invalid_argument("field has " + std::to_string(values_.size()) +
                                " values, grid expects " + std::to_string(grid_.size()));
  }
}

ScalarField ScalarField::sample(const Grid& grid,
                                const std::function<double(double, double)>& fn) {
  ScalarField out(grid, 0.0);
  const int n = grid.n();
  for (int j = 0; j < n; ++j) {
    for (int k = 0; k < n; ++k) out(j, k) = fn(grid.coordinate(j), grid.coordinate(k));
  }
  return out;
}

double ScalarField::max() const noexcept {
  return *std::max_element(values_.begin(), values_.end());
}

double ScalarField::min() const noexcept {
  return *std::min_element(values_.begin(), values_.end());
}

double ScalarField::sup_norm() const noexcept {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

std::size_t ScalarField::argmax() const noexcept {
  return static_cast<std::size_t>(
      std::distance(values_.begin(), std::max_element(values_.begin(), values_.end())));
}

std::size_t ScalarField::argmin() const noexcept {
  return static_cast<std::size_t>(
      std::distance(values_.begin(), std::min_element(values_.begin(), values_.end())));
}

bool ScalarField::all_finite() const noexcept {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

void ScalarField::require_same_grid(const ScalarField& other) const {
  if (!(grid_ == other.grid_)) {
    throw std::invalid_argument("scalar fields live on different grids");
  }
}

ScalarField& ScalarField::operator+=(const ScalarField& other) {
  require_same_grid(other);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
  return *this;
}

ScalarField& ScalarField::operator-=(const ScalarField& other) {
  require_same_grid(other);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
  return *this;
}

ScalarField& ScalarField::operator*=(const ScalarField& other) {
  require_same_grid(other);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] *= other.values_[i];
  return *this;
}

ScalarField& ScalarField::operator+=(double c) noexcept {
  for (double& v : values_) v += c;
  return *this;
}

ScalarField& ScalarField::operator*=(double c) noexcept {
  for (double& v : values_) v *= c;
  return *this;
}

ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
ScalarField operator*(ScalarField a, const ScalarField& b) { return a *= b; }
ScalarField operator*(double c, ScalarField a) { return a *= c; }
ScalarField operator+(ScalarField a, double c) { return a += c; }
ScalarField operator-(ScalarField a) { return a *= -1.0; }

ScalarField exp(const ScalarField& v) {
  return v.map([](double x) { return std::exp(x); });
}

ScalarField log(const ScalarField& v) {
  return v.map([](double x) { return std::log(x); });
}

double sup_distance(const ScalarField& a, const ScalarField& b) {
  if (!(a.grid() == b.grid())) throw std::invalid_argument("sup_distance: grid mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

// --- spectral calculus ----------------------------------------------------

ScalarField apply_laplacian_function(const ScalarField& v,
                                     const std::function<double(double)>& fn) {
  const auto& plan = v.grid().spectral();
  auto coeffs = plan.forward(v.values());
  for (std::size_t i = 0; i < coeffs.size(); ++i) coeffs[i] *= fn(plan.symbol(i));
  return ScalarField(v.grid(), plan.backward(coeffs));
}

ScalarField laplacian(const ScalarField& v) {
  const auto& plan = v.grid().spectral();
  auto coeffs = plan.forward(v.values());
  for (std::size_t i = 0; i < coeffs.size(); ++i) coeffs[i] *= plan.symbol(i);
  return ScalarField(v.grid(), plan.backward(coeffs));
}

ScalarField inverse_laplacian(const ScalarField& v) {
  return apply_laplacian_function(v, [](double l) { return l == 0.0 ? 0.0 : 1.0 / l; });
}

double mean_value(const ScalarField& v) {
  double sum = 0.0;
  for (double x : v.values()) sum += x;
  return sum / static_cast<double>(v.size());
}

double integrate(const ScalarField& v) { return mean_value(v) * v.grid().total_area(); }

double inner(const ScalarField& a, const ScalarField& b) {
  if (!(a.grid() == b.grid())) throw std::invalid_argument("inner: grid mismatch");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += a[i] * b[i];
  return sum * a.grid().cell_weight();
}

ScalarField fourier_interpolate(const ScalarField& v, const Grid& fine) {
  const Grid& coarse = v.grid();
  if (fine.total_area() != coarse.total_area() || fine.n() < coarse.n()) {
    throw std::invalid_argument("fourier_interpolate: target grid must be finer with equal area");
  }
  if (fine.n() == coarse.n()) return v;

  const auto& cp = coarse.spectral();
  const auto& fp = fine.spectral();
  const int nc = coarse.n();
  const int nf = fine.n();
  const int hc = cp.half();
  const int hf = fp.half();
  const auto c = cp.forward(v.values());
  std::vector<std::complex<double>> f(fp.spectral_size(), {0.0, 0.0});
  const double scale = static_cast<double>(fine.size()) / static_cast<double>(coarse.size());

  for (int j = 0; j < nc; ++j) {
    const int kx = cp.wavenumber(j);
    for (int k = 0; k < hc; ++k) {
      std::complex<double> coeff = c[static_cast<std::size_t>(j) * hc + k] * scale;
      // Nyquist modes are shared between +n/2 and -n/2.
      if (k == nc / 2) coeff *= 0.5;
      auto put = [&](int kxf, std::complex<double> value) {
        const int row = kxf >= 0 ? kxf : kxf + nf;
        f[static_cast<std::size_t>(row) * hf + k] += value;
      };
      if (std::abs(kx) == nc / 2) {
        put(nc / 2, 0.5 * coeff);
        put(-nc / 2, 0.5 * coeff);
      } else {
        put(kx, coeff);
      }
    }
  }
  return ScalarField(fine, fp.backward(f));
}

// --- Green kernel ---------------------------------------------------------

GreenKernel::GreenKernel(const Grid& grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.size()) throw std::invalid_argument("GreenKernel: size mismatch");
}

double GreenKernel::at(int a, int b) const noexcept {
  const int n = grid_.n();
  a %= n;
  b %= n;
  if (a < 0) a += n;
  if (b < 0) b += n;
  return values_[static_cast<std::size_t>(a) * n + b];
}

GreenKernel greens_kernel(const Grid& grid) {
  // g(y) = G(0, y) solves Delta g = delta_0 - 1/area.
  ScalarField source(grid, -1.0 / grid.total_area());
  source[0] += 1.0 / grid.cell_weight();
  const ScalarField g = inverse_laplacian(source);

  const int n = grid.n();
  std::vector<double> kernel(grid.size());
  // Offset w = x - y, so K(w) = G(0, -w).
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      kernel[static_cast<std::size_t>(a) * n + b] = g((n - a) % n, (n - b) % n);
    }
  }
  const double top = *std::max_element(kernel.begin(), kernel.end());
  for (double& k : kernel) k -= top;
  return GreenKernel(grid, std::move(kernel));
}

ScalarField green_reconstruct(const GreenKernel& kernel, const ScalarField& v) {
  if (!(kernel.grid() == v.grid())) throw std::invalid_argument("green_reconstruct: grid mismatch");
  const Grid& grid = v.grid();
  const int n = grid.n();
  const ScalarField lap = laplacian(v);
  const double avg = mean_value(v);
  const double w = grid.cell_weight();
  ScalarField out(grid, 0.0);
  for (int j1 = 0; j1 < n; ++j1) {
    for (int k1 = 0; k1 < n; ++k1) {
      double acc = 0.0;
      for (int j2 = 0; j2 < n; ++j2) {
        for (int k2 = 0; k2 < n; ++k2) acc += kernel(j1, k1, j2, k2) * lap(j2, k2);
      }
      out(j1, k1) = avg + acc * w;
    }
  }
  return out;
}

}  // namespace demailly
