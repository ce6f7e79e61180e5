#pragma once

#include <complex>
#include <span>
#include <vector>

#include <fftw3.h>

namespace demailly::detail {

/// FFTW plans for one grid size. Execution goes through the new-array
/// interface, so a plan may be shared between threads.
class SpectralPlan {
 public:
  SpectralPlan(int n, double total_area);
  ~SpectralPlan();
  SpectralPlan(const SpectralPlan&) = delete;
  SpectralPlan& operator=(const SpectralPlan&) = delete;

  int n() const noexcept { return n_; }
  /// Number of retained complex coefficients: n * (n/2 + 1).
  std::size_t spectral_size() const noexcept { return symbols_.size(); }
  int half() const noexcept { return n_ / 2 + 1; }

  /// Signed wavenumber of row index j.
  int wavenumber(int j) const noexcept { return j <= n_ / 2 ? j : j - n_; }

  /// Laplacian eigenvalue of spectral coefficient i.
  double symbol(std::size_t i) const noexcept { return symbols_[i]; }

  /// Unnormalised forward r2c transform.
  std::vector<std::complex<double>> forward(std::span<const double> in) const;
  /// Inverse c2r transform including the 1/N normalisation.
  std::vector<double> backward(std::span<const std::complex<double>> in) const;

 private:
  int n_;
  std::vector<double> symbols_;
  fftw_plan forward_plan_ = nullptr;
  fftw_plan backward_plan_ = nullptr;
};

}  // namespace demailly::detail
