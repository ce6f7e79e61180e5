#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "demailly/model.hpp"

namespace demailly {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Curvature perturbation preset.
///
///   bundle.perturbation = none
///   bundle.perturbation = cosine <amplitude> [kx:ky,kx:ky,...]
///
/// `cosine` sets phi_1 = +P and phi_2 = -P with
/// P = amplitude * sum cos(2 pi kx x) cos(2 pi ky y); the mode list
/// defaults to 1:1.
struct PerturbationConfig {
  std::string preset = "none";
  double amplitude = 0.0;
  std::vector<std::pair<int, int>> modes;
};

/// Flat key = value run description. Keys:
///   grid.n, bundle.r, bundle.degrees (required)
///   bundle.perturbation, params.lambda, params.alpha0, params.mu,
///   march.dt0, march.dt_floor, tol.newton, tol.cone_floor, output.dir, seed
struct RunConfig {
  int n = 0;
  int r = 0;
  std::vector<int> degrees;
  PerturbationConfig perturbation;
  std::optional<double> lambda;
  std::optional<double> alpha0;
  double mu = 1.0;
  double dt0 = 0.05;
  double dt_floor = 1e-4;
  double newton_tol = 1e-9;
  std::optional<double> cone_floor;
  std::string output_dir;
  std::uint64_t seed = 0;

  int total_degree() const noexcept;
  BundleSpec bundle_spec() const;
  ParamsRequest params_request() const;
};

/// Throws ConfigError on unknown or duplicate keys, malformed values, or
/// violated invariants (degrees length != r, n not a power of two >= 8,
/// lambda <= r, non-positive total degree).
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::filesystem::path& path);

/// Checks the invariants of an already populated config.
void validate_config(const RunConfig& config);

/// Canonical text form; parse_config(format_config(c)) reproduces c.
std::string format_config(const RunConfig& config);

}  // namespace demailly
