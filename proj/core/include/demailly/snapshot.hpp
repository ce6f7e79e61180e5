#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "demailly/model.hpp"

namespace demailly {

/// Text snapshot of a state:
///
///   DEMAILLY-FIELD v1 n=<n> r=<r> t=<t> lambda=<l> alpha0=<a> degrees=<d1,...,dr>
///
/// followed by r + 1 blocks (f, then u_1..u_r), each n lines of n
/// space-separated values printed with 17 significant digits.
class SnapshotError : public std::runtime_error {
 public:
  enum class Kind { Io, Version, Dimension, Parse };

  SnapshotError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

inline constexpr int kSnapshotVersion = 1;

struct SnapshotMeta {
  int n = 0;
  int r = 0;
  double t = 0.0;
  double lambda = 0.0;
  double alpha0 = 0.0;
  std::vector<int> degrees;
};

struct Snapshot {
  SnapshotMeta meta;
  State state;
};

std::string format_snapshot(const State& state, double lambda, double alpha0,
                            const std::vector<int>& degrees);

/// Rebuilds the grid as make_grid(n, sum of degrees).
Snapshot parse_snapshot(std::string_view text);

void save_snapshot(const std::filesystem::path& path, const State& state, double lambda,
                   double alpha0, const std::vector<int>& degrees);
Snapshot load_snapshot(const std::filesystem::path& path);

}  // namespace demailly
