#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "demailly/config.hpp"
#include "demailly/snapshot.hpp"
#include "demailly/solvers.hpp"
#include "support.hpp"

namespace demailly {
namespace {

constexpr const char* kMinimal = "grid.n = 32\nbundle.r = 2\nbundle.degrees = 1,3\n";

TEST(Config, MinimalDefaults) {
  const RunConfig c = parse_config(kMinimal);
  EXPECT_EQ(c.n, 32);
  EXPECT_EQ(c.r, 2);
  EXPECT_EQ(c.degrees, (std::vector<int>{1, 3}));
  EXPECT_EQ(c.perturbation.preset, "none");
  EXPECT_FALSE(c.lambda.has_value());
  EXPECT_EQ(c.mu, 1.0);
  EXPECT_EQ(c.dt0, 0.05);
  EXPECT_EQ(c.dt_floor, 1e-4);
  EXPECT_EQ(c.newton_tol, 1e-9);
  EXPECT_TRUE(c.bundle_spec().unperturbed());
}

TEST(Config, AllKeys) {
  const RunConfig c = parse_config(
      "# comment line\n"
      "grid.n = 64\n"
      "bundle.r = 3\n"
      "bundle.degrees = 1, 2,3   # trailing comment\n"
      "bundle.perturbation = cosine 0.15 1:1,2:-1\n"
      "params.lambda = 12\n"
      "params.alpha0 = 7.5\n"
      "params.mu = 1\n"
      "march.dt0 = 0.1\n"
      "march.dt_floor = 0.001\n"
      "tol.newton = 1e-10\n"
      "tol.cone_floor = 1e-5\n"
      "output.dir = runs/a\n"
      "seed = 42\n");
  EXPECT_EQ(c.degrees, (std::vector<int>{1, 2, 3}));
  EXPECT_EQ(c.perturbation.preset, "cosine");
  EXPECT_EQ(c.perturbation.amplitude, 0.15);
  ASSERT_EQ(c.perturbation.modes.size(), 2u);
  EXPECT_EQ(c.perturbation.modes[1], (std::pair<int, int>{2, -1}));
  EXPECT_EQ(*c.lambda, 12.0);
  EXPECT_EQ(*c.alpha0, 7.5);
  EXPECT_EQ(*c.cone_floor, 1e-5);
  EXPECT_EQ(c.output_dir, "runs/a");
  EXPECT_EQ(c.seed, 42u);
  const ParamsRequest req = c.params_request();
  EXPECT_EQ(req.tol.newton_tol, 1e-10);
  EXPECT_EQ(req.tol.dt0, 0.1);
  EXPECT_FALSE(c.bundle_spec().unperturbed());
}

TEST(Config, CosineDefaultsToFirstMode) {
  const RunConfig c =
      parse_config(std::string(kMinimal) + "bundle.perturbation = cosine 0.2\n");
  ASSERT_EQ(c.perturbation.modes.size(), 1u);
  EXPECT_EQ(c.perturbation.modes[0], (std::pair<int, int>{1, 1}));
}

TEST(Config, FormatRoundTrip) {
  const RunConfig c = parse_config(std::string(kMinimal) +
                                   "bundle.perturbation = cosine 0.1 3:2\nparams.alpha0 = 0.1\n"
                                   "tol.newton = 3e-11\n");
  const RunConfig back = parse_config(format_config(c));
  EXPECT_EQ(format_config(back), format_config(c));
  EXPECT_EQ(*back.alpha0, 0.1);
  EXPECT_EQ(back.newton_tol, 3e-11);
  EXPECT_EQ(back.perturbation.modes, c.perturbation.modes);
}

struct BadConfig {
  const char* label;
  std::string text;
};

void PrintTo(const BadConfig& c, std::ostream* os) { *os << c.label; }

class ConfigErrors : public ::testing::TestWithParam<BadConfig> {};

TEST_P(ConfigErrors, Rejected) { EXPECT_THROW(parse_config(GetParam().text), ConfigError); }

INSTANTIATE_TEST_SUITE_P(
    Config, ConfigErrors,
    ::testing::Values(
        BadConfig{"degrees_length", "grid.n = 32\nbundle.r = 3\nbundle.degrees = 1,3\n"},
        BadConfig{"n_not_power_of_two", "grid.n = 48\nbundle.r = 2\nbundle.degrees = 1,3\n"},
        BadConfig{"n_too_small", "grid.n = 4\nbundle.r = 2\nbundle.degrees = 1,3\n"},
        BadConfig{"lambda_not_above_r", std::string(kMinimal) + "params.lambda = 2\n"},
        BadConfig{"unknown_key", std::string(kMinimal) + "params.beta = 1\n"},
        BadConfig{"duplicate_key", std::string(kMinimal) + "grid.n = 64\n"},
        BadConfig{"missing_degrees", "grid.n = 32\nbundle.r = 2\n"},
        BadConfig{"not_a_number", std::string(kMinimal) + "params.alpha0 = ten\n"},
        BadConfig{"no_equals", std::string(kMinimal) + "params.alpha0 10\n"},
        BadConfig{"non_positive_total", "grid.n = 32\nbundle.r = 2\nbundle.degrees = -3,1\n"},
        BadConfig{"unknown_preset", std::string(kMinimal) + "bundle.perturbation = gaussian 1\n"},
        BadConfig{"zero_mode", std::string(kMinimal) + "bundle.perturbation = cosine 0.1 0:0\n"},
        BadConfig{"cosine_rank_one", "grid.n = 32\nbundle.r = 1\nbundle.degrees = 4\n"
                                     "bundle.perturbation = cosine 0.1\n"},
        BadConfig{"floor_above_dt0", std::string(kMinimal) + "march.dt0 = 0.01\nmarch.dt_floor = 0.1\n"}),
    [](const auto& info) { return std::string(info.param.label); });

TEST(Config, LoadMissingFile) {
  EXPECT_THROW(load_config("/nonexistent/demailly.cfg"), ConfigError);
}

// --- snapshots ---------------------------------------------------------------

State sample_state() {
  const CurvatureData curv =
      build_curvature(BundleSpec::cosine_pair({1, 3}, 0.2, {{1, 1}}), make_grid(8, 4.0));
  State s = solve_t0(curv, testing::fixed_params(8.0, 10.0)).state;
  s.f += ScalarField::sample(curv.grid(), [](double x, double y) { return 1e-3 * std::sin(7 * x + y) / 3.0; });
  s.t = 0.1;
  return s;
}

TEST(Snapshot, RoundTripIsExact) {
  const State s = sample_state();
  const std::string text = format_snapshot(s, 8.0, 10.0, {1, 3});
  EXPECT_EQ(text.substr(0, text.find('\n')),
            "DEMAILLY-FIELD v1 n=8 r=2 t=0.10000000000000001 lambda=8 alpha0=10 degrees=1,3");
  const Snapshot back = parse_snapshot(text);
  EXPECT_EQ(back.meta.n, 8);
  EXPECT_EQ(back.meta.r, 2);
  EXPECT_EQ(back.meta.t, 0.1);
  EXPECT_EQ(back.meta.lambda, 8.0);
  EXPECT_EQ(back.meta.alpha0, 10.0);
  EXPECT_EQ(back.meta.degrees, (std::vector<int>{1, 3}));
  EXPECT_EQ(back.state.grid().total_area(), 4.0);
  for (std::size_t i = 0; i < s.f.size(); ++i) {
    EXPECT_EQ(back.state.f[i], s.f[i]);
    EXPECT_EQ(back.state.u[0][i], s.u[0][i]);
    EXPECT_EQ(back.state.u[1][i], s.u[1][i]);
  }
}

TEST(Snapshot, FileRoundTrip) {
  const State s = sample_state();
  const auto path = std::filesystem::temp_directory_path() / "demailly_snapshot_test.snap";
  save_snapshot(path, s, 8.0, 10.0, {1, 3});
  const Snapshot back = load_snapshot(path);
  EXPECT_EQ(state_distance(back.state, s), 0.0);
  std::filesystem::remove(path);
}

SnapshotError::Kind kind_of(const std::string& text) {
  try {
    parse_snapshot(text);
  } catch (const SnapshotError& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error";
  return SnapshotError::Kind::Io;
}

TEST(Snapshot, DistinctErrors) {
  const std::string good = format_snapshot(sample_state(), 8.0, 10.0, {1, 3});
  const auto header_end = good.find('\n');

  std::string v2 = good;
  v2.replace(v2.find("v1"), 2, "v2");
  EXPECT_EQ(kind_of(v2), SnapshotError::Kind::Version);

  std::string wrong_n = good;
  wrong_n.replace(wrong_n.find("n=8"), 3, "n=16");
  EXPECT_EQ(kind_of(wrong_n), SnapshotError::Kind::Dimension);

  std::string truncated = good.substr(0, good.size() / 2);
  truncated = truncated.substr(0, truncated.rfind('\n') + 1);
  EXPECT_EQ(kind_of(truncated), SnapshotError::Kind::Dimension);

  std::string short_row = good;
  const auto row_end = short_row.find('\n', header_end + 1);
  short_row.erase(short_row.rfind(' ', row_end), row_end - short_row.rfind(' ', row_end));
  EXPECT_EQ(kind_of(short_row), SnapshotError::Kind::Dimension);

  std::string garbage = good;
  garbage.replace(header_end + 1, 1, "x");
  EXPECT_EQ(kind_of(garbage), SnapshotError::Kind::Parse);

  EXPECT_EQ(kind_of("HELLO v1\n"), SnapshotError::Kind::Parse);
  EXPECT_EQ(kind_of(""), SnapshotError::Kind::Parse);
  EXPECT_THROW(load_snapshot("/nonexistent/x.snap"), SnapshotError);
}

}  // namespace
}  // namespace demailly
