#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "demailly/snapshot.hpp"
#include "runner.hpp"

namespace demailly::app {
namespace {

namespace fs = std::filesystem;

fs::path work_dir(const std::string& name) {
  const fs::path dir = fs::path(DEMAILLY_TEST_WORKDIR) / "cli" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

fs::path write_config(const fs::path& dir, const std::string& degrees, int r = 2, int n = 64,
                      const std::string& extra = "") {
  const fs::path path = dir / "run.cfg";
  std::ofstream(path) << "grid.n = " << n << "\nbundle.r = " << r << "\nbundle.degrees = " << degrees
                      << "\nparams.alpha0 = 10\nparams.lambda = 8\n"
                      << extra;
  return path;
}

std::string read(const fs::path& path) {
  std::ifstream in(path);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

int run_binary(const std::string& args) {
  const std::string cmd = std::string(DEMAILLY_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST(Solve, ConstantAmpleRun) {
  const fs::path dir = work_dir("ample");
  std::ostringstream log;
  ASSERT_EQ(run_solve(write_config(dir, "1,3"), dir / "out", log), kOk) << log.str();

  const auto rows = lines(read(dir / "out" / "summary.csv"));
  ASSERT_EQ(rows.size(), 22u);
  EXPECT_EQ(rows[0],
            "t,min_f,max_f,cone_margin,newton_iterations,residual,identity_err_1,identity_err_2,"
            "uy_violation");
  EXPECT_EQ(rows[21].substr(0, 2), "1,");
  EXPECT_EQ(std::distance(fs::directory_iterator(dir / "out" / "snapshots"), fs::directory_iterator{}),
            21);

  const auto report = nlohmann::json::parse(read(dir / "out" / "report.json"));
  EXPECT_EQ(report["status"], "completed");
  EXPECT_TRUE(report["breakdown_t"].is_null());
  EXPECT_EQ(report["steps"].size(), 21u);
  EXPECT_NEAR(report["steps"][20]["diagnostics"]["bounds"]["min_f"].get<double>(), -0.79702, 5e-6);
}

TEST(Solve, SummaryIsDeterministic) {
  const fs::path dir = work_dir("deterministic");
  const fs::path cfg =
      write_config(dir, "1,3", 2, 16, "bundle.perturbation = cosine 0.2 1:1\n");
  std::ostringstream log;
  ASSERT_EQ(run_solve(cfg, dir / "a", log), kOk);
  ASSERT_EQ(run_solve(cfg, dir / "b", log), kOk);
  EXPECT_EQ(read(dir / "a" / "summary.csv"), read(dir / "b" / "summary.csv"));
  EXPECT_EQ(read(dir / "a" / "snapshots" / "step_0010.snap"),
            read(dir / "b" / "snapshots" / "step_0010.snap"));
}

TEST(Solve, NonAmpleBreaksDown) {
  const fs::path dir = work_dir("nonample");
  std::ostringstream log;
  ASSERT_EQ(run_solve(write_config(dir, "-1,5", 2, 16), dir / "out", log), kBreakdown);
  const auto report = nlohmann::json::parse(read(dir / "out" / "report.json"));
  EXPECT_EQ(report["status"], "breakdown");
  EXPECT_NEAR(report["breakdown_t"].get<double>(), 0.975, 0.01);
  EXPECT_FALSE(report["reason"].get<std::string>().empty());
  EXPECT_FALSE(report["rejected"].empty());
}

TEST(Solve, ConfigErrors) {
  const fs::path dir = work_dir("config_errors");
  std::ostringstream log;
  EXPECT_EQ(run_solve(write_config(dir, "1,3", 3), dir / "out", log), kInputError);
  EXPECT_EQ(run_solve(dir / "missing.cfg", dir / "out", log), kInputError);
  // No --out and no output.dir.
  EXPECT_EQ(run_solve(write_config(dir, "1,3"), "", log), kInputError);
}

class Verify : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new fs::path(work_dir("verify"));
    std::ostringstream log;
    ASSERT_EQ(run_solve(write_config(*dir_, "1,3", 2, 32), *dir_ / "out", log), kOk);
  }
  static void TearDownTestSuite() { delete dir_; }

  static fs::path snapshot() { return *dir_ / "out" / "snapshots" / "step_0020.snap"; }
  static fs::path config() { return *dir_ / "run.cfg"; }

  static fs::path* dir_;
};

fs::path* Verify::dir_ = nullptr;

TEST_F(Verify, ConvergedSnapshotPasses) {
  std::ostringstream out, log;
  EXPECT_EQ(run_verify(snapshot(), config(), out, log), kOk) << log.str();
  const auto doc = nlohmann::json::parse(out.str());
  EXPECT_TRUE(doc["passed"].get<bool>());
  EXPECT_EQ(doc["t"].get<double>(), 1.0);
}

TEST_F(Verify, CorruptedSnapshotFailsIdentity) {
  Snapshot snap = load_snapshot(snapshot());
  snap.state.u[0] += 0.1;
  const fs::path bad = *dir_ / "corrupt.snap";
  save_snapshot(bad, snap.state, snap.meta.lambda, snap.meta.alpha0, snap.meta.degrees);
  std::ostringstream out, log;
  EXPECT_EQ(run_verify(bad, config(), out, log), kDiagnosticFailure);
  EXPECT_NE(log.str().find("integral_identity_1"), std::string::npos) << log.str();
  const auto doc = nlohmann::json::parse(out.str());
  EXPECT_FALSE(doc["passed"].get<bool>());
}

TEST_F(Verify, TruncatedAndMismatchedSnapshots) {
  const std::string text = read(snapshot());
  const fs::path cut = *dir_ / "truncated.snap";
  std::ofstream(cut) << text.substr(0, text.size() / 3);
  std::ostringstream out, log;
  EXPECT_EQ(run_verify(cut, config(), out, log), kInputError);

  const fs::path other = write_config(work_dir("verify_other"), "2,2", 2, 32);
  EXPECT_EQ(run_verify(snapshot(), other, out, log), kInputError);
  EXPECT_EQ(run_verify(*dir_ / "nope.snap", config(), out, log), kInputError);
}

TEST(Sweep, DegreesAxis) {
  const fs::path dir = work_dir("sweep_degrees");
  std::ostringstream log;
  ASSERT_EQ(run_sweep(write_config(dir, "1,3", 2, 16), "degrees", "1,3;2,2;-1,5", dir / "out", log),
            kOk);
  const auto doc = nlohmann::json::parse(read(dir / "out" / "sweep.json"));
  ASSERT_EQ(doc["runs"].size(), 3u);
  EXPECT_EQ(doc["runs"][0]["exit_code"], 0);
  EXPECT_EQ(doc["runs"][1]["exit_code"], 0);
  EXPECT_EQ(doc["runs"][2]["exit_code"], 2);
  EXPECT_NEAR(doc["runs"][2]["breakdown_t"].get<double>(), 0.975, 0.01);
  EXPECT_EQ(lines(read(dir / "out" / "sweep.csv")).size(), 4u);
}

TEST(Sweep, GridAxisAgainstClosedForm) {
  const fs::path dir = work_dir("sweep_n");
  const RunConfig base = load_config(write_config(dir, "1,3", 2, 16));
  std::ostringstream log;
  const auto entries = sweep(base, "n", {"16", "32", "64"}, dir / "out", log);
  ASSERT_EQ(entries.size(), 3u);
  for (const auto& e : entries) {
    EXPECT_EQ(e.exit_code, kOk);
    ASSERT_TRUE(e.closed_form_error.has_value());
  }
  EXPECT_LE(*entries[2].closed_form_error, 1e-8);
  EXPECT_FALSE(entries[0].self_convergence.has_value());
  EXPECT_TRUE(entries[2].self_convergence.has_value());
}

TEST(Sweep, Alpha0Axis) {
  const fs::path dir = work_dir("sweep_alpha0");
  const RunConfig base = load_config(write_config(dir, "1,3", 2, 16));
  std::ostringstream log;
  const auto entries = sweep(base, "alpha0", {"5", "10", "20", "40"}, dir / "out", log);
  ASSERT_EQ(entries.size(), 4u);
  for (const auto& e : entries) {
    EXPECT_TRUE(e.reached_end) << e.value;
    const double a = std::stod(e.value);
    const double f1 = std::log(0.25 * 0.75 / ((0.25 + a) * (0.75 + a))) / 8.0;
    EXPECT_NEAR(*e.final_min_f, f1, 1e-9) << e.value;
  }
}

TEST(Sweep, BadInputs) {
  const fs::path dir = work_dir("sweep_bad");
  const fs::path cfg = write_config(dir, "1,3", 2, 16);
  std::ostringstream log;
  EXPECT_EQ(run_sweep(cfg, "beta", "1,2", dir / "out", log), kInputError);
  EXPECT_EQ(run_sweep(cfg, "n", "", dir / "out", log), kInputError);
  // Invalid member values are recorded per run.
  const RunConfig base = load_config(cfg);
  const auto entries = sweep(base, "n", {"12", "16"}, dir / "out", log);
  EXPECT_EQ(entries[0].exit_code, kInputError);
  EXPECT_EQ(entries[1].exit_code, kOk);
  EXPECT_EQ(split_sweep_values("degrees", "(1,3);(2,2)"),
            (std::vector<std::string>{"1,3", "2,2"}));
  EXPECT_EQ(apply_axis(base, "degrees", "1,2,3").r, 3);
}

TEST(Executable, ExitCodes) {
  const fs::path dir = work_dir("exe");
  const fs::path good = write_config(dir, "1,3", 2, 16);
  EXPECT_EQ(run_binary("solve --config " + good.string() + " --out " + (dir / "a").string()), 0);
  const fs::path nonample = write_config(work_dir("exe_nonample"), "-1,5", 2, 16);
  EXPECT_EQ(run_binary("solve --config " + nonample.string() + " --out " + (dir / "b").string()), 2);
  const fs::path bad = write_config(work_dir("exe_bad"), "1,3", 3, 16);
  EXPECT_EQ(run_binary("solve --config " + bad.string() + " --out " + (dir / "c").string()), 1);
  const std::string snap = (dir / "a" / "snapshots" / "step_0020.snap").string();
  EXPECT_EQ(run_binary("verify --snapshot " + snap + " --config " + good.string()), 0);
  EXPECT_EQ(run_binary("verify --snapshot " + good.string() + " --config " + good.string()), 1);
  EXPECT_EQ(run_binary("sweep --config " + good.string() + " --axis lambda --values 6,8 --out " +
                       (dir / "d").string()),
            0);
  EXPECT_EQ(run_binary("frobnicate"), 1);
  EXPECT_EQ(run_binary("solve"), 1);
}

}  // namespace
}  // namespace demailly::app
