#include <gtest/gtest.h>

#include <cmath>

#include "demailly/homotopy.hpp"
#include "support.hpp"

namespace demailly {
namespace {

using testing::constant_spec;
using testing::fixed_params;

DemaillyParams constant_params(const BundleSpec& spec, int n, double lambda, double alpha0) {
  const CurvatureData curv = build_curvature(spec, make_grid(n, spec.total_degree()));
  return solve_t0(curv, fixed_params(lambda, alpha0)).params;
}

TEST(ClosedForm, KnownValues) {
  const BundleSpec spec = constant_spec({1, 3});
  const DemaillyParams p = constant_params(spec, 16, 8.0, 10.0);

  const State s0 = closed_form_state(spec, p, 0.0);
  EXPECT_EQ(s0.f.sup_norm(), 0.0);
  EXPECT_NEAR(s0.u[0][0], 0.25, 1e-15);
  EXPECT_NEAR(s0.u[1][0], -0.25, 1e-15);

  // (1/8) ln(5.25 * 5.75 / 110.1875) and 0.25 e^{-f}
  const double f_half = std::log(5.25 * 5.75 / 110.1875) / 8.0;
  const State s_half = closed_form_state(spec, p, 0.5);
  EXPECT_NEAR(s_half.f[0], f_half, 1e-15);
  EXPECT_NEAR(s_half.f[0], -0.1618444, 1e-7);
  EXPECT_NEAR(s_half.u[0][0], 0.2939193, 1e-7);

  const State s1 = closed_form_state(spec, p, 1.0);
  EXPECT_NEAR(s1.f[0], std::log(0.1875 / 110.1875) / 8.0, 1e-15);
  EXPECT_NEAR(s1.f[0], -0.7970200, 1e-7);
  EXPECT_NEAR(s1.u[0][0], 0.5547297, 1e-7);
  EXPECT_LE(s1.trace_defect(), 1e-15);
}

TEST(ClosedForm, RejectsPerturbedData) {
  const BundleSpec spec = BundleSpec::cosine_pair({1, 3}, 0.1, {{1, 1}});
  const DemaillyParams p = constant_params(spec, 16, 8.0, 10.0);
  EXPECT_THROW(closed_form_state(spec, p, 0.5), std::invalid_argument);
}

TEST(March, ReproducesClosedFormOnConstantData) {
  const BundleSpec spec = constant_spec({1, 3});
  const MarchResult res = march(spec, fixed_params(8.0, 10.0), make_grid(32, 4.0));
  const MarchReport& rep = res.report;
  ASSERT_TRUE(rep.reached_end());
  EXPECT_EQ(rep.steps.size(), 21u);
  EXPECT_TRUE(rep.rejected.empty());
  double previous_f = 1.0;
  for (const auto& step : rep.steps) {
    EXPECT_LE(state_distance(step.state, closed_form_state(spec, res.params, step.t)), 1e-8)
        << "t=" << step.t;
    EXPECT_LE(step.state.f.max(), previous_f + 1e-10);
    previous_f = step.state.f.max();
    // sum_i |u_i e^f|_inf = sum_i |s_i| on the constant branch.
    EXPECT_NEAR(step.diagnostics.weighted_u_sup, 0.5, 1e-9);
    EXPECT_TRUE(step.diagnostics.passed());
  }
  EXPECT_NEAR(rep.steps.back().state.f.min(), std::log(0.1875 / 110.1875) / 8.0, 1e-9);
}

TEST(March, AcceptedTimesIncreaseFromZero) {
  const MarchResult res = march(BundleSpec::cosine_pair({1, 3}, 0.2, {{1, 1}}),
                                fixed_params(8.0, 10.0), make_grid(16, 4.0));
  const auto& steps = res.report.steps;
  ASSERT_FALSE(steps.empty());
  EXPECT_EQ(steps.front().t, 0.0);
  for (std::size_t k = 1; k < steps.size(); ++k) EXPECT_GT(steps[k].t, steps[k - 1].t);
  EXPECT_EQ(steps.back().t == 1.0, res.report.reached_end());
  EXPECT_TRUE(res.report.reached_end());
}

TEST(March, RankOne) {
  const BundleSpec spec = constant_spec({5});
  const MarchResult res = march(spec, fixed_params(6.0, 4.0), make_grid(16, 5.0));
  ASSERT_TRUE(res.report.reached_end());
  for (const auto& step : res.report.steps) {
    const double f = std::log((1.0 + (1.0 - step.t) * 4.0) / 5.0) / 6.0;
    EXPECT_LE(sup_distance(step.state.f, ScalarField(step.state.grid(), f)), 1e-10);
    EXPECT_EQ(step.state.u[0].sup_norm(), 0.0);
  }
}

TEST(March, NonAmpleBreaksDownAtPredictedTime) {
  const BundleSpec spec = constant_spec({-1, 5});
  const MarchResult res = march(spec, fixed_params(8.0, 10.0), make_grid(16, 4.0));
  const MarchReport& rep = res.report;
  ASSERT_FALSE(rep.reached_end());
  ASSERT_TRUE(rep.breakdown_t.has_value());
  const double predicted = 1.0 + (-1.0) / (4.0 * 10.0);
  EXPECT_LT(*rep.breakdown_t, predicted);
  EXPECT_LE(predicted - *rep.breakdown_t, res.params.tol.dt_floor);
  EXPECT_EQ(rep.steps.back().t, *rep.breakdown_t);
  EXPECT_FALSE(rep.breakdown_reason.empty());

  ASSERT_GE(rep.steps.size(), 6u);
  for (std::size_t k = rep.steps.size() - 5; k < rep.steps.size(); ++k) {
    EXPECT_LT(rep.steps[k].diagnostics.cone_margin, rep.steps[k - 1].diagnostics.cone_margin);
  }
  EXPECT_LE(rep.steps.back().diagnostics.cone_margin, 0.01 * 10.0);
  for (const auto& step : rep.steps) {
    EXPECT_LE(state_distance(step.state, closed_form_state(spec, res.params, step.t)), 1e-8);
  }
}

TEST(March, ObserverSeesEveryAcceptedStep) {
  std::vector<double> seen;
  const MarchResult res = march(constant_spec({2, 2}), fixed_params(8.0, 10.0), make_grid(8, 4.0),
                                [&](const MarchStep& s) { seen.push_back(s.t); });
  ASSERT_EQ(seen.size(), res.report.steps.size());
  for (std::size_t k = 0; k < seen.size(); ++k) EXPECT_EQ(seen[k], res.report.steps[k].t);
}

TEST(March, CoarseScheduleStillLandsOnOne) {
  ParamsRequest req = fixed_params(8.0, 10.0);
  req.tol.dt0 = 0.3;
  const MarchResult res = march(constant_spec({1, 3}), req, make_grid(8, 4.0));
  ASSERT_TRUE(res.report.reached_end());
  EXPECT_EQ(res.report.steps.back().t, 1.0);
  EXPECT_EQ(res.report.steps.size(), 5u);
}

}  // namespace
}  // namespace demailly
