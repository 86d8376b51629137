// Copyright 2026 The wpsc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "wpsc/deploy/mechanisms.hpp"
#include "wpsc/deploy/metrics.hpp"
#include "wpsc/deploy/optimum.hpp"
#include "wpsc/deploy/uniform.hpp"

namespace wpsc {
namespace {

using testing::Gen;

SystemConfig unit_config(double alpha = 2.0, double h = 0.0) {
  SystemConfig c = testing::desk_config(alpha);
  c.h = h;
  return c;
}

DeploymentInstance instance(std::vector<Point2> pts, std::vector<double> w, const SystemConfig& c) {
  DeploymentInstance inst;
  inst.points = std::move(pts);
  inst.weights = std::move(w);
  inst.config = c;
  return inst;
}

DeploymentInstance random_instance(Gen& g, int n, const SystemConfig& c, double w_lo = 0.5,
                                   double w_hi = 2.0) {
  std::vector<double> w;
  for (int i = 0; i < n; ++i) w.push_back(g.uniform(w_lo, w_hi));
  return instance(g.points(n, c.task_area), w, c);
}

TEST(Med, Examples) {
  EXPECT_EQ(med(std::vector<Point2>{{3, 4}}), (Point2{3, 4}));
  EXPECT_EQ(med(std::vector<Point2>{{0, 0}, {1, 0}, {0, 1}}), (Point2{0, 0}));
  EXPECT_EQ(med(std::vector<Point2>{{0, 0}, {2, 2}}, EvenRule::paper_average), (Point2{1, 1}));
  EXPECT_EQ(med(std::vector<Point2>{{0, 0}, {2, 2}}, EvenRule::lower_median), (Point2{0, 0}));
  EXPECT_THROW(med(std::vector<Point2>{}), std::invalid_argument);
}

TEST(Med, OddCountMatchesSortedOracle) {
  Gen g(21);
  for (int t = 0; t < 200; ++t) {
    const auto pts = g.points(2 * g.integer(0, 6) + 1, kUnitSquare);
    std::vector<double> xs, ys;
    for (Point2 p : pts) {
      xs.push_back(p.x);
      ys.push_back(p.y);
    }
    const Point2 m = med(pts, g.coin() ? EvenRule::paper_average : EvenRule::lower_median);
    EXPECT_EQ(m.x, testing::odd_median(xs));
    EXPECT_EQ(m.y, testing::odd_median(ys));
  }
}

TEST(Msc, Examples) {
  const std::vector<Point2> pts{{0.1, 0.5}, {0.2, 0.5}, {0.9, 0.5}};
  EXPECT_NEAR(msc(pts, {0.5, 0.5}, EvenRule::paper_average).x, 0.35, 1e-15);
  const Point2 two = msc(std::vector<Point2>{{0.2, 0.8}}, {0.6, 0.4});
  EXPECT_NEAR(two.x, 0.4, 1e-15);
  EXPECT_NEAR(two.y, 0.6, 1e-15);
  const std::vector<Point2> odd{{0.1, 0.3}, {0.4, 0.9}, {0.7, 0.2}};
  std::vector<Point2> augmented = odd;
  augmented.push_back(odd[1]);
  EXPECT_EQ(msc(odd, odd[1]), med(augmented));
  EXPECT_THROW(msc(std::vector<Point2>{}, {0.5, 0.5}), std::invalid_argument);
}

TEST(Mechanisms, OutcomeRangeAnonymityAndMonotonicity) {
  Gen g(22);
  for (int t = 0; t < 1000; ++t) {
    auto pts = g.points(g.integer(1, 8), kUnitSquare);
    const Point2 c = g.point(kUnitSquare);
    const EvenRule rule = g.coin() ? EvenRule::paper_average : EvenRule::lower_median;
    const Point2 m = med(pts, rule);
    const Point2 s = msc(pts, c, rule);

    double xlo = 1e9, xhi = -1e9, ylo = 1e9, yhi = -1e9;
    for (Point2 p : pts) {
      xlo = std::min(xlo, p.x), xhi = std::max(xhi, p.x);
      ylo = std::min(ylo, p.y), yhi = std::max(yhi, p.y);
    }
    EXPECT_TRUE(m.x >= xlo && m.x <= xhi && m.y >= ylo && m.y <= yhi);
    EXPECT_TRUE(s.x >= std::min(xlo, c.x) && s.x <= std::max(xhi, c.x));
    EXPECT_TRUE(s.y >= std::min(ylo, c.y) && s.y <= std::max(yhi, c.y));

    auto shuffled = pts;
    std::shuffle(shuffled.begin(), shuffled.end(), g.engine());
    EXPECT_EQ(med(shuffled, rule), m);
    EXPECT_EQ(msc(shuffled, c, rule), s);

    const std::size_t i = static_cast<std::size_t>(g.integer(0, static_cast<int>(pts.size()) - 1));
    auto raised = pts;
    raised[i].x += g.uniform(0.0, 0.5);
    raised[i].y += g.uniform(0.0, 0.5);
    const Point2 m2 = med(raised, rule);
    const Point2 s2 = msc(raised, c, rule);
    EXPECT_GE(m2.x, m.x);
    EXPECT_GE(m2.y, m.y);
    EXPECT_GE(s2.x, s.x);
    EXPECT_GE(s2.y, s.y);
  }
}

TEST(EvenRule, RoundTrip) {
  for (EvenRule r : {EvenRule::paper_average, EvenRule::lower_median}) {
    EXPECT_EQ(even_rule_from_string(to_string(r)), r);
  }
  EXPECT_THROW(even_rule_from_string("upper"), std::invalid_argument);
}

TEST(OptDeploy, Examples) {
  const SystemConfig c = unit_config(2.0, 0.1);
  SystemConfig wide = c;
  wide.task_area = {0, 4, 0, 4};
  EXPECT_EQ(opt_deploy(instance({{0.3, 0.7}}, {2.0}, c)), (Point2{0.3, 0.7}));
  EXPECT_EQ(opt_deploy(instance({{0, 0}, {2, 0}}, {1, 1}, wide)), (Point2{1, 0}));
  const Point2 w = opt_deploy(instance({{0, 0}, {3, 3}}, {2, 1}, wide));
  EXPECT_NEAR(w.x, 1.0, 1e-15);
  EXPECT_NEAR(w.y, 1.0, 1e-15);
}

TEST(OptDeploy, MatchesGridOracle) {
  Gen g(23);
  for (double alpha : {2.4, 3.0, 4.0}) {
    const SystemConfig c = unit_config(alpha, 0.1);
    for (int t = 0; t < 3; ++t) {
      const auto inst = random_instance(g, 3, c);
      const Point2 lib = opt_deploy(inst);
      const Point2 grid = testing::grid_opt(inst.points, inst.weights, c);
      EXPECT_LE(norm(lib - grid), 1e-3 * c.task_area.scale());
      EXPECT_LE(platform_cost_phase2(lib, inst),
                testing::ref_cost(grid, inst.points, inst.weights, c) * (1 + 1e-9));
    }
  }
}

TEST(OptDeploy, NeverWorseThanAnyMechanismOrSample) {
  Gen g(24);
  for (int t = 0; t < 200; ++t) {
    const SystemConfig c = unit_config(g.uniform(2.0, 4.0), 0.1);
    const auto inst = random_instance(g, g.integer(1, 10), c);
    const double best = platform_cost_phase2(opt_deploy(inst), inst);
    EXPECT_LE(best, platform_cost_phase2(med(inst.points), inst) * (1 + 1e-9));
    for (int k = 0; k < 20; ++k) {
      EXPECT_LE(best, platform_cost_phase2(g.point(c.task_area), inst) * (1 + 1e-9));
    }
  }
}

TEST(Ratios, OptIsOne) {
  Gen g(25);
  const SystemConfig c = unit_config(3.0, 0.1);
  std::vector<DeploymentInstance> set;
  for (int i = 0; i < 20; ++i) set.push_back(random_instance(g, 5, c));
  const auto r = performance_ratios(opt_mechanism(), set);
  EXPECT_DOUBLE_EQ(r.avg, 1.0);
  EXPECT_DOUBLE_EQ(r.wst, 1.0);
}

TEST(Ratios, OrderingAndHandComputed) {
  Gen g(26);
  const SystemConfig c = unit_config(2.0, 0.1);
  std::vector<DeploymentInstance> set;
  for (int i = 0; i < 50; ++i) set.push_back(random_instance(g, g.integer(2, 7), c));
  for (const auto& mech : {med_mechanism(EvenRule::paper_average),
                           msc_mechanism({0.5, 0.5}, EvenRule::lower_median)}) {
    const auto r = performance_ratios(mech, set);
    EXPECT_GE(r.avg, 1.0 - 1e-9);
    EXPECT_GE(r.wst, r.avg - 1e-12);
  }

  const std::vector<DeploymentInstance> two{
      instance({{0, 0}, {1, 0}, {1, 1}}, {1, 1, 1}, c),
      instance({{0.2, 0.2}, {0.8, 0.4}}, {1, 3}, c)};
  // MED points (1,0) and (0.5,0.3); OPT points are the weighted centroids.
  const double m0 = 1 + 0 + 1 + 3 * 0.01;
  const double o0 = 5.0 / 9 + 2.0 / 9 + 5.0 / 9 + 3 * 0.01;
  const double m1 = (0.09 + 0.01) + 3 * (0.09 + 0.01) + 4 * 0.01;
  const double o1 = (0.2025 + 0.0225) + 3 * (0.0225 + 0.0025) + 4 * 0.01;
  const auto r = performance_ratios(med_mechanism(EvenRule::paper_average), two);
  EXPECT_NEAR(r.avg, (m0 + m1) / (o0 + o1), 1e-12);
  EXPECT_NEAR(r.wst, std::max(m0 / o0, m1 / o1), 1e-12);
  EXPECT_THROW(performance_ratios(std::vector<double>{}, std::vector<double>{}),
               std::invalid_argument);
}

TEST(ApproxBound, Examples) {
  const SystemConfig c = unit_config(2.0, 0.1);
  EXPECT_DOUBLE_EQ(med_approximation_factor(2.0, 7, 1.0, 1.0), 2.0);
  EXPECT_TRUE(approx_bound_check(instance({{0.4, 0.4}}, {1}, c), std::vector<double>{1.0}));
  Gen g(27);
  for (int t = 0; t < 1000; ++t) {
    const int n = g.integer(1, 10);
    const auto inst = random_instance(g, n, c, 1.0, 1.0);
    EXPECT_TRUE(approx_bound_check(inst, std::vector<double>(n, 1.0)));
  }
}

TEST(ApproxBound, HoldsAcrossAlphas) {
  Gen g(28);
  for (int t = 0; t < 10000; ++t) {
    const double alpha = std::vector<double>{2.0, 2.4, 3.0, 4.0}[t % 4];
    const SystemConfig c = unit_config(alpha, 0.1);
    const int n = t % 4 == 3 ? 10 : g.integer(1, 10);
    std::vector<double> rates;
    std::vector<double> w;
    for (int i = 0; i < n; ++i) {
      rates.push_back(g.uniform(1.0, 2.0));
      w.push_back(rates.back());
    }
    const auto inst = instance(g.points(n, c.task_area), w, c);
    ASSERT_TRUE(approx_bound_check(inst, rates, g.coin() ? EvenRule::paper_average
                                                          : EvenRule::lower_median))
        << "trial " << t;
  }
}

TEST(UniformClosedForms, Examples) {
  EXPECT_NEAR(expected_med_cost_uniform(3, 0.0, 1.0, 1.0), 2.0 / 15, 1e-15);
  EXPECT_EQ(expected_med_cost_uniform(1, 0.0, 1.0, 1.0), 0.0);
  EXPECT_NEAR(expected_med_cost_uniform(4, 0.0, 1.0, 1.0), 2.0 / 15, 1e-15);
  EXPECT_THROW(expected_med_cost_uniform(0, 0.0, 1.0, 1.0), std::invalid_argument);
  EXPECT_NEAR(msc_expected_cost_n3({0.5, 0.5}, 0.0, 1.0, 1.0), 19.0 / 160, 1e-15);
  EXPECT_NEAR(msc_expected_cost_n3({0, 0}, 0.0, 1.0, 1.0), 3.0 / 20, 1e-15);
  EXPECT_NEAR(msc_expected_cost_n3({1, 1}, 0.0, 1.0, 1.0), 3.0 / 20, 1e-15);
}

double mc_mean_cost(Gen& g, int n, const Mechanism& mech, int draws) {
  const SystemConfig c = unit_config(2.0, 0.0);
  double total = 0.0;
  for (int k = 0; k < draws; ++k) {
    // Unit rates split p_c * kappa = 1 evenly.
    const auto inst = instance(g.points(n, kUnitSquare), std::vector<double>(n, 1.0 / n), c);
    total += platform_cost_phase2(mech(inst), inst);
  }
  return total / draws;
}

TEST(UniformClosedForms, MonteCarlo) {
  Gen g(29);
  for (int n : {3, 5}) {
    const double emp = mc_mean_cost(g, n, med_mechanism(EvenRule::paper_average), 100000);
    EXPECT_NEAR(emp, expected_med_cost_uniform(n, 0.0, 1.0, 1.0),
                0.01 * expected_med_cost_uniform(n, 0.0, 1.0, 1.0));
  }
  for (Point2 cst : {Point2{0.5, 0.5}, Point2{0.25, 0.75}}) {
    const double emp = mc_mean_cost(g, 3, msc_mechanism(cst, EvenRule::paper_average), 100000);
    const double want = msc_expected_cost_n3(cst, 0.0, 1.0, 1.0);
    EXPECT_NEAR(emp, want, 0.01 * want);
  }
  const double med3 = mc_mean_cost(g, 3, med_mechanism(EvenRule::paper_average), 100000);
  const double msc3 = mc_mean_cost(g, 3, msc_mechanism({0.5, 0.5}, EvenRule::paper_average), 100000);
  EXPECT_LT(msc3, med3);
}

TEST(MscConstant, UniformPicksCenter) {
  Gen g(30);
  const SystemConfig c = unit_config(2.0, 0.0);
  std::vector<std::vector<Point2>> samples;
  for (int k = 0; k < 100000; ++k) samples.push_back(g.points(3, kUnitSquare));
  const Point2 pick = msc_constant(samples, std::vector<double>(3, 1.0), c);
  EXPECT_LE(std::abs(pick.x - 0.5), 0.05 + 1e-12);
  EXPECT_LE(std::abs(pick.y - 0.5), 0.05 + 1e-12);
}

TEST(MscConstant, MirroredSamplesPickCenter) {
  Gen g(31);
  const SystemConfig c = unit_config(2.0, 0.1);
  std::vector<std::vector<Point2>> samples;
  for (int k = 0; k < 200; ++k) {
    auto s = g.points(4, kUnitSquare);
    samples.push_back(s);
    for (Point2& p : s) p = {1.0 - p.x, 1.0 - p.y};
    samples.push_back(s);
  }
  const Point2 pick = msc_constant(samples, std::vector<double>(4, 1.0), c);
  EXPECT_LE(std::abs(pick.x - 0.5), 0.05 + 1e-12);
  EXPECT_LE(std::abs(pick.y - 0.5), 0.05 + 1e-12);
}

TEST(MscConstant, RepeatedSampleMatchesExhaustiveGrid) {
  const SystemConfig c = unit_config(2.0, 0.1);
  const std::vector<Point2> s{{0.1, 0.2}, {0.9, 0.3}};
  const std::vector<double> w{1.0, 1.0};
  const std::vector<std::vector<Point2>> samples(5, s);
  const Point2 pick = msc_constant(samples, w, c);
  // Two reports plus the constant: the output is the per-axis median of three
  // values, so the cost is minimized once it lands on the OPT point (0.5, 0.25).
  EXPECT_NEAR(pick.x, 0.5, 0.05 + 1e-12);
  EXPECT_NEAR(pick.y, 0.25, 0.05 + 1e-12);
  EXPECT_THROW(msc_constant(std::vector<std::vector<Point2>>{}, w, c), std::invalid_argument);
}

}  // namespace
}  // namespace wpsc
