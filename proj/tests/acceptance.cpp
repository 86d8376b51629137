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

// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "oracles.hpp"
#include "wpsc/deploy/audit.hpp"
#include "wpsc/deploy/metrics.hpp"
#include "wpsc/deploy/uniform.hpp"
#include "wpsc/harness/samples.hpp"
#include "wpsc/mdl/train.hpp"
#include "wpsc/stackelberg.hpp"

namespace {

using namespace wpsc;
using testing::Gen;
namespace fs = std::filesystem;

struct Outcome {
  bool pass = true;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

SystemConfig unit_config(double alpha, double h) {
  SystemConfig c = testing::desk_config(alpha);
  c.h = h;
  return c;
}

DeploymentInstance make_instance(std::vector<Point2> pts, std::vector<double> w, const SystemConfig& c) {
  DeploymentInstance inst;
  inst.points = std::move(pts);
  inst.weights = std::move(w);
  inst.config = c;
  return inst;
}

struct McStats {
  double mean = 0.0;
  double se = 0.0;
};

/// Mean cost over uniform draws with unit rates splitting P_c = 1, kappa = 1.
McStats uniform_mc(std::uint64_t seed, int n, const std::function<Point2(const std::vector<Point2>&)>& mech,
                   int draws = 100000) {
  SystemConfig c = unit_config(2.0, 0.0);
  Gen g(seed);
  const std::vector<double> w(static_cast<std::size_t>(n), 1.0 / n);
  double sum = 0.0;
  double sq = 0.0;
  for (int t = 0; t < draws; ++t) {
    const auto pts = g.points(n, kUnitSquare);
    const double cost = platform_cost_phase2(mech(pts), pts, w, c);
    sum += cost;
    sq += cost * cost;
  }
  McStats s;
  s.mean = sum / draws;
  s.se = std::sqrt(std::max(0.0, sq / draws - s.mean * s.mean) / draws);
  return s;
}

Outcome criterion_med_closed_form() {
  const auto t0 = Clock::now();
  Outcome o;
  for (int n : {3, 4, 5}) {
    const auto s = uniform_mc(100 + n, n, [](const std::vector<Point2>& p) { return med(p); });
    const double want = expected_med_cost_uniform(n, 0.0, 1.0, 1.0);
    const double rel = std::abs(s.mean - want) / want;
    o.pass = o.pass && rel <= 0.01;
    o.detail += fmt::format("N={} mc={:.6f} closed={:.6f} rel={:.2e}; ", n, s.mean, want, rel);
  }
  const double secs = seconds_since(t0);
  o.pass = o.pass && secs < 30.0;
  o.detail += fmt::format("{:.1f}s", secs);
  return o;
}

Outcome criterion_msc_closed_form() {
  const auto t0 = Clock::now();
  const auto msc_s =
      uniform_mc(7, 3, [](const std::vector<Point2>& p) { return msc(p, Point2{0.5, 0.5}); });
  const auto med_s = uniform_mc(7, 3, [](const std::vector<Point2>& p) { return med(p); });
  const double want = 19.0 / 160;
  const double rel = std::abs(msc_s.mean - want) / want;
  const double gap = med_s.mean - msc_s.mean;
  const double se = std::hypot(msc_s.se, med_s.se);
  const double secs = seconds_since(t0);
  Outcome o;
  o.pass = rel <= 0.01 && gap > 3.0 * se && secs < 30.0;
  o.detail = fmt::format("msc={:.6f} closed={:.6f} rel={:.2e}; med-msc={:.5f} = {:.1f} se; {:.1f}s",
                         msc_s.mean, want, rel, gap, gap / se, secs);
  return o;
}

Outcome criterion_approx_bound() {
  const auto t0 = Clock::now();
  Gen g(3);
  const double alphas[] = {2.0, 2.4, 3.0, 4.0};
  const int sizes[] = {3, 10, 30};
  int violations = 0;
  const int trials = 10000;
  for (int t = 0; t < trials; ++t) {
    const SystemConfig c = unit_config(alphas[t % 4], 0.1);
    const int n = sizes[(t / 4) % 3];
    std::vector<double> rates;
    for (int i = 0; i < n; ++i) rates.push_back(g.uniform(0.2, 2.0));
    const double total = std::accumulate(rates.begin(), rates.end(), 0.0);
    std::vector<double> w;
    for (double r : rates) w.push_back(r / total * c.kappa());
    const auto inst = make_instance(g.points(n, c.task_area), w, c);
    if (!approx_bound_check(inst, rates, g.coin() ? EvenRule::paper_average : EvenRule::lower_median)) {
      ++violations;
    }
  }
  const double secs = seconds_since(t0);
  Outcome o;
  o.pass = violations == 0 && secs < 120.0;
  o.detail = fmt::format("{} instances, {} violations, {:.1f}s", trials, violations, secs);
  return o;
}

std::vector<mdl::LabeledSample> uniform_labels(Gen& g, int count, const std::vector<double>& w,
                                               const SystemConfig& c) {
  std::vector<std::vector<Point2>> s;
  for (int k = 0; k < count; ++k) s.push_back(g.points(static_cast<int>(w.size()), kUnitSquare));
  return mdl::label_dataset(s, w, c, kUnitSquare);
}

Outcome criterion_audits() {
  const auto t0 = Clock::now();
  Gen g(4);
  const SystemConfig c = testing::desk_config();
  const auto grid = deviation_grid(kUnitSquare, 21);

  mdl::TrainSettings st;
  st.batch = 20;
  st.epochs = 3;
  const mdl::MdlModel trained =
      mdl::train(uniform_labels(g, 300, {1.0, 1.0, 1.0}, c), st, mdl::init_model(8, 8, 3, kUnitSquare, 4), c)
          .model;

  struct Tally {
    std::string name;
    int failed = 0;
    double worst_excess = -INFINITY;
  };
  std::vector<Tally> tally{{"MED"}, {"MSC"}, {"MDL-random"}, {"MDL-trained"}, {"MEAN"}};
  int audited = 0;
  while (audited < 50) {
    const auto ws = testing::random_workers(g, 3, c, 0.05, 0.2);
    const auto eq = nash_equilibrium(g.uniform(1.0, 3.0), ws, c, {});
    if (eq.outcome.employed.size() != 3) continue;
    const std::vector<Mechanism> mechs{
        med_mechanism(EvenRule::lower_median), msc_mechanism(g.point(kUnitSquare), EvenRule::lower_median),
        mdl::mdl_mechanism(mdl::init_model(8, 8, 3, kUnitSquare, static_cast<std::uint64_t>(audited))),
        mdl::mdl_mechanism(trained), mean_mechanism()};
    for (std::size_t k = 0; k < mechs.size(); ++k) {
      const auto rep = strategyproofness_audit(mechs[k], eq.outcome, ws, c, grid);
      if (!rep.passed) ++tally[k].failed;
      tally[k].worst_excess = std::max(tally[k].worst_excess, rep.max_utility_gain);
    }
    ++audited;
  }
  const double secs = seconds_since(t0);
  Outcome o;
  o.pass = secs < 120.0 && tally.back().failed > 0;
  for (std::size_t k = 0; k + 1 < tally.size(); ++k) o.pass = o.pass && tally[k].failed == 0;
  for (const auto& t : tally) {
    o.detail += fmt::format("{} failed {}/50 max_gain={:.3e}; ", t.name, t.failed, t.worst_excess);
  }
  o.detail += fmt::format("{:.1f}s", secs);
  return o;
}

Outcome criterion_stackelberg() {
  const auto t0 = Clock::now();
  Gen g(5);
  const SolverSettings s;
  double worst_grid_steps = 0.0;
  double worst_init_gap = 0.0;
  int se_misses = 0;
  for (int t = 0; t < 20; ++t) {
    const SystemConfig c = testing::desk_config(g.uniform(2.0, 3.0));
    const auto ws = testing::random_workers(g, g.integer(2, 4), c, 0.05, 0.3);
    const double p = g.uniform(0.5, 3.0);
    const auto ne = nash_equilibrium(p, ws, c, s);
    const auto oracle = testing::grid_nash(p, ws, c, std::vector<double>(ws.size(), 0.5));
    for (std::size_t i = 0; i < ws.size(); ++i) {
      worst_grid_steps = std::max(worst_grid_steps, std::abs(ne.outcome.rates[i] - oracle[i]) / (c.B * 1e-6));
    }
    for (int k = 0; k < 5; ++k) {
      std::vector<double> init(ws.size());
      for (double& x : init) x = g.uniform(0.01, 2.0);
      const auto rep = nash_equilibrium(p, ws, c, s, init);
      for (std::size_t i = 0; i < ws.size(); ++i) {
        worst_init_gap = std::max(worst_init_gap, std::abs(rep.outcome.rates[i] - ne.outcome.rates[i]));
      }
    }
    const auto se = stackelberg_equilibrium(ws, c, s);
    const double p_max = default_p_max(ws, c);
    std::vector<double> u;
    for (int k = 0; k < 200; ++k) u.push_back(nash_equilibrium(p_max * k / 199.0, ws, c, s).platform_utility);
    const auto best = static_cast<std::size_t>(std::max_element(u.begin(), u.end()) - u.begin());
    const double neighbour = std::min(u[best > 0 ? best - 1 : best], u[std::min(best + 1, u.size() - 1)]);
    if (se.platform_utility < neighbour) ++se_misses;
  }
  const double secs = seconds_since(t0);
  Outcome o;
  o.pass = worst_grid_steps <= 10.0 && worst_init_gap <= 10.0 * s.rate_tol && se_misses == 0 && secs < 300.0;
  o.detail = fmt::format("max oracle gap {:.2f} steps; max init gap {:.2e}; SE misses {}/20; {:.1f}s",
                         worst_grid_steps, worst_init_gap, se_misses, secs);
  return o;
}

Outcome criterion_gradients() {
  Gen g(6);
  double opt_err = 0.0;
  for (int t = 0; t < 20; ++t) {
    SystemConfig c = SystemConfig::reference();
    c.alpha = g.uniform(2.0, 4.0);
    const int n = g.integer(2, 10);
    const auto pts = g.points(n, c.task_area);
    std::vector<double> w;
    for (int i = 0; i < n; ++i) w.push_back(g.uniform(0.1, 2.0));
    const Point2 p = g.point(c.task_area);
    const Point2 grad = platform_cost_gradient(p, pts, w, c);
    const double step = 1e-5 * c.task_area.scale();
    for (int axis = 0; axis < 2; ++axis) {
      Point2 a = p, b = p;
      a[axis] += step;
      b[axis] -= step;
      const double fd = (platform_cost_phase2(a, pts, w, c) - platform_cost_phase2(b, pts, w, c)) / (2 * step);
      opt_err = std::max(opt_err, mdl::relative_error(grad[axis], fd));
    }
  }
  const SystemConfig c = testing::desk_config();
  double mdl_err = 0.0;
  int checked = 0;
  for (int t = 0; checked < 20 && t < 400; ++t) {
    const mdl::MdlModel m = mdl::init_model(g.integer(2, 8), g.integer(2, 8), g.integer(2, 10), kUnitSquare,
                                            static_cast<std::uint64_t>(t));
    std::vector<double> w;
    for (int i = 0; i < m.N(); ++i) w.push_back(g.uniform(0.5, 1.5));
    const auto sample = uniform_labels(g, 1, w, c)[0];
    mdl::GradCheckOptions opt;
    opt.seed = static_cast<std::uint64_t>(t);
    const auto r = mdl::subgradient_check(m, sample, c, opt);
    if (r.skipped || r.active == 0) continue;
    ++checked;
    mdl_err = std::max(mdl_err, r.max_rel_error);
  }
  Outcome o;
  o.pass = opt_err <= 1e-4 && mdl_err <= 1e-4 && checked == 20;
  o.detail = fmt::format("OPT max rel err {:.2e} (20 probes); MDL max rel err {:.2e} ({} pairs)", opt_err,
                         mdl_err, checked);
  return o;
}

Outcome criterion_efficacy() {
  const auto t0 = Clock::now();
  const SystemConfig c = testing::desk_config();
  const int n = 10;
  Gen g(7);
  std::vector<double> rates;
  for (int i = 0; i < n; ++i) rates.push_back(g.uniform(0.3, 1.3));
  const double total = std::accumulate(rates.begin(), rates.end(), 0.0);
  std::vector<double> w;
  for (double r : rates) w.push_back(r / total * c.kappa());

  const auto spec = harness::SyntheticSpec::parse("mixture:0.25,0.3,0.08,0.6;0.75,0.7,0.08,0.4");
  const auto set = harness::gen_synthetic(spec, n, 6000, 17);
  const std::vector<std::vector<Point2>> train_s(set.samples.begin(), set.samples.begin() + 5000);
  const std::vector<std::vector<Point2>> test_s(set.samples.begin() + 5000, set.samples.end());

  mdl::TrainSettings st;
  st.seed = 1;
  const auto fit = mdl::train(mdl::label_dataset(train_s, w, c, kUnitSquare), st,
                              mdl::init_model(8, 8, n, kUnitSquare, 3), c);
  const double train_secs = seconds_since(t0);

  std::vector<DeploymentInstance> test;
  for (const auto& s : test_s) test.push_back(make_instance(s, w, c));
  const auto mdl_r = performance_ratios(mdl::mdl_mechanism(fit.model), test);
  const auto med_r = performance_ratios(med_mechanism(EvenRule::paper_average), test);
  Outcome o;
  o.pass = mdl_r.avg < med_r.avg && mdl_r.wst <= med_r.wst && train_secs < 600.0;
  o.detail = fmt::format("MDL avg={:.4f} wst={:.4f}; MED avg={:.4f} wst={:.4f}; train {:.1f}s", mdl_r.avg,
                         mdl_r.wst, med_r.avg, med_r.wst, train_secs);
  return o;
}

Outcome criterion_trend(const fs::path& report) {
  const SystemConfig c = SystemConfig::reference();
  Gen g(8);
  const auto pool = testing::random_workers(g, 40, c, 1e-4, 1.1e-4);
  std::vector<double> platform;
  std::vector<double> worker;
  for (int n : {10, 20, 30, 40}) {
    const std::vector<Worker> ws(pool.begin(), pool.begin() + n);
    const auto se = stackelberg_equilibrium(ws, c, {});
    const auto u = worker_utilities_phase1(se.outcome, ws, c);
    platform.push_back(se.platform_utility);
    worker.push_back(std::accumulate(u.begin(), u.end(), 0.0) / n);
  }
  bool ok = true;
  for (std::size_t k = 1; k < platform.size(); ++k) {
    ok = ok && platform[k] >= platform[k - 1] && worker[k] <= worker[k - 1];
  }
  std::ofstream f(report);
  f << "N,platform_utility,avg_worker_utility\n";
  for (std::size_t k = 0; k < platform.size(); ++k) {
    f << fmt::format("{},{:.12g},{:.12g}\n", 10 * (k + 1), platform[k], worker[k]);
  }
  Outcome o;
  o.pass = ok && static_cast<bool>(f);
  o.detail = fmt::format("platform {}; avg worker {}; written to {}", platform, worker,
                         report.string());
  return o;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

Outcome criterion_determinism(const fs::path& work) {
  const std::string flags =
      " --seed 11 --system.g=1 --system.B=1 --system.eta=0.5 --system.Gamma=1 --system.h=0.1"
      " --system.a1=10 --system.a2=2 --system.area=0,1,0,1 --workers.count=5 --workers.b_min=0.05"
      " --workers.b_max=0.1 --data.samples=400 --mdl.J=4 --mdl.K=4 --train.epochs=3 --train.batch=40"
      " --audit.instances=2 --audit.grid=5";
  Outcome o;
  for (const char* run : {"a", "b"}) {
    const std::string cmd = std::string(WPSC_CLI) + " pipeline --out " + (work / run).string() + flags +
                            " > " + (work / (std::string(run) + ".log")).string() + " 2>&1";
    if (std::system(cmd.c_str()) != 0) {
      o.pass = false;
      o.detail = fmt::format("pipeline run {} failed, see {}", run, (work / run).string());
      return o;
    }
  }
  for (const char* file : {"metrics.json", "metrics.csv", "mdl_model.txt"}) {
    const std::string a = slurp(work / "a" / file);
    const bool same = !a.empty() && a == slurp(work / "b" / file);
    o.pass = o.pass && same;
    o.detail += fmt::format("{} {}; ", file, same ? "identical" : "DIFFERS");
  }
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path work = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "wpsc_acceptance";
  fs::remove_all(work);
  fs::create_directories(work);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"1 MED uniform closed form", criterion_med_closed_form},
      {"2 MSC uniform closed form", criterion_msc_closed_form},
      {"3 MED approximation bound", criterion_approx_bound},
      {"4 strategyproofness audits", criterion_audits},
      {"5 Stackelberg correctness", criterion_stackelberg},
      {"6 gradient checks", criterion_gradients},
      {"7 MDL efficacy", criterion_efficacy},
      {"8 N sweep trends", [&] { return criterion_trend(work / "trend.csv"); }},
      {"9 determinism", [&] { return criterion_determinism(work); }},
  };
  int failures = 0;
  for (const auto& [name, run] : criteria) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    if (!o.pass) ++failures;
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << " | " << o.detail << std::endl;
  }
  return failures == 0 ? EXIT_SUCCESS : EXIT_FAILURE;
}
