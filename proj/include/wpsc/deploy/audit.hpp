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

#ifndef WPSC_DEPLOY_AUDIT_HPP
#define WPSC_DEPLOY_AUDIT_HPP

// Brute-force incentive audit: each employed worker tries every misreport on
// a grid while the others report truthfully.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "wpsc/deploy/mechanisms.hpp"
#include "wpsc/model.hpp"

namespace wpsc {

struct Deviation {
  int worker_id = 0;
  Point2 true_location;
  Point2 reported_location;
  double gain = 0.0;
};

struct AuditReport {
  long tested_deviations = 0;
  double max_utility_gain = 0.0;          ///< best deviation found (may be <= 0)
  std::optional<Deviation> violating_case;  ///< most profitable violation
  bool passed = true;
};

/// Uniform n x n lattice over the area, corners included.
inline std::vector<Point2> deviation_grid(const Rect& area, int n = 21) {
  std::vector<Point2> g;
  g.reserve(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      g.push_back({area.xmin + area.width() * i / (n - 1), area.ymin + area.height() * j / (n - 1)});
    }
  }
  return g;
}

/// A deviation counts as profitable when it beats the truthful utility by
/// more than 1e-9 |u_truthful| + 1e-12.
inline double audit_tolerance(double truthful_utility) {
  return 1e-9 * std::abs(truthful_utility) + 1e-12;
}

/// Reports of the employed workers (in outcome.employed order) at their true
/// locations, weighted by their charging-power share.
inline DeploymentInstance truthful_instance(const AllocationOutcome& outcome,
                                            std::span<const Worker> workers,
                                            const SystemConfig& cfg) {
  DeploymentInstance inst;
  inst.config = cfg;
  inst.weights = deployment_weights(outcome, workers, cfg);
  for (int id : outcome.employed) inst.points.push_back(workers[index_of(workers, id)].location);
  return inst;
}

inline AuditReport strategyproofness_audit(const Mechanism& mechanism,
                                           const AllocationOutcome& outcome,
                                           std::span<const Worker> workers,
                                           const SystemConfig& cfg,
                                           std::span<const Point2> deviations) {
  AuditReport rep;
  rep.max_utility_gain = -std::numeric_limits<double>::infinity();
  const DeploymentInstance truthful = truthful_instance(outcome, workers, cfg);
  if (truthful.points.empty()) {
    rep.max_utility_gain = 0.0;
    return rep;
  }
  const Point2 truthful_bs = mechanism(truthful);

  for (std::size_t slot = 0; slot < outcome.employed.size(); ++slot) {
    const int id = outcome.employed[slot];
    const Point2 truth = truthful.points[slot];
    const double u_truth = worker_utility_phase2(id, truthful_bs, outcome, workers, cfg);
    const double tol = audit_tolerance(u_truth);

    DeploymentInstance reported = truthful;
    auto try_report = [&](Point2 report) {
      reported.points[slot] = report;
      const double gain =
          worker_utility_phase2(id, mechanism(reported), outcome, workers, cfg) - u_truth;
      ++rep.tested_deviations;
      rep.max_utility_gain = std::max(rep.max_utility_gain, gain);
      if (gain > tol) {
        rep.passed = false;
        if (!rep.violating_case || gain > rep.violating_case->gain) {
          rep.violating_case = Deviation{id, truth, report, gain};
        }
      }
    };
    try_report(truth);
    for (Point2 d : deviations) try_report(d);
  }
  return rep;
}

}  // namespace wpsc

#endif  // WPSC_DEPLOY_AUDIT_HPP
