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

#ifndef WPSC_DEPLOY_OPTIMUM_HPP
#define WPSC_DEPLOY_OPTIMUM_HPP

#include <cmath>

#include "wpsc/deploy/mechanisms.hpp"
#include "wpsc/model.hpp"

namespace wpsc {

struct OptSettings {
  double grad_tol = 1e-8;  ///< relative to sum(w) * scale^(alpha-1)
  int max_iters = 10000;
};

inline Point2 weighted_centroid(const DeploymentInstance& inst) {
  Point2 s;
  double total = 0.0;
  for (std::size_t i = 0; i < inst.points.size(); ++i) {
    s = s + inst.weights[i] * inst.points[i];
    total += inst.weights[i];
  }
  return (1.0 / total) * s;
}

/// Unconstrained (not incentive-aware) minimizer of the crowdsourcing cost
/// over the task area.
///
/// For alpha = 2 the cost is W |L - c|^2 + const with c the weighted
/// centroid, so the answer is c projected onto the area. Otherwise the cost
/// is convex and we run projected gradient descent with a backtracking
/// (sufficient decrease) line search, started at the projected centroid and
/// stopped once the projected-gradient norm drops below
/// grad_tol * sum(w) * scale^(alpha-1).
inline Point2 opt_deploy(const DeploymentInstance& inst, const OptSettings& opt = {}) {
  inst.validate();
  const Rect& area = inst.config.task_area;
  Point2 x = area.clamp(weighted_centroid(inst));
  if (inst.config.alpha == 2.0 || inst.points.size() == 1) return x;

  const double scale = area.scale();
  const double tol = opt.grad_tol * inst.total_weight() * std::pow(scale, inst.config.alpha - 1.0);
  auto f = [&](Point2 p) { return platform_cost_phase2(p, inst); };

  double fx = f(x);
  double step = 1.0;
  {
    // Initial step from the curvature of the farthest point's term.
    double curv = 0.0;
    for (std::size_t i = 0; i < inst.points.size(); ++i) {
      const double d2 = squared_distance(inst.points[i], x, inst.config.h) + scale * scale;
      curv += inst.weights[i] * inst.config.alpha * (inst.config.alpha - 1.0) *
              std::pow(d2, 0.5 * inst.config.alpha - 1.0);
    }
    step = curv > 0.0 ? 1.0 / curv : 1.0;
  }

  for (int it = 0; it < opt.max_iters; ++it) {
    const Point2 g = platform_cost_gradient(x, inst);
    const Point2 pg = x - area.clamp(x - g);
    if (norm(pg) <= tol) break;

    bool moved = false;
    for (int bt = 0; bt < 60; ++bt) {
      const Point2 y = area.clamp(x - step * g);
      const Point2 dx = y - x;
      const double fy = f(y);
      const double model = fx + g.x * dx.x + g.y * dx.y +
                           (dx.x * dx.x + dx.y * dx.y) / (2.0 * step);
      if (fy <= model) {
        moved = !(y == x);
        x = y;
        fx = fy;
        break;
      }
      step *= 0.5;
    }
    if (!moved) break;
    step *= 2.0;
  }
  return x;
}

inline Mechanism opt_mechanism(OptSettings opt = {}) {
  return [opt](const DeploymentInstance& inst) { return opt_deploy(inst, opt); };
}

}  // namespace wpsc

#endif  // WPSC_DEPLOY_OPTIMUM_HPP
