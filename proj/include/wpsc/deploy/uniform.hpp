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

#ifndef WPSC_DEPLOY_UNIFORM_HPP
#define WPSC_DEPLOY_UNIFORM_HPP

// Closed-form expectations for i.i.d. uniform workers on the unit square
// (alpha = 2, unit rates), and the sample-based choice of the MSC constant.

#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "wpsc/deploy/mechanisms.hpp"
#include "wpsc/model.hpp"

namespace wpsc {

/// Expected MED crowdsourcing cost for n i.i.d. uniform workers.
inline double expected_med_cost_uniform(int n, double h, double p_c, double kappa) {
  if (n < 1) throw std::invalid_argument("expected_med_cost_uniform: n must be >= 1");
  const double N = n;
  const double spread = n % 2 == 0 ? (N - 1.0) * (N + 4.0) / (6.0 * (N + 1.0) * (N + 2.0))
                                   : (N - 1.0) * (N + 3.0) / (6.0 * N * (N + 2.0));
  return p_c * kappa * (spread + h * h);
}

/// Expected MSC cost for three i.i.d. uniform workers and constant point c.
/// The polynomial is minimized at c = (0.5, 0.5) with value 19/160.
inline double msc_expected_cost_n3(Point2 c, double h, double p_c, double kappa) {
  auto axis = [](double t) {
    const double t2 = t * t;
    return -t2 * t2 / 4.0 + t2 * t / 2.0 - t2 / 4.0;
  };
  return p_c * kappa * (axis(c.x) + axis(c.y) + 3.0 / 20.0 + h * h);
}

/// Picks the MSC constant on a grid x grid lattice over the task area that
/// minimizes the mean cost of MSC over the given location samples.
inline Point2 msc_constant(std::span<const std::vector<Point2>> samples,
                           std::span<const double> weights, const SystemConfig& cfg,
                           int grid = 21, EvenRule rule = EvenRule::paper_average) {
  if (samples.empty()) throw std::invalid_argument("msc_constant: no samples");
  if (grid < 2) throw std::invalid_argument("msc_constant: grid must be >= 2");
  const Rect& a = cfg.task_area;
  Point2 best = a.center();
  double best_cost = std::numeric_limits<double>::infinity();
  for (int ix = 0; ix < grid; ++ix) {
    for (int iy = 0; iy < grid; ++iy) {
      const Point2 c{a.xmin + a.width() * ix / (grid - 1), a.ymin + a.height() * iy / (grid - 1)};
      double total = 0.0;
      for (const auto& s : samples) {
        if (s.size() != weights.size()) {
          throw std::invalid_argument("msc_constant: sample arity differs from weights");
        }
        total += platform_cost_phase2(msc(s, c, rule), s, weights, cfg);
      }
      if (total < best_cost) {
        best_cost = total;
        best = c;
      }
    }
  }
  return best;
}

}  // namespace wpsc

#endif  // WPSC_DEPLOY_UNIFORM_HPP
