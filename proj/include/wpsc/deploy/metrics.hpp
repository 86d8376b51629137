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

#ifndef WPSC_DEPLOY_METRICS_HPP
#define WPSC_DEPLOY_METRICS_HPP

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "wpsc/deploy/mechanisms.hpp"
#include "wpsc/deploy/optimum.hpp"

namespace wpsc {

struct PerformanceRatios {
  double avg = 0.0;        ///< mean mechanism cost / mean OPT cost
  double wst = 0.0;        ///< max per-instance cost ratio
  double mean_cost = 0.0;  ///< mean mechanism cost
  double mean_opt_cost = 0.0;
};

/// Costs of a mechanism and of OPT on each instance, evaluated separately so
/// OPT can be shared across mechanisms.
inline std::vector<double> mechanism_costs(const Mechanism& mech,
                                           std::span<const DeploymentInstance> instances) {
  std::vector<double> c;
  c.reserve(instances.size());
  for (const auto& inst : instances) c.push_back(platform_cost_phase2(mech(inst), inst));
  return c;
}

inline PerformanceRatios performance_ratios(std::span<const double> costs,
                                            std::span<const double> opt_costs) {
  if (costs.empty() || costs.size() != opt_costs.size()) {
    throw std::invalid_argument("performance_ratios: need matching, nonempty cost lists");
  }
  PerformanceRatios r;
  double sum = 0.0;
  double sum_opt = 0.0;
  for (std::size_t i = 0; i < costs.size(); ++i) {
    if (!(opt_costs[i] > 0.0)) throw std::domain_error("performance_ratios: zero OPT cost");
    sum += costs[i];
    sum_opt += opt_costs[i];
    r.wst = std::max(r.wst, costs[i] / opt_costs[i]);
  }
  r.avg = sum / sum_opt;
  r.mean_cost = sum / static_cast<double>(costs.size());
  r.mean_opt_cost = sum_opt / static_cast<double>(costs.size());
  return r;
}

inline PerformanceRatios performance_ratios(const Mechanism& mech,
                                            std::span<const DeploymentInstance> instances) {
  const auto costs = mechanism_costs(mech, instances);
  const auto opt = mechanism_costs(opt_mechanism(), instances);
  return performance_ratios(costs, opt);
}

/// Worst-case MED/OPT factor 2^(alpha/2) N^(alpha/2 - 1) r_max / r_min.
inline double med_approximation_factor(double alpha, std::size_t n, double r_max, double r_min) {
  return std::pow(2.0, 0.5 * alpha) * std::pow(static_cast<double>(n), 0.5 * alpha - 1.0) *
         (r_max / r_min);
}

/// Checks cost(MED) <= factor * cost(OPT) on one instance, with relative
/// slack 1e-6. `rates` are the employed workers' rates, all positive.
inline bool approx_bound_check(const DeploymentInstance& inst, std::span<const double> rates,
                               EvenRule rule = EvenRule::paper_average) {
  if (rates.size() != inst.points.size() || rates.empty()) {
    throw std::invalid_argument("approx_bound_check: rates/points size mismatch");
  }
  const auto [lo, hi] = std::minmax_element(rates.begin(), rates.end());
  if (!(*lo > 0.0)) throw std::invalid_argument("approx_bound_check: rates must be positive");
  const double factor = med_approximation_factor(inst.config.alpha, rates.size(), *hi, *lo);
  const double med_cost = platform_cost_phase2(med(inst.points, rule), inst);
  const double opt_cost = platform_cost_phase2(opt_deploy(inst), inst);
  return med_cost <= factor * opt_cost * (1.0 + 1e-6);
}

}  // namespace wpsc

#endif  // WPSC_DEPLOY_METRICS_HPP
