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

#ifndef WPSC_DEPLOY_MECHANISMS_HPP
#define WPSC_DEPLOY_MECHANISMS_HPP

// Coordinate-wise median mechanisms for placing the mobile BS from reported
// worker locations.

#include <algorithm>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "wpsc/geometry.hpp"
#include "wpsc/model.hpp"

namespace wpsc {

/// How a median of an even number of values is taken.
///  - paper_average: midpoint of the two middle order statistics.
///  - lower_median: the lower middle order statistic. This is a generalized
///    median (one phantom at -inf) and therefore strategyproof; the midpoint
///    rule is manipulable.
enum class EvenRule { paper_average, lower_median };

inline std::string_view to_string(EvenRule r) {
  return r == EvenRule::paper_average ? "paper_average" : "lower_median";
}

inline EvenRule even_rule_from_string(std::string_view s) {
  if (s == "paper_average") return EvenRule::paper_average;
  if (s == "lower_median") return EvenRule::lower_median;
  throw std::invalid_argument("unknown even rule '" + std::string(s) + "'");
}

/// A deployment mechanism maps a reported instance to a BS location.
using Mechanism = std::function<Point2(const DeploymentInstance&)>;

namespace detail {

inline double median_of(std::vector<double>& v, EvenRule rule) {
  const std::size_t n = v.size();
  const std::size_t mid = (n - 1) / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double lower = v[mid];
  if (n % 2 == 1 || rule == EvenRule::lower_median) return lower;
  const double upper = *std::min_element(v.begin() + static_cast<std::ptrdiff_t>(mid) + 1, v.end());
  return 0.5 * (lower + upper);
}

inline Point2 coordinate_median(std::span<const Point2> locations,
                                std::span<const Point2> extra, EvenRule rule) {
  if (locations.empty()) throw std::invalid_argument("median mechanism: no locations");
  std::vector<double> xs;
  std::vector<double> ys;
  xs.reserve(locations.size() + extra.size());
  ys.reserve(locations.size() + extra.size());
  for (auto pts : {locations, extra}) {
    for (Point2 p : pts) {
      xs.push_back(p.x);
      ys.push_back(p.y);
    }
  }
  return {median_of(xs, rule), median_of(ys, rule)};
}

}  // namespace detail

/// Coordinate-wise median of the reported locations (MED).
inline Point2 med(std::span<const Point2> locations, EvenRule rule = EvenRule::paper_average) {
  return detail::coordinate_median(locations, {}, rule);
}

/// Coordinate-wise median after adding one constant point (MSC).
inline Point2 msc(std::span<const Point2> locations, Point2 constant,
                  EvenRule rule = EvenRule::paper_average) {
  const Point2 extra[1] = {constant};
  return detail::coordinate_median(locations, extra, rule);
}

/// Unweighted mean of the reports. Manipulable; kept as the negative control
/// for incentive audits.
inline Point2 mean_of_reports(std::span<const Point2> locations) {
  if (locations.empty()) throw std::invalid_argument("mean_of_reports: no locations");
  Point2 s;
  for (Point2 p : locations) s = s + p;
  return (1.0 / static_cast<double>(locations.size())) * s;
}

inline Mechanism med_mechanism(EvenRule rule) {
  return [rule](const DeploymentInstance& inst) { return med(inst.points, rule); };
}

inline Mechanism msc_mechanism(Point2 constant, EvenRule rule) {
  return [constant, rule](const DeploymentInstance& inst) {
    return msc(inst.points, constant, rule);
  };
}

inline Mechanism mean_mechanism() {
  return [](const DeploymentInstance& inst) { return mean_of_reports(inst.points); };
}

}  // namespace wpsc

#endif  // WPSC_DEPLOY_MECHANISMS_HPP
