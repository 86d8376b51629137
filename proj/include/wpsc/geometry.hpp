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

#ifndef WPSC_GEOMETRY_HPP
#define WPSC_GEOMETRY_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

namespace wpsc {

/// A location on the ground plane, in meters or in normalized units.
struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend constexpr Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
  friend constexpr Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
  friend constexpr Point2 operator*(double s, Point2 p) { return {s * p.x, s * p.y}; }
  friend constexpr bool operator==(Point2 a, Point2 b) = default;

  constexpr double operator[](int axis) const { return axis == 0 ? x : y; }
  constexpr double& operator[](int axis) { return axis == 0 ? x : y; }
};

inline double norm(Point2 p) { return std::hypot(p.x, p.y); }

/// Axis-aligned rectangle [xmin, xmax] x [ymin, ymax].
struct Rect {
  double xmin = 0.0;
  double xmax = 0.0;
  double ymin = 0.0;
  double ymax = 0.0;

  static Rect checked(double xmin, double xmax, double ymin, double ymax) {
    if (!(xmin <= xmax) || !(ymin <= ymax)) {
      throw std::invalid_argument("Rect: bounds are inverted or not finite");
    }
    return {xmin, xmax, ymin, ymax};
  }

  constexpr double width() const { return xmax - xmin; }
  constexpr double height() const { return ymax - ymin; }
  constexpr double lo(int axis) const { return axis == 0 ? xmin : ymin; }
  constexpr double hi(int axis) const { return axis == 0 ? xmax : ymax; }

  /// Larger side length; used as the length scale of the area.
  constexpr double scale() const { return std::max(width(), height()); }

  constexpr bool degenerate() const { return !(width() > 0.0) || !(height() > 0.0); }

  constexpr bool contains(Point2 p) const {
    return p.x >= xmin && p.x <= xmax && p.y >= ymin && p.y <= ymax;
  }

  Point2 clamp(Point2 p) const {
    return {std::clamp(p.x, xmin, xmax), std::clamp(p.y, ymin, ymax)};
  }

  Point2 center() const { return {0.5 * (xmin + xmax), 0.5 * (ymin + ymax)}; }

  std::array<Point2, 4> corners() const {
    return {Point2{xmin, ymin}, Point2{xmax, ymin}, Point2{xmin, ymax}, Point2{xmax, ymax}};
  }

  /// Maps a point of this rectangle affinely onto [0,1]^2.
  Point2 normalize(Point2 p) const {
    return {(p.x - xmin) / width(), (p.y - ymin) / height()};
  }

  Point2 denormalize(Point2 u) const {
    return {xmin + u.x * width(), ymin + u.y * height()};
  }

  friend constexpr bool operator==(const Rect&, const Rect&) = default;
};

inline constexpr Rect kUnitSquare{0.0, 1.0, 0.0, 1.0};

}  // namespace wpsc

#endif  // WPSC_GEOMETRY_HPP
