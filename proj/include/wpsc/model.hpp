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

#ifndef WPSC_MODEL_HPP
#define WPSC_MODEL_HPP

// Power, cost and utility formulas of the wireless-powered crowdsourcing
// market. Every other module evaluates the market through these functions.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "wpsc/geometry.hpp"

namespace wpsc {

/// Relative tolerance used for cost and utility comparisons.
inline constexpr double kRelTol = 1e-9;

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

/// Physical and market constants. All gains are linear; convert dB values
/// with db_to_linear() once, when the config is built.
struct SystemConfig {
  double g = 1e9;         ///< channel gain to noise ratio
  double B = 60e6;        ///< bandwidth, Hz
  double alpha = 2.0;     ///< path-loss exponent
  double eta = 0.6;       ///< energy conversion efficiency
  double Gamma = 1e-3;    ///< combined antenna gain
  double h = 10.0;        ///< mobile BS height, m
  double a1 = 1e4;
  double a2 = 200.0;
  Rect task_area{0.0, 200.0, 0.0, 200.0};

  /// kappa = 1 / (eta * Gamma).
  double kappa() const { return 1.0 / (eta * Gamma); }

  void validate() const {
    auto fail = [](const char* what) {
      throw std::invalid_argument(std::string("SystemConfig: ") + what);
    };
    if (!(g > 0.0)) fail("g must be positive");
    if (!(B > 0.0)) fail("B must be positive");
    if (!(alpha >= 2.0)) fail("alpha must be >= 2");
    if (!(eta > 0.0 && eta < 1.0)) fail("eta must lie in (0,1)");
    if (!(Gamma > 0.0)) fail("Gamma must be positive");
    if (!(h >= 0.0)) fail("h must be >= 0");
    if (!(a1 > 0.0) || !(a2 > 0.0)) fail("a1 and a2 must be positive");
    if (task_area.degenerate()) fail("task area is degenerate");
  }

  /// Defaults of the reference experiments: 200 m square, h = 10 m,
  /// g = 90 dB, B = 60 MHz, a1 = 1e4, a2 = 200, eta = 0.6, Gamma = -30 dB,
  /// alpha = 2.
  static SystemConfig reference() {
    SystemConfig cfg;
    cfg.g = db_to_linear(90.0);
    cfg.B = 60e6;
    cfg.alpha = 2.0;
    cfg.eta = 0.6;
    cfg.Gamma = db_to_linear(-30.0);
    cfg.h = 10.0;
    cfg.a1 = 1e4;
    cfg.a2 = 200.0;
    cfg.task_area = Rect{0.0, 200.0, 0.0, 200.0};
    return cfg;
  }
};

/// d^alpha computed from the squared distance, exact for alpha = 2.
inline double path_loss(double dist_sq, double alpha) {
  return alpha == 2.0 ? dist_sq : std::pow(dist_sq, 0.5 * alpha);
}

inline double squared_distance(Point2 worker_loc, Point2 bs_loc, double h) {
  const double dx = worker_loc.x - bs_loc.x;
  const double dy = worker_loc.y - bs_loc.y;
  return dx * dx + dy * dy + h * h;
}

/// Worker-to-BS distance with the BS hovering at height h.
inline double distance(Point2 worker_loc, Point2 bs_loc, double h) {
  return std::hypot(worker_loc.x - bs_loc.x, worker_loc.y - bs_loc.y, h);
}

/// Largest worker-to-BS distance when the worker stays in `working_area` and
/// the BS may be anywhere in `task_area`. The maximum of a convex function
/// over a rectangle sits at a corner, so only corner pairs are compared.
inline double worst_case_distance(const Rect& working_area, const Rect& task_area, double h) {
  double best = 0.0;
  for (Point2 a : working_area.corners()) {
    for (Point2 b : task_area.corners()) {
      best = std::max(best, squared_distance(a, b, 0.0));
    }
  }
  return std::sqrt(best + h * h);
}

struct Worker {
  int id = 0;
  double b = 1e-4;      ///< sensing energy cost per bit, W per bit/s
  Point2 location;      ///< true working location
  Rect working_area;
  double D = 0.0;       ///< worst-case distance to the BS

  /// Builds a worker and derives D from the areas and the BS height.
  static Worker make(int id, double b, Point2 location, const Rect& working_area,
                     const SystemConfig& cfg) {
    if (!(b > 0.0)) throw std::invalid_argument("Worker: b must be positive");
    if (!working_area.contains(location)) {
      throw std::invalid_argument("Worker: location outside its working area");
    }
    return Worker{id, b, location, working_area,
                  worst_case_distance(working_area, cfg.task_area, cfg.h)};
  }
};

/// Result of the task allocation phase.
struct AllocationOutcome {
  double p_c = 0.0;
  std::vector<double> rates;   ///< aligned with the worker list
  std::vector<int> employed;   ///< ids with a positive rate, ascending
  std::vector<double> shares;  ///< charging power per worker, aligned with rates

  /// Builds the outcome from a rate profile; a rate counts as employed when
  /// it exceeds `employ_tol`.
  static AllocationOutcome make(double p_c, std::vector<double> rates,
                                std::span<const Worker> workers, double employ_tol = 0.0) {
    if (rates.size() != workers.size()) {
      throw std::invalid_argument("AllocationOutcome: rates/workers size mismatch");
    }
    AllocationOutcome out;
    out.p_c = p_c;
    out.rates = std::move(rates);
    const double total = std::accumulate(out.rates.begin(), out.rates.end(), 0.0);
    out.shares.assign(out.rates.size(), 0.0);
    for (std::size_t i = 0; i < out.rates.size(); ++i) {
      if (out.rates[i] < 0.0) throw std::invalid_argument("AllocationOutcome: negative rate");
      if (total > 0.0) out.shares[i] = out.rates[i] / total * p_c;
      if (out.rates[i] > employ_tol) out.employed.push_back(workers[i].id);
    }
    std::sort(out.employed.begin(), out.employed.end());
    return out;
  }

  double total_rate() const { return std::accumulate(rates.begin(), rates.end(), 0.0); }

  bool is_employed(int id) const {
    return std::binary_search(employed.begin(), employed.end(), id);
  }
};

/// Weighted point set handed to a deployment mechanism.
struct DeploymentInstance {
  std::vector<Point2> points;
  std::vector<double> weights;
  SystemConfig config;

  void validate() const {
    if (points.empty()) throw std::invalid_argument("DeploymentInstance: no points");
    if (points.size() != weights.size()) {
      throw std::invalid_argument("DeploymentInstance: points/weights size mismatch");
    }
    double total = 0.0;
    for (double w : weights) {
      if (!(w >= 0.0)) throw std::invalid_argument("DeploymentInstance: negative weight");
      total += w;
    }
    if (!(total > 0.0)) throw std::invalid_argument("DeploymentInstance: all weights zero");
  }

  double total_weight() const { return std::accumulate(weights.begin(), weights.end(), 0.0); }
};

inline std::size_t index_of(std::span<const Worker> workers, int id) {
  for (std::size_t i = 0; i < workers.size(); ++i) {
    if (workers[i].id == id) return i;
  }
  throw std::out_of_range("unknown worker id " + std::to_string(id));
}

/// Per-worker deployment weights (r_i / sum r) * P_c * kappa of the employed
/// workers, in the order of outcome.employed.
inline std::vector<double> deployment_weights(const AllocationOutcome& outcome,
                                              std::span<const Worker> workers,
                                              const SystemConfig& cfg) {
  std::vector<double> w;
  w.reserve(outcome.employed.size());
  for (int id : outcome.employed) {
    w.push_back(outcome.shares[index_of(workers, id)] * cfg.kappa());
  }
  return w;
}

// ---------------------------------------------------------------------------
// Power model

/// Transmission power needed for rate r at distance d: (2^(r/B) - 1) d^alpha / g.
inline double transmission_power(double r, double d, const SystemConfig& cfg) {
  return std::expm1(r / cfg.B * std::numbers::ln2) * std::pow(d, cfg.alpha) / cfg.g;
}

/// Transmission plus sensing power.
inline double worker_power_cost(double r, double d, double b, const SystemConfig& cfg) {
  return transmission_power(r, d, cfg) + b * r;
}

/// Power the BS spends so that `p_received` arrives at distance d.
inline double bs_charging_cost(double p_received, double d, const SystemConfig& cfg) {
  return p_received * std::pow(d, cfg.alpha) * cfg.kappa();
}

/// a1 ln(1 + sum_i ln(1 + a2 r_i)).
inline double data_utility(std::span<const double> rates, const SystemConfig& cfg) {
  double inner = 0.0;
  for (double r : rates) inner += std::log1p(cfg.a2 * r);
  return cfg.a1 * std::log1p(inner);
}

// ---------------------------------------------------------------------------
// Task allocation phase (workers plan for their worst-case distance D)

inline double platform_utility_phase1(double p_c, std::span<const double> rates,
                                      std::span<const Worker> workers, const SystemConfig& cfg) {
  if (rates.size() != workers.size()) {
    throw std::invalid_argument("platform_utility_phase1: rates/workers size mismatch");
  }
  const double total = std::accumulate(rates.begin(), rates.end(), 0.0);
  double power = 0.0;
  if (total > 0.0) {
    for (std::size_t i = 0; i < rates.size(); ++i) {
      power += rates[i] / total * p_c * std::pow(workers[i].D, cfg.alpha) * cfg.kappa();
    }
  }
  return data_utility(rates, cfg) - power;
}

/// Utility of worker i (position in `workers`) for rate r_i when the other
/// workers' rates sum to `others`.
inline double worker_utility_phase1(double r_i, double others, double p_c, const Worker& w,
                                    const SystemConfig& cfg) {
  const double total = r_i + others;
  const double share = total > 0.0 ? r_i / total * p_c : 0.0;
  return share - worker_power_cost(r_i, w.D, w.b, cfg);
}

inline double worker_utility_phase1(std::size_t i, std::span<const double> rates, double p_c,
                                    std::span<const Worker> workers, const SystemConfig& cfg) {
  const double total = std::accumulate(rates.begin(), rates.end(), 0.0);
  return worker_utility_phase1(rates[i], total - rates[i], p_c, workers[i], cfg);
}

/// d/dr_i of worker_utility_phase1:
/// P_c S_-i / (r_i + S_-i)^2 - D^alpha ln2 / B * 2^(r_i/B) - b_i.
inline double worker_utility_phase1_slope(double r_i, double others, double p_c, const Worker& w,
                                          const SystemConfig& cfg) {
  const double total = r_i + others;
  const double share_slope = total > 0.0 ? p_c * others / (total * total) : 0.0;
  return share_slope -
         std::pow(w.D, cfg.alpha) * std::numbers::ln2 / cfg.B * std::exp2(r_i / cfg.B) -
         w.b;
}

// ---------------------------------------------------------------------------
// Data crowdsourcing phase

/// Utility of worker `id` when the BS is deployed at `bs_loc`.
inline double worker_utility_phase2(int id, Point2 bs_loc, const AllocationOutcome& outcome,
                                    std::span<const Worker> workers, const SystemConfig& cfg) {
  const std::size_t i = index_of(workers, id);
  const double r = outcome.rates.at(i);
  const double d = distance(workers[i].location, bs_loc, cfg.h);
  return outcome.shares.at(i) - worker_power_cost(r, d, workers[i].b, cfg);
}

/// Crowdsourcing cost sum_i w_i d_i(bs)^alpha.
inline double platform_cost_phase2(Point2 bs_loc, std::span<const Point2> points,
                                   std::span<const double> weights, const SystemConfig& cfg) {
  double cost = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    cost += weights[i] * path_loss(squared_distance(points[i], bs_loc, cfg.h), cfg.alpha);
  }
  return cost;
}

inline double platform_cost_phase2(Point2 bs_loc, const DeploymentInstance& inst) {
  return platform_cost_phase2(bs_loc, inst.points, inst.weights, inst.config);
}

/// Gradient of platform_cost_phase2 with respect to the BS location:
/// sum_i w_i alpha d_i^(alpha-2) (bs - p_i).
inline Point2 platform_cost_gradient(Point2 bs_loc, std::span<const Point2> points,
                                     std::span<const double> weights, const SystemConfig& cfg) {
  Point2 g;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double d2 = squared_distance(points[i], bs_loc, cfg.h);
    const double f = cfg.alpha == 2.0 ? 2.0 : cfg.alpha * std::pow(d2, 0.5 * cfg.alpha - 1.0);
    g = g + (weights[i] * f) * (bs_loc - points[i]);
  }
  return g;
}

inline Point2 platform_cost_gradient(Point2 bs_loc, const DeploymentInstance& inst) {
  return platform_cost_gradient(bs_loc, inst.points, inst.weights, inst.config);
}

}  // namespace wpsc

#endif  // WPSC_MODEL_HPP
