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

#ifndef WPSC_STACKELBERG_HPP
#define WPSC_STACKELBERG_HPP

// Task allocation phase: the workers' rate determination game is solved by
// iterative best response for a fixed total charging power, and the platform
// picks the power that maximizes its utility at the induced equilibrium.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "wpsc/model.hpp"

namespace wpsc {

struct SolverSettings {
  double rate_tol = 1e-10;           ///< NE fixed-point tolerance, bit/s
  int max_iters = 10000;             ///< best-response rounds
  std::optional<double> p_max;       ///< upper end of the power search, W
  std::optional<double> p_tol;       ///< power search tolerance, W
  std::uint64_t seed = 0;

  void validate() const {
    if (!(rate_tol > 0.0)) throw std::invalid_argument("SolverSettings: rate_tol must be > 0");
    if (max_iters < 1) throw std::invalid_argument("SolverSettings: max_iters must be >= 1");
    if (p_max && !(*p_max > 0.0)) throw std::invalid_argument("SolverSettings: p_max must be > 0");
    if (p_tol && !(*p_tol > 0.0)) throw std::invalid_argument("SolverSettings: p_tol must be > 0");
  }
};

struct EquilibriumReport {
  AllocationOutcome outcome;
  int iterations = 0;
  bool converged = false;
  double platform_utility = 0.0;
  double residual = 0.0;  ///< max_i |BR_i(r) - r_i|
};

/// Unique maximizer over r_i >= 0 of the worker's task-allocation utility
/// given the sum of the other workers' rates. Returns 0 when the others are
/// all idle or no power is offered, and when the best attainable utility is
/// not positive.
inline double best_response(double others, double p_c, const Worker& w, const SystemConfig& cfg) {
  if (!(others > 0.0) || !(p_c > 0.0)) return 0.0;
  auto slope = [&](double r) { return worker_utility_phase1_slope(r, others, p_c, w, cfg); };
  if (slope(0.0) <= 0.0) return 0.0;

  // The slope decreases strictly and tends to -inf, so doubling finds a sign change.
  double lo = 0.0;
  double hi = cfg.B;
  int doublings = 0;
  while (slope(hi) > 0.0) {
    lo = hi;
    hi *= 2.0;
    if (++doublings > 64) {
      throw std::runtime_error("best_response: no sign change in the marginal utility");
    }
  }
  for (int it = 0; it < 4096; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (slope(mid) > 0.0 ? lo : hi) = mid;
  }
  const double r = 0.5 * (lo + hi);
  return worker_utility_phase1(r, others, p_c, w, cfg) > 0.0 ? r : 0.0;
}

namespace detail {

inline double max_best_response_gap(std::span<const double> rates, double p_c,
                                    std::span<const Worker> workers, const SystemConfig& cfg) {
  const double total = std::accumulate(rates.begin(), rates.end(), 0.0);
  double gap = 0.0;
  for (std::size_t i = 0; i < rates.size(); ++i) {
    gap = std::max(gap, std::abs(best_response(total - rates[i], p_c, workers[i], cfg) - rates[i]));
  }
  return gap;
}

}  // namespace detail

/// Starting profile for best-response iteration: the symmetric equilibrium
/// of a contest with linear costs, r_i = P_c (N-1) / (N^2 c_i), where c_i is
/// worker i's marginal cost at r = 0. Strictly positive for P_c > 0.
inline std::vector<double> initial_profile(double p_c, std::span<const Worker> workers,
                                           const SystemConfig& cfg) {
  const double n = static_cast<double>(workers.size());
  const double contest = n > 1.0 ? (n - 1.0) / (n * n) : 0.5;
  std::vector<double> r;
  r.reserve(workers.size());
  for (const Worker& w : workers) {
    const double c = std::pow(w.D, cfg.alpha) * std::numbers::ln2 / cfg.B + w.b;
    r.push_back(std::min(p_c * contest / c, cfg.B));
  }
  return r;
}

/// Gauss-Seidel best-response rounds in worker order, starting from `init`
/// (default: initial_profile()), until no rate moves by more than rate_tol.
inline EquilibriumReport nash_equilibrium(double p_c, std::span<const Worker> workers,
                                          const SystemConfig& cfg, const SolverSettings& settings,
                                          std::optional<std::vector<double>> init = std::nullopt) {
  const std::size_t n = workers.size();
  EquilibriumReport rep;
  if (n == 0 || !(p_c > 0.0)) {
    rep.outcome = AllocationOutcome::make(std::max(p_c, 0.0), std::vector<double>(n, 0.0), workers,
                                          settings.rate_tol);
    rep.iterations = 1;
    rep.converged = true;
    rep.platform_utility = platform_utility_phase1(rep.outcome.p_c, rep.outcome.rates, workers, cfg);
    return rep;
  }

  std::vector<double> rates;
  if (init) {
    if (init->size() != n) throw std::invalid_argument("nash_equilibrium: init size mismatch");
    rates = std::move(*init);
  } else {
    rates = initial_profile(p_c, workers, cfg);
  }

  for (rep.iterations = 1; rep.iterations <= settings.max_iters; ++rep.iterations) {
    double moved = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double others = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (j != i) others += rates[j];
      }
      // An all-idle field is not an equilibrium; restart from a tiny rival.
      if (n > 1 && !(others > 0.0)) others = settings.rate_tol;
      const double next = best_response(others, p_c, workers[i], cfg);
      moved = std::max(moved, std::abs(next - rates[i]));
      rates[i] = next;
    }
    if (moved <= settings.rate_tol) {
      rep.residual = detail::max_best_response_gap(rates, p_c, workers, cfg);
      if (rep.residual <= settings.rate_tol) {
        rep.converged = true;
        break;
      }
    }
  }
  rep.iterations = std::min(rep.iterations, settings.max_iters);
  if (!rep.converged) rep.residual = detail::max_best_response_gap(rates, p_c, workers, cfg);
  rep.platform_utility = platform_utility_phase1(p_c, rates, workers, cfg);
  rep.outcome = AllocationOutcome::make(p_c, std::move(rates), workers, settings.rate_tol);
  return rep;
}

/// Default upper end of the power search: 10 a1 / (kappa min_i D_i^alpha).
/// Beyond it the charging cost of any worker outweighs the whole data utility.
inline double default_p_max(std::span<const Worker> workers, const SystemConfig& cfg) {
  double min_loss = std::pow(workers.front().D, cfg.alpha);
  for (const Worker& w : workers) min_loss = std::min(min_loss, std::pow(w.D, cfg.alpha));
  return 10.0 * cfg.a1 / (cfg.kappa() * min_loss);
}

/// Golden-section search of the platform's total power offer over
/// [0, p_max], each probe solving the workers' equilibrium. The best probe
/// seen is returned.
inline EquilibriumReport stackelberg_equilibrium(std::span<const Worker> workers,
                                                 const SystemConfig& cfg,
                                                 const SolverSettings& settings) {
  settings.validate();
  if (workers.empty()) return nash_equilibrium(0.0, workers, cfg, settings);

  const double p_max = settings.p_max.value_or(default_p_max(workers, cfg));
  const double p_tol = settings.p_tol.value_or(1e-8 * p_max);

  bool all_converged = true;
  std::optional<EquilibriumReport> best;
  auto probe = [&](double p) {
    EquilibriumReport rep = nash_equilibrium(p, workers, cfg, settings);
    all_converged = all_converged && rep.converged;
    const double u = rep.platform_utility;
    if (!best || u > best->platform_utility) best = std::move(rep);
    return u;
  };

  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = 0.0;
  double b = p_max;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = probe(c);
  double fd = probe(d);
  while (b - a > p_tol) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = probe(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = probe(d);
    }
  }
  probe(0.5 * (a + b));
  probe(0.0);
  probe(p_max);

  EquilibriumReport out = std::move(*best);
  out.converged = out.converged && all_converged;
  return out;
}

/// Task-allocation utility of every worker at a rate profile.
inline std::vector<double> worker_utilities_phase1(const AllocationOutcome& outcome,
                                                   std::span<const Worker> workers,
                                                   const SystemConfig& cfg) {
  std::vector<double> u(workers.size());
  for (std::size_t i = 0; i < workers.size(); ++i) {
    u[i] = worker_utility_phase1(i, outcome.rates, outcome.p_c, workers, cfg);
  }
  return u;
}

}  // namespace wpsc

#endif  // WPSC_STACKELBERG_HPP
