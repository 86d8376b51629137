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

#ifndef WPSC_MDL_NETWORK_HPP
#define WPSC_MDL_NETWORK_HPP

// Learned generalized-median deployment mechanism.
//
// Per axis, a monotone max-min network nu maps a subset T of workers
// (encoded as z in {-1,+1}^N) to a phantom value zeta_T, and the outcome is
//
//   max over j of min{ nu(T(j)), x_(j) },
//
// where x_(1) >= x_(2) >= ... are the reports sorted in descending order and
// T(j) holds the j workers with the largest reports. Since nu is monotone in
// T, this equals max over all T of min{zeta_T, x_i : i in T}, which is a
// strategyproof generalized median for any parameter values.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "wpsc/geometry.hpp"

namespace wpsc::mdl {

/// Shifted log-sigmoid s(t) = ln(1 / (1 + e^-t)) + 1, range (-inf, 1).
inline double activation(double t) {
  const double softplus_neg = t > 0.0 ? std::log1p(std::exp(-t)) : -t + std::log1p(std::exp(t));
  return 1.0 - softplus_neg;
}

/// s'(t) = 1 / (1 + e^t).
inline double activation_slope(double t) {
  return t > 0.0 ? std::exp(-t) / (1.0 + std::exp(-t)) : 1.0 / (1.0 + std::exp(t));
}

/// Inverse of activation() on (-inf, 1).
inline double activation_inverse(double v) {
  if (!(v < 1.0)) throw std::domain_error("activation_inverse: value must be < 1");
  return -std::log(std::expm1(1.0 - v));
}

/// Parameters of one axis' monotone network. Layer-1 unit (j,k) reads z
/// through weights e^w1[j,k,:]; layer-2 unit (j,k) reads the K layer-1
/// outputs of group j through weights e^w2[j,k,:].
struct AxisNetwork {
  int J = 0;
  int K = 0;
  int N = 0;
  std::vector<double> w1;  ///< J*K*N log-weights
  std::vector<double> b1;  ///< J*K
  std::vector<double> w2;  ///< J*K*K log-weights
  std::vector<double> b2;  ///< J*K

  static AxisNetwork zeros(int J, int K, int N) {
    if (J < 1 || K < 1 || N < 1) throw std::invalid_argument("AxisNetwork: J, K, N must be >= 1");
    AxisNetwork a;
    a.J = J;
    a.K = K;
    a.N = N;
    a.w1.assign(static_cast<std::size_t>(J) * K * N, 0.0);
    a.b1.assign(static_cast<std::size_t>(J) * K, 0.0);
    a.w2.assign(static_cast<std::size_t>(J) * K * K, 0.0);
    a.b2.assign(static_cast<std::size_t>(J) * K, 0.0);
    return a;
  }

  std::size_t w1_size() const { return static_cast<std::size_t>(J) * K * N; }
  std::size_t unit_count() const { return static_cast<std::size_t>(J) * K; }
  std::size_t w2_size() const { return static_cast<std::size_t>(J) * K * K; }

  void check_shape() const {
    if (J < 1 || K < 1 || N < 1 || w1.size() != w1_size() || b1.size() != unit_count() ||
        w2.size() != w2_size() || b2.size() != unit_count()) {
      throw std::invalid_argument("AxisNetwork: tensor shapes do not match J, K, N");
    }
  }

  bool finite() const {
    for (const auto* v : {&w1, &b1, &w2, &b2}) {
      for (double p : *v) {
        if (!std::isfinite(p)) return false;
      }
    }
    return true;
  }

  std::vector<std::vector<double>*> blocks() { return {&w1, &b1, &w2, &b2}; }
  std::vector<const std::vector<double>*> blocks() const { return {&w1, &b1, &w2, &b2}; }

  friend bool operator==(const AxisNetwork&, const AxisNetwork&) = default;
};

struct MdlModel {
  AxisNetwork x;
  AxisNetwork y;
  Rect norm = kUnitSquare;  ///< bounds mapped onto [0,1]^2
  std::uint64_t seed = 0;

  int J() const { return x.J; }
  int K() const { return x.K; }
  int N() const { return x.N; }

  AxisNetwork& axis(int a) { return a == 0 ? x : y; }
  const AxisNetwork& axis(int a) const { return a == 0 ? x : y; }

  void check_shape() const {
    x.check_shape();
    y.check_shape();
    if (x.J != y.J || x.K != y.K || x.N != y.N) {
      throw std::invalid_argument("MdlModel: axes disagree on J, K, N");
    }
  }

  std::size_t parameter_count() const {
    return 2 * (x.w1.size() + x.b1.size() + x.w2.size() + x.b2.size());
  }

  /// Visits every parameter (x axis first, blocks in w1, b1, w2, b2 order).
  template <typename F>
  void for_each_parameter(F&& f) {
    for (int a = 0; a < 2; ++a) {
      for (auto* blk : axis(a).blocks()) {
        for (double& p : *blk) f(p);
      }
    }
  }

  /// Same-shaped model with every parameter zero; used as a gradient buffer.
  MdlModel zeros_like() const {
    MdlModel g;
    g.x = AxisNetwork::zeros(J(), K(), N());
    g.y = AxisNetwork::zeros(J(), K(), N());
    g.norm = norm;
    g.seed = seed;
    return g;
  }

  friend bool operator==(const MdlModel&, const MdlModel&) = default;
};

/// Random initialization: log-weights uniform on [-1, 0], layer-1 biases
/// uniform on [-0.5, 0.5]. Layer-2 biases put group j's phantom at the
/// (j+1)/(J+1) quantile of [0,1] for the all-zero input, so the J groups
/// start spread over the unit interval.
inline MdlModel init_model(int J, int K, int N, const Rect& norm, std::uint64_t seed) {
  MdlModel m;
  m.norm = norm;
  m.seed = seed;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> logw(-1.0, 0.0);
  std::uniform_real_distribution<double> bias(-0.5, 0.5);
  for (int a = 0; a < 2; ++a) {
    AxisNetwork net = AxisNetwork::zeros(J, K, N);
    for (double& w : net.w1) w = logw(rng);
    for (double& b : net.b1) b = bias(rng);
    for (double& w : net.w2) w = logw(rng);
    for (int j = 0; j < J; ++j) {
      const double target = activation_inverse(static_cast<double>(j + 1) / (J + 1));
      for (int k = 0; k < K; ++k) {
        double centered = 0.0;
        for (int m2 = 0; m2 < K; ++m2) {
          centered += std::exp(net.w2[(static_cast<std::size_t>(j) * K + k) * K + m2]) *
                      activation(net.b1[static_cast<std::size_t>(j) * K + m2]);
        }
        net.b2[static_cast<std::size_t>(j) * K + k] = target - centered;
      }
    }
    m.axis(a) = std::move(net);
  }
  return m;
}

/// Branches selected by one evaluation of nu, plus the smallest gap between
/// a selected value and its nearest competitor (0 means a tie).
struct NuTrace {
  double value = 0.0;
  int j = 0;
  int k = 0;
  double margin = 0.0;
};

/// Evaluates an AxisNetwork with its exponentiated weights cached.
class AxisEvaluator {
 public:
  explicit AxisEvaluator(const AxisNetwork& net) : net_(&net) {
    net.check_shape();
    ew1_.resize(net.w1.size());
    ew2_.resize(net.w2.size());
    std::transform(net.w1.begin(), net.w1.end(), ew1_.begin(), [](double w) { return std::exp(w); });
    std::transform(net.w2.begin(), net.w2.end(), ew2_.begin(), [](double w) { return std::exp(w); });
  }

  const AxisNetwork& network() const { return *net_; }

  /// Layer-1 pre-activations for input z. Positive and negative inputs are
  /// summed separately, which keeps the rounded result monotone in z and
  /// independent of which positions hold equal weights.
  std::vector<double> layer1(std::span<const double> z) const {
    const AxisNetwork& n = *net_;
    if (static_cast<int>(z.size()) != n.N) throw std::invalid_argument("nu: |z| != N");
    std::vector<double> pre(n.unit_count());
    for (std::size_t u = 0; u < pre.size(); ++u) {
      double up = 0.0;
      double down = 0.0;
      for (int i = 0; i < n.N; ++i) {
        const double t = ew1_[u * n.N + i] * z[i];
        if (t > 0.0) {
          up += t;
        } else {
          down -= t;
        }
      }
      pre[u] = n.b1[u] + (up - down);
    }
    return pre;
  }

  /// max_j min_k of the layer-2 outputs, given layer-1 pre-activations.
  double from_layer1(std::span<const double> pre, NuTrace* trace = nullptr) const {
    const AxisNetwork& n = *net_;
    const int J = n.J;
    const int K = n.K;
    std::vector<double> hidden(static_cast<std::size_t>(K));
    double best = -std::numeric_limits<double>::infinity();
    double second = -std::numeric_limits<double>::infinity();
    int best_j = 0;
    int best_k = 0;
    double best_k_gap = std::numeric_limits<double>::infinity();
    for (int j = 0; j < J; ++j) {
      for (int m = 0; m < K; ++m) hidden[m] = activation(pre[static_cast<std::size_t>(j) * K + m]);
      double lo = std::numeric_limits<double>::infinity();
      double lo2 = std::numeric_limits<double>::infinity();
      int lo_k = 0;
      for (int k = 0; k < K; ++k) {
        const std::size_t u = static_cast<std::size_t>(j) * K + k;
        double acc = n.b2[u];
        for (int m = 0; m < K; ++m) acc += ew2_[u * K + m] * hidden[m];
        const double out = activation(acc);
        if (out < lo) {
          lo2 = lo;
          lo = out;
          lo_k = k;
        } else if (out < lo2) {
          lo2 = out;
        }
      }
      if (lo > best) {
        second = best;
        best = lo;
        best_j = j;
        best_k = lo_k;
        best_k_gap = lo2 - lo;
      } else if (lo > second) {
        second = lo;
      }
    }
    if (trace) {
      trace->value = best;
      trace->j = best_j;
      trace->k = best_k;
      trace->margin = std::min(best - second, best_k_gap);
    }
    return best;
  }

  double operator()(std::span<const double> z, NuTrace* trace = nullptr) const {
    return from_layer1(layer1(z), trace);
  }

  /// Accumulates upstream * d nu / d params into `grad` along the branch in
  /// `trace` (subgradient: only the selected max/min unit contributes).
  void backward(std::span<const double> z, const NuTrace& trace, double upstream,
                AxisNetwork& grad) const {
    const AxisNetwork& n = *net_;
    const int K = n.K;
    const std::vector<double> pre = layer1(z);
    const std::size_t row = static_cast<std::size_t>(trace.j) * K;
    const std::size_t u = row + trace.k;

    double acc = n.b2[u];
    std::vector<double> hidden(static_cast<std::size_t>(K));
    for (int m = 0; m < K; ++m) {
      hidden[m] = activation(pre[row + m]);
      acc += ew2_[u * K + m] * hidden[m];
    }
    const double d_acc = upstream * activation_slope(acc);
    grad.b2[u] += d_acc;
    for (int m = 0; m < K; ++m) {
      const double e2 = ew2_[u * K + m];
      grad.w2[u * K + m] += d_acc * e2 * hidden[m];
      const double d_pre = d_acc * e2 * activation_slope(pre[row + m]);
      grad.b1[row + m] += d_pre;
      for (int i = 0; i < n.N; ++i) {
        grad.w1[(row + m) * n.N + i] += d_pre * ew1_[(row + m) * n.N + i] * z[i];
      }
    }
  }

 private:
  const AxisNetwork* net_;
  std::vector<double> ew1_;
  std::vector<double> ew2_;
};

/// The N-length {-1,+1} indicator of worker set `members` (0-based ids).
inline std::vector<double> encode_subset(std::span<const int> members, int n) {
  std::vector<double> z(static_cast<std::size_t>(n), -1.0);
  for (int id : members) {
    if (id < 0 || id >= n) throw std::out_of_range("encode_subset: id out of range");
    z[static_cast<std::size_t>(id)] = 1.0;
  }
  return z;
}

inline double monotonic_forward(const AxisNetwork& net, std::span<const double> z) {
  return AxisEvaluator(net)(z);
}

/// Record of which term won the outer max-min on one axis.
struct AxisTrace {
  double value = 0.0;
  int term = 0;           ///< 0-based position in descending order
  bool via_phantom = false;
  NuTrace nu;             ///< branch inside nu for the winning term
  std::vector<double> z;  ///< encoding of the winning term's set
  double margin = 0.0;    ///< smallest gap at any selected max/min
};

/// Outcome on one axis for reports `coords` (normalized units).
inline double axis_forward(const AxisEvaluator& eval, std::span<const double> coords,
                           AxisTrace* trace = nullptr) {
  const int n = eval.network().N;
  if (static_cast<int>(coords.size()) != n) {
    throw std::invalid_argument("mechanism: number of reports != N");
  }
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return coords[a] > coords[b]; });

  std::vector<double> z(static_cast<std::size_t>(n), -1.0);
  double best = -std::numeric_limits<double>::infinity();
  double second = -std::numeric_limits<double>::infinity();
  for (int j = 0; j < n; ++j) {
    const int who = order[j];
    z[who] = 1.0;
    // Recomputed per set so rounding cannot depend on the order reports arrive.
    const std::vector<double> pre = eval.layer1(z);
    NuTrace nt;
    const double phantom = eval.from_layer1(pre, trace ? &nt : nullptr);
    const double report = coords[who];
    // min{phantom, report}; the phantom wins exact ties.
    const bool via_phantom = phantom <= report;
    const double term = via_phantom ? phantom : report;
    if (term > best) {
      second = best;
      best = term;
      if (trace) {
        trace->term = j;
        trace->via_phantom = via_phantom;
        trace->nu = nt;
        trace->z = z;
        trace->margin = std::abs(phantom - report);
        if (via_phantom) trace->margin = std::min(trace->margin, nt.margin);
      }
    } else if (term > second) {
      second = term;
    }
  }
  if (trace) {
    trace->value = best;
    trace->margin = std::min(trace->margin, best - second);
  }
  return best;
}

/// Mechanism outcome in normalized coordinates.
inline Point2 mechanism_forward(const MdlModel& model, std::span<const Point2> locations) {
  model.check_shape();
  std::vector<double> xs;
  std::vector<double> ys;
  for (Point2 p : locations) {
    xs.push_back(p.x);
    ys.push_back(p.y);
  }
  return {axis_forward(AxisEvaluator(model.x), xs), axis_forward(AxisEvaluator(model.y), ys)};
}

}  // namespace wpsc::mdl

#endif  // WPSC_MDL_NETWORK_HPP
