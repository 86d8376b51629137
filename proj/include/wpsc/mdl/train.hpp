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

#ifndef WPSC_MDL_TRAIN_HPP
#define WPSC_MDL_TRAIN_HPP

// Supervised training of the MDL mechanism against OPT labels.
//
// Per-sample loss is (c_hat - c_star)^2 where c_hat is the platform cost at
// the (denormalized) mechanism output and c_star the cost at the OPT label.
// Gradients follow the branch selected by each max/min.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <numeric>
#include <random>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "wpsc/deploy/mechanisms.hpp"
#include "wpsc/deploy/optimum.hpp"
#include "wpsc/mdl/network.hpp"
#include "wpsc/model.hpp"

namespace wpsc::mdl {

/// One training example, coordinates normalized to [0,1]^2.
struct LabeledSample {
  std::vector<Point2> locations;
  std::vector<double> weights;
  Point2 label;
};

/// Attaches the OPT deployment to each normalized sample. OPT runs in the
/// physical units of `cfg` and its answer is normalized back by `norm`.
inline std::vector<LabeledSample> label_dataset(std::span<const std::vector<Point2>> samples,
                                                std::span<const double> weights,
                                                const SystemConfig& cfg, const Rect& norm,
                                                const OptSettings& opt = {}) {
  std::vector<LabeledSample> out;
  out.reserve(samples.size());
  DeploymentInstance inst;
  inst.config = cfg;
  inst.weights.assign(weights.begin(), weights.end());
  for (const auto& s : samples) {
    inst.points.clear();
    for (Point2 p : s) inst.points.push_back(norm.denormalize(p));
    out.push_back({s, inst.weights, norm.normalize(opt_deploy(inst, opt))});
  }
  return out;
}

/// A model with both axes' exponentiated weights cached.
class PreparedModel {
 public:
  explicit PreparedModel(const MdlModel& m) : model_(&m), x_(m.x), y_(m.y) { m.check_shape(); }

  const MdlModel& model() const { return *model_; }
  const AxisEvaluator& axis(int a) const { return a == 0 ? x_ : y_; }

  Point2 forward(std::span<const Point2> locations, AxisTrace* tx = nullptr,
                 AxisTrace* ty = nullptr) const {
    std::vector<double> xs(locations.size());
    std::vector<double> ys(locations.size());
    for (std::size_t i = 0; i < locations.size(); ++i) {
      xs[i] = locations[i].x;
      ys[i] = locations[i].y;
    }
    return {axis_forward(x_, xs, tx), axis_forward(y_, ys, ty)};
  }

 private:
  const MdlModel* model_;
  AxisEvaluator x_;
  AxisEvaluator y_;
};

/// The MDL model as a deployment mechanism on physical coordinates.
inline Mechanism mdl_mechanism(MdlModel model) {
  auto m = std::make_shared<const MdlModel>(std::move(model));
  auto pm = std::make_shared<const PreparedModel>(*m);
  return [m, pm](const DeploymentInstance& inst) {
    std::vector<Point2> pts;
    pts.reserve(inst.points.size());
    for (Point2 p : inst.points) pts.push_back(m->norm.normalize(p));
    return m->norm.denormalize(pm->forward(pts));
  };
}

/// Per-sample loss; when `grad` is given, adds the loss gradient into it.
/// `min_margin`, when given, receives the smallest max/min gap on either axis.
inline double sample_loss(const PreparedModel& pm, const LabeledSample& s, const SystemConfig& cfg,
                          MdlModel* grad = nullptr, double* min_margin = nullptr) {
  const MdlModel& m = pm.model();
  const bool tracing = grad != nullptr || min_margin != nullptr;
  AxisTrace tx;
  AxisTrace ty;
  const Point2 out = pm.forward(s.locations, tracing ? &tx : nullptr, tracing ? &ty : nullptr);

  std::vector<Point2> phys(s.locations.size());
  for (std::size_t i = 0; i < phys.size(); ++i) phys[i] = m.norm.denormalize(s.locations[i]);
  const Point2 bs = m.norm.denormalize(out);
  const double c_hat = platform_cost_phase2(bs, phys, s.weights, cfg);
  const double c_star = platform_cost_phase2(m.norm.denormalize(s.label), phys, s.weights, cfg);
  const double diff = c_hat - c_star;

  if (min_margin) *min_margin = std::min(tx.margin, ty.margin);
  if (grad) {
    const Point2 g = platform_cost_gradient(bs, phys, s.weights, cfg);
    const double up_x = 2.0 * diff * g.x * m.norm.width();
    const double up_y = 2.0 * diff * g.y * m.norm.height();
    if (tx.via_phantom) pm.axis(0).backward(tx.z, tx.nu, up_x, grad->x);
    if (ty.via_phantom) pm.axis(1).backward(ty.z, ty.nu, up_y, grad->y);
  }
  return diff * diff;
}

inline double dataset_loss(const MdlModel& model, std::span<const LabeledSample> data,
                           const SystemConfig& cfg) {
  if (data.empty()) return 0.0;
  const PreparedModel pm(model);
  double total = 0.0;
  for (const auto& s : data) total += sample_loss(pm, s, cfg);
  return total / static_cast<double>(data.size());
}

struct TrainSettings {
  double learning_rate = 0.005;
  int batch = 200;
  int epochs = 50;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double validation_fraction = 0.1;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
      throw std::invalid_argument("TrainSettings: learning_rate must be finite and >= 0");
    }
    if (batch < 1) throw std::invalid_argument("TrainSettings: batch must be >= 1");
    if (epochs < 0) throw std::invalid_argument("TrainSettings: epochs must be >= 0");
    if (!(validation_fraction >= 0.0 && validation_fraction < 1.0)) {
      throw std::invalid_argument("TrainSettings: validation_fraction must be in [0,1)");
    }
  }
};

struct LossPoint {
  int epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double best_val = 0.0;
};

struct TrainResult {
  MdlModel model;  ///< parameters with the lowest validation loss
  std::vector<LossPoint> curve;
  int best_epoch = 0;
  long steps = 0;
};

class TrainingDiverged : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

/// Applies f(param, grad, m, v) across four same-shaped models.
template <typename F>
void zip_parameters(MdlModel& p, MdlModel& g, MdlModel& m, MdlModel& v, F&& f) {
  for (int a = 0; a < 2; ++a) {
    auto pb = p.axis(a).blocks();
    auto gb = g.axis(a).blocks();
    auto mb = m.axis(a).blocks();
    auto vb = v.axis(a).blocks();
    for (std::size_t b = 0; b < pb.size(); ++b) {
      for (std::size_t i = 0; i < pb[b]->size(); ++i) {
        f((*pb[b])[i], (*gb[b])[i], (*mb[b])[i], (*vb[b])[i]);
      }
    }
  }
}

}  // namespace detail

/// Adam on the mean per-sample loss. The data is split into train and
/// validation parts with a seeded shuffle; with fewer than two samples or a
/// zero validation fraction the training set doubles as validation set.
inline TrainResult train(std::span<const LabeledSample> data, const TrainSettings& settings,
                         const MdlModel& init, const SystemConfig& cfg) {
  settings.validate();
  init.check_shape();
  if (data.empty()) throw std::invalid_argument("train: empty dataset");
  for (const auto& s : data) {
    if (static_cast<int>(s.locations.size()) != init.N() || s.weights.size() != s.locations.size()) {
      throw std::invalid_argument("train: sample arity does not match model N");
    }
  }

  std::mt19937_64 rng(settings.seed);
  std::vector<std::size_t> idx(data.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::shuffle(idx.begin(), idx.end(), rng);
  const auto n_val = static_cast<std::size_t>(
      std::llround(settings.validation_fraction * static_cast<double>(data.size())));
  std::vector<LabeledSample> val;
  std::vector<std::size_t> train_idx;
  if (n_val == 0 || n_val >= data.size()) {
    train_idx = idx;
    val.assign(data.begin(), data.end());
  } else {
    for (std::size_t i = 0; i < n_val; ++i) val.push_back(data[idx[i]]);
    train_idx.assign(idx.begin() + static_cast<std::ptrdiff_t>(n_val), idx.end());
    std::sort(train_idx.begin(), train_idx.end());
  }

  TrainResult res;
  MdlModel params = init;
  MdlModel m1 = init.zeros_like();
  MdlModel m2 = init.zeros_like();
  res.model = params;
  double best = dataset_loss(params, val, cfg);
  if (!std::isfinite(best)) throw TrainingDiverged("train: initial validation loss is not finite");
  res.curve.push_back({0, dataset_loss(params, data, cfg), best, best});

  const std::size_t batch = static_cast<std::size_t>(settings.batch);
  for (int epoch = 1; epoch <= settings.epochs; ++epoch) {
    std::shuffle(train_idx.begin(), train_idx.end(), rng);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < train_idx.size(); start += batch) {
      const std::size_t stop = std::min(train_idx.size(), start + batch);
      MdlModel grad = params.zeros_like();
      double batch_loss = 0.0;
      {
        const PreparedModel pm(params);
        for (std::size_t i = start; i < stop; ++i) {
          batch_loss += sample_loss(pm, data[train_idx[i]], cfg, &grad);
        }
      }
      if (!std::isfinite(batch_loss)) {
        std::ostringstream msg;
        msg << "train: loss became non-finite at epoch " << epoch << ", step " << res.steps + 1;
        throw TrainingDiverged(msg.str());
      }
      epoch_loss += batch_loss;
      const double inv = 1.0 / static_cast<double>(stop - start);
      ++res.steps;
      const double bc1 = 1.0 - std::pow(settings.beta1, static_cast<double>(res.steps));
      const double bc2 = 1.0 - std::pow(settings.beta2, static_cast<double>(res.steps));
      detail::zip_parameters(params, grad, m1, m2, [&](double& p, double& g, double& m, double& v) {
        const double gi = g * inv;
        m = settings.beta1 * m + (1.0 - settings.beta1) * gi;
        v = settings.beta2 * v + (1.0 - settings.beta2) * gi * gi;
        p -= settings.learning_rate * (m / bc1) / (std::sqrt(v / bc2) + settings.epsilon);
      });
    }
    if (!params.x.finite() || !params.y.finite()) {
      throw TrainingDiverged("train: parameters became non-finite at epoch " +
                             std::to_string(epoch));
    }
    const double v = dataset_loss(params, val, cfg);
    if (!std::isfinite(v)) {
      throw TrainingDiverged("train: validation loss became non-finite at epoch " +
                             std::to_string(epoch));
    }
    if (v < best) {
      best = v;
      res.model = params;
      res.best_epoch = epoch;
    }
    res.curve.push_back(
        {epoch, epoch_loss / static_cast<double>(train_idx.size()), v, best});
  }
  return res;
}

struct GradCheckOptions {
  double step = 1e-6;
  int probes = 50;
  int max_resamples = 10;
  double tie_margin = 1e-4;  ///< smallest max/min gap treated as general position
  double jitter = 1e-3;      ///< location noise used when resampling
  std::uint64_t seed = 0;
};

struct GradCheckResult {
  bool skipped = false;  ///< tie found and resampling disabled
  int resamples = 0;
  int probes = 0;
  std::size_t active = 0;  ///< parameters with a nonzero analytic gradient
  double max_rel_error = 0.0;
};

/// Relative error used by the gradient checks; absolute below `floor`.
inline double relative_error(double analytic, double numeric, double floor = 1e-8) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor});
}

/// Compares analytic loss gradients with central differences on randomly
/// chosen parameters. Probes are drawn from parameters on the selected
/// branches (all parameters when the gradient vanishes everywhere).
inline GradCheckResult subgradient_check(const MdlModel& model, LabeledSample sample,
                                         const SystemConfig& cfg,
                                         const GradCheckOptions& opt = {}) {
  GradCheckResult res;
  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> noise(-opt.jitter, opt.jitter);
  MdlModel grad = model.zeros_like();
  for (;;) {
    double margin = 0.0;
    grad = model.zeros_like();
    sample_loss(PreparedModel(model), sample, cfg, &grad, &margin);
    if (margin >= opt.tie_margin) break;
    if (opt.max_resamples == 0) {
      res.skipped = true;
      return res;
    }
    if (res.resamples == opt.max_resamples) {
      throw std::runtime_error("subgradient_check: ties persist after " +
                               std::to_string(opt.max_resamples) + " resamples");
    }
    ++res.resamples;
    for (Point2& p : sample.locations) {
      p = kUnitSquare.clamp({p.x + noise(rng), p.y + noise(rng)});
    }
  }

  std::vector<double*> params;
  std::vector<double> analytic;
  MdlModel probe = model;
  probe.for_each_parameter([&](double& p) { params.push_back(&p); });
  grad.for_each_parameter([&](double& g) { analytic.push_back(g); });
  std::vector<std::size_t> active;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    if (analytic[i] != 0.0) active.push_back(i);
  }
  res.active = active.size();
  if (active.empty()) {
    active.resize(analytic.size());
    std::iota(active.begin(), active.end(), 0);
  }
  std::uniform_int_distribution<std::size_t> pick(0, active.size() - 1);
  for (int t = 0; t < opt.probes; ++t) {
    const std::size_t i = active[pick(rng)];
    const double saved = *params[i];
    *params[i] = saved + opt.step;
    const double up = sample_loss(PreparedModel(probe), sample, cfg);
    *params[i] = saved - opt.step;
    const double down = sample_loss(PreparedModel(probe), sample, cfg);
    *params[i] = saved;
    const double numeric = (up - down) / (2.0 * opt.step);
    res.max_rel_error = std::max(res.max_rel_error, relative_error(analytic[i], numeric));
    ++res.probes;
  }
  return res;
}

}  // namespace wpsc::mdl

#endif  // WPSC_MDL_TRAIN_HPP
