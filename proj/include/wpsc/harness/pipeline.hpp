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

#ifndef WPSC_HARNESS_PIPELINE_HPP
#define WPSC_HARNESS_PIPELINE_HPP

// End-to-end experiment: workers -> allocation -> samples -> labels -> MDL
// training -> evaluation -> audit. Stages run lazily and at most once; a
// failure surfaces as a StageError naming the stage.

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "wpsc/deploy/audit.hpp"
#include "wpsc/deploy/metrics.hpp"
#include "wpsc/deploy/uniform.hpp"
#include "wpsc/harness/config.hpp"
#include "wpsc/harness/random.hpp"
#include "wpsc/harness/report.hpp"
#include "wpsc/harness/samples.hpp"
#include "wpsc/harness/traces.hpp"
#include "wpsc/mdl/checkpoint.hpp"
#include "wpsc/mdl/train.hpp"
#include "wpsc/stackelberg.hpp"

namespace wpsc::harness {

class StageError : public std::runtime_error {
 public:
  StageError(std::string stage, const std::string& what)
      : std::runtime_error(fmt::format("[{}] {}", stage, what)), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

/// Random workers with rectangular working areas inside the task area.
inline std::vector<Worker> random_workers(const WorkerSpec& spec, const SystemConfig& cfg,
                                          std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const Rect& a = cfg.task_area;
  std::vector<Worker> out;
  for (int i = 0; i < spec.count; ++i) {
    const double b = spec.b_min + (spec.b_max - spec.b_min) * unit(rng);
    const double wx = a.width() * (spec.side_min + (spec.side_max - spec.side_min) * unit(rng));
    const double wy = a.height() * (spec.side_min + (spec.side_max - spec.side_min) * unit(rng));
    const double x0 = a.xmin + (a.width() - wx) * unit(rng);
    const double y0 = a.ymin + (a.height() - wy) * unit(rng);
    const Rect area{x0, x0 + wx, y0, y0 + wy};
    const Point2 loc{x0 + wx * unit(rng), y0 + wy * unit(rng)};
    out.push_back(Worker::make(i, b, area.clamp(loc), area, cfg));
  }
  return out;
}

class Pipeline {
 public:
  explicit Pipeline(ExperimentConfig cfg) : cfg_(std::move(cfg)) { cfg_.validate(); }

  const ExperimentConfig& config() const { return cfg_; }

  const std::vector<Worker>& workers() {
    if (!workers_) {
      stage("workers", [&] {
        const std::uint64_t seed = stage_seed(cfg_.seed, Stage::workers);
        if (cfg_.data.source == "synthetic") {
          workers_ = random_workers(cfg_.workers, cfg_.system, seed);
          return;
        }
        std::ifstream in(cfg_.data.traces);
        if (!in) throw std::runtime_error("cannot open trace file " + cfg_.data.traces);
        const auto records = read_traces(in, cfg_.data.traces);
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        std::map<int, double> b;
        for (const auto& r : records) b.emplace(r.worker_id, 0.0);
        for (auto& [id, v] : b) v = cfg_.workers.b_min + (cfg_.workers.b_max - cfg_.workers.b_min) * unit(rng);
        IngestResult ing = ingest_traces(records, cfg_.system, [&](int id) { return b.at(id); });
        if (ing.workers.empty()) throw std::runtime_error("no worker has a record inside the task area");
        if (static_cast<std::size_t>(cfg_.workers.count) < ing.workers.size()) {
          const auto keep = busiest_traces(ing.traces, static_cast<std::size_t>(cfg_.workers.count));
          IngestResult sub = ing;
          sub.traces.clear();
          sub.workers.clear();
          for (std::size_t i : keep) {
            sub.traces.push_back(ing.traces[i]);
            sub.workers.push_back(ing.workers[i]);
          }
          ing = std::move(sub);
        }
        workers_ = ing.workers;
        ingest_ = std::move(ing);
      });
    }
    return *workers_;
  }

  const std::optional<IngestResult>& ingest() {
    workers();
    return ingest_;
  }

  const EquilibriumReport& allocation() {
    if (!allocation_) {
      const auto& ws = workers();
      stage("allocate", [&] {
        allocation_ = stackelberg_equilibrium(ws, cfg_.system, cfg_.solver);
        if (allocation_->outcome.employed.empty()) {
          throw std::runtime_error("no worker is employed at the equilibrium");
        }
      });
    }
    return *allocation_;
  }

  /// Phase-2 weights of the employed workers, in employed order.
  std::vector<double> weights() {
    const auto& eq = allocation();
    return deployment_weights(eq.outcome, workers(), cfg_.system);
  }

  std::vector<Worker> employed_workers() {
    std::vector<Worker> out;
    for (int id : allocation().outcome.employed) out.push_back(workers()[index_of(workers(), id)]);
    return out;
  }

  const SampleSet& samples() {
    if (!samples_) {
      const auto employed = employed_workers();
      stage("samples", [&] {
        const Rect& norm = cfg_.system.task_area;
        if (cfg_.data.source == "traces") {
          std::vector<int> ids;
          for (const auto& w : employed) ids.push_back(w.id);
          samples_ = build_samples(ingest_->traces, ids, cfg_.data.slot, norm);
        } else {
          std::vector<Rect> rects;
          for (const auto& w : employed) {
            const Point2 lo = norm.normalize({w.working_area.xmin, w.working_area.ymin});
            const Point2 hi = norm.normalize({w.working_area.xmax, w.working_area.ymax});
            rects.push_back(Rect{lo.x, hi.x, lo.y, hi.y});
          }
          samples_ = gen_synthetic(SyntheticSpec::parse(cfg_.data.synthetic),
                                   static_cast<int>(employed.size()), cfg_.data.samples,
                                   stage_seed(cfg_.seed, Stage::samples), norm, rects);
        }
        samples_->validate();
      });
    }
    return *samples_;
  }

  const Split& split() {
    if (!split_) {
      const auto& s = samples();
      stage("split", [&] {
        split_ = split_samples(s, cfg_.data.train_fraction, cfg_.data.random_split,
                               stage_seed(cfg_.seed, Stage::split));
      });
    }
    return *split_;
  }

  const std::vector<mdl::LabeledSample>& train_labels() {
    label();
    return *train_labels_;
  }

  const std::vector<mdl::LabeledSample>& test_labels() {
    label();
    return *test_labels_;
  }

  Point2 msc_constant() {
    if (!msc_constant_) {
      if (cfg_.mechanisms.msc_constant) {
        msc_constant_ = *cfg_.mechanisms.msc_constant;
      } else {
        const auto& sp = split();
        const auto w = weights();
        stage("msc", [&] {
          std::vector<std::vector<Point2>> phys;
          for (const auto& s : sp.train) phys.push_back(denormalize(s));
          msc_constant_ = wpsc::msc_constant(phys, w, cfg_.system, cfg_.mechanisms.msc_grid,
                                             cfg_.mechanisms.med_even_rule);
        });
      }
    }
    return *msc_constant_;
  }

  /// Trained (or loaded) MDL model. `loss_curve()` is empty for a loaded one.
  const mdl::MdlModel& model() {
    if (!model_) {
      if (!cfg_.mdl.checkpoint.empty()) {
        stage("train", [&] {
          model_ = mdl::load_model(cfg_.mdl.checkpoint);
          if (model_->N() != static_cast<int>(allocation().outcome.employed.size())) {
            throw std::runtime_error(fmt::format("checkpoint serves N={} workers but {} are employed",
                                                 model_->N(), allocation().outcome.employed.size()));
          }
        });
      } else {
        const auto& data = train_labels();
        const int n = static_cast<int>(allocation().outcome.employed.size());
        stage("train", [&] {
          const auto init = mdl::init_model(cfg_.mdl.J, cfg_.mdl.K, n, cfg_.system.task_area,
                                            stage_seed(cfg_.seed, Stage::mdl_init));
          mdl::TrainSettings ts = cfg_.mdl.train;
          ts.seed = stage_seed(cfg_.seed, Stage::mdl_train);
          auto res = mdl::train(data, ts, init, cfg_.system);
          model_ = std::move(res.model);
          curve_ = std::move(res.curve);
          best_epoch_ = res.best_epoch;
        });
      }
    }
    return *model_;
  }

  const std::vector<mdl::LossPoint>& loss_curve() {
    model();
    return curve_;
  }

  int best_epoch() {
    model();
    return best_epoch_;
  }

  Mechanism mechanism(MechanismTag tag) {
    switch (tag) {
      case MechanismTag::MED: return med_mechanism(cfg_.mechanisms.med_even_rule);
      case MechanismTag::MSC: return msc_mechanism(msc_constant(), cfg_.mechanisms.med_even_rule);
      case MechanismTag::MDL: return mdl::mdl_mechanism(model());
      case MechanismTag::OPT: return opt_mechanism();
    }
    throw std::logic_error("unknown mechanism tag");
  }

  /// Performance ratios on the test split, one row per configured mechanism.
  const std::vector<MechanismMetrics>& evaluate() {
    if (!metrics_) {
      std::vector<std::pair<MechanismTag, Mechanism>> mechs;
      for (auto tag : cfg_.mechanisms.list) mechs.emplace_back(tag, mechanism(tag));
      const auto& test = test_labels();
      stage("evaluate", [&] {
        const auto inst = test_instances();
        std::vector<double> opt_costs;
        for (std::size_t i = 0; i < inst.size(); ++i) {
          opt_costs.push_back(platform_cost_phase2(cfg_.system.task_area.denormalize(test[i].label), inst[i]));
        }
        std::vector<MechanismMetrics> rows;
        for (const auto& [tag, mech] : mechs) {
          const auto costs = tag == MechanismTag::OPT ? opt_costs : mechanism_costs(mech, inst);
          rows.push_back({std::string(to_string(tag)), performance_ratios(costs, opt_costs), std::nullopt});
        }
        metrics_ = std::move(rows);
      });
    }
    return *metrics_;
  }

  /// Runs the strategyproofness audit of every configured mechanism on the
  /// first audit.instances test samples and attaches it to evaluate() rows.
  const std::vector<MechanismMetrics>& audit() {
    evaluate();
    if (!audited_) {
      std::vector<Mechanism> mechs;
      for (auto tag : cfg_.mechanisms.list) mechs.push_back(mechanism(tag));
      const auto& sp = split();
      const auto& eq = allocation();
      const auto& ws = workers();
      stage("audit", [&] {
        const auto grid = deviation_grid(cfg_.system.task_area, cfg_.audit.grid);
        const std::size_t n = std::min<std::size_t>(static_cast<std::size_t>(cfg_.audit.instances), sp.test.size());
        for (std::size_t m = 0; m < mechs.size(); ++m) {
          MechanismAudit agg;
          agg.report.max_utility_gain = -std::numeric_limits<double>::infinity();
          for (std::size_t i = 0; i < n; ++i) {
            std::vector<Worker> local = ws;
            const auto pts = denormalize(sp.test[i]);
            for (std::size_t k = 0; k < eq.outcome.employed.size(); ++k) {
              local[index_of(local, eq.outcome.employed[k])].location = pts[k];
            }
            const AuditReport r = strategyproofness_audit(mechs[m], eq.outcome, local, cfg_.system, grid);
            ++agg.instances;
            agg.report.tested_deviations += r.tested_deviations;
            agg.report.max_utility_gain = std::max(agg.report.max_utility_gain, r.max_utility_gain);
            agg.report.passed = agg.report.passed && r.passed;
            if (r.violating_case &&
                (!agg.report.violating_case || r.violating_case->gain > agg.report.violating_case->gain)) {
              agg.report.violating_case = r.violating_case;
            }
          }
          if (n == 0) agg.report.max_utility_gain = 0.0;
          (*metrics_)[m].audit = agg;
        }
      });
      audited_ = true;
    }
    return *metrics_;
  }

  std::vector<DeploymentInstance> test_instances() {
    const auto w = weights();
    std::vector<DeploymentInstance> out;
    for (const auto& s : split().test) out.push_back({denormalize(s), w, cfg_.system});
    return out;
  }

 private:
  template <typename F>
  void stage(const char* name, F&& body) {
    try {
      body();
    } catch (const StageError&) {
      throw;
    } catch (const std::exception& e) {
      throw StageError(name, e.what());
    }
  }

  void label() {
    if (train_labels_) return;
    const auto& sp = split();
    const auto w = weights();
    stage("label", [&] {
      train_labels_ = mdl::label_dataset(sp.train, w, cfg_.system, cfg_.system.task_area);
      test_labels_ = mdl::label_dataset(sp.test, w, cfg_.system, cfg_.system.task_area);
    });
  }

  std::vector<Point2> denormalize(const std::vector<Point2>& s) const {
    std::vector<Point2> out;
    out.reserve(s.size());
    for (Point2 p : s) out.push_back(cfg_.system.task_area.denormalize(p));
    return out;
  }

  ExperimentConfig cfg_;
  std::optional<std::vector<Worker>> workers_;
  std::optional<IngestResult> ingest_;
  std::optional<EquilibriumReport> allocation_;
  std::optional<SampleSet> samples_;
  std::optional<Split> split_;
  std::optional<std::vector<mdl::LabeledSample>> train_labels_;
  std::optional<std::vector<mdl::LabeledSample>> test_labels_;
  std::optional<Point2> msc_constant_;
  std::optional<mdl::MdlModel> model_;
  std::vector<mdl::LossPoint> curve_;
  int best_epoch_ = 0;
  std::optional<std::vector<MechanismMetrics>> metrics_;
  bool audited_ = false;
};

// ---------------------------------------------------------------------------
// Report documents

inline nlohmann::json workers_json(Pipeline& p) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& w : p.workers()) {
    arr.push_back({{"id", w.id},
                   {"b", num12(w.b)},
                   {"location", {num12(w.location.x), num12(w.location.y)}},
                   {"working_area", {num12(w.working_area.xmin), num12(w.working_area.xmax),
                                     num12(w.working_area.ymin), num12(w.working_area.ymax)}},
                   {"D", num12(w.D)}});
  }
  nlohmann::json j = {{"source", p.config().data.source}, {"workers", std::move(arr)}};
  if (const auto& ing = p.ingest()) {
    j["ingest"] = {{"distinct_ids", ing->distinct_ids},
                   {"retained_workers", ing->workers.size()},
                   {"dropped_workers", ing->dropped_workers},
                   {"dropped_records", ing->dropped_records}};
  }
  return j;
}

inline nlohmann::json allocation_json(Pipeline& p) {
  const auto& eq = p.allocation();
  const auto& ws = p.workers();
  const auto utils = worker_utilities_phase1(eq.outcome, ws, p.config().system);
  double avg = 0.0;
  for (double u : utils) avg += u;
  avg /= static_cast<double>(utils.size());
  nlohmann::json employed = nlohmann::json::array();
  for (int id : eq.outcome.employed) {
    const std::size_t i = index_of(ws, id);
    employed.push_back({{"id", id},
                        {"rate", num12(eq.outcome.rates[i])},
                        {"share", num12(eq.outcome.shares[i])},
                        {"utility", num12(utils[i])}});
  }
  return {{"p_c", num12(eq.outcome.p_c)},
          {"platform_utility", num12(eq.platform_utility)},
          {"registered_count", ws.size()},
          {"employed_count", eq.outcome.employed.size()},
          {"avg_worker_utility", num12(avg)},
          {"converged", eq.converged},
          {"iterations", eq.iterations},
          {"employed", std::move(employed)}};
}

inline nlohmann::json metrics_json(Pipeline& p) {
  const auto& rows = p.evaluate();
  const auto& sp = p.split();
  const auto& c = p.config();
  nlohmann::json j = {{"seed", c.seed},
                      {"phase1", allocation_json(p)},
                      {"samples",
                       {{"provenance", p.samples().provenance},
                        {"total", p.samples().samples.size()},
                        {"skipped_slots", p.samples().skipped_slots},
                        {"train", sp.train.size()},
                        {"test", sp.test.size()}}}};
  for (auto tag : c.mechanisms.list) {
    if (tag == MechanismTag::MSC) {
      const Point2 k = p.msc_constant();
      j["msc_constant"] = {num12(k.x), num12(k.y)};
    }
    if (tag == MechanismTag::MDL) {
      const auto& curve = p.loss_curve();
      j["mdl"] = {{"J", p.model().J()}, {"K", p.model().K()}, {"N", p.model().N()},
                  {"loaded", !c.mdl.checkpoint.empty()}};
      if (!curve.empty()) {
        j["mdl"]["best_epoch"] = p.best_epoch();
        j["mdl"]["best_val_loss"] = num12(curve.back().best_val);
      }
    }
  }
  j["mechanisms"] = mechanisms_json(rows);
  return j;
}

inline nlohmann::json labels_json(Pipeline& p) {
  auto dump = [](const std::vector<mdl::LabeledSample>& v) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& s : v) {
      nlohmann::json locs = nlohmann::json::array();
      for (Point2 q : s.locations) locs.push_back({q.x, q.y});
      arr.push_back({{"locations", std::move(locs)}, {"label", {s.label.x, s.label.y}}});
    }
    return arr;
  };
  return {{"weights", p.weights()}, {"train", dump(p.train_labels())}, {"test", dump(p.test_labels())}};
}

/// Files produced by one command, written together. If any write fails, the
/// files already written by this call are removed.
class OutputSet {
 public:
  explicit OutputSet(std::filesystem::path dir) : dir_(std::move(dir)) {}

  void add(const std::string& name, std::string content) { files_.emplace_back(name, std::move(content)); }
  void add_json(const std::string& name, const nlohmann::json& j) { add(name, j.dump(2) + "\n"); }

  std::vector<std::filesystem::path> commit() {
    std::vector<std::filesystem::path> written;
    try {
      std::filesystem::create_directories(dir_);
      for (const auto& [name, content] : files_) {
        const auto path = dir_ / name;
        std::ofstream f(path, std::ios::binary | std::ios::trunc);
        written.push_back(path);
        if (!f || !(f << content) || !f.flush()) throw std::runtime_error("cannot write " + path.string());
      }
    } catch (const std::exception& e) {
      for (const auto& path : written) {
        std::error_code ec;
        std::filesystem::remove(path, ec);
      }
      throw StageError("report", e.what());
    }
    return written;
  }

 private:
  std::filesystem::path dir_;
  std::vector<std::pair<std::string, std::string>> files_;
};

}  // namespace wpsc::harness

#endif  // WPSC_HARNESS_PIPELINE_HPP
