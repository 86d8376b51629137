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

#ifndef WPSC_HARNESS_SAMPLES_HPP
#define WPSC_HARNESS_SAMPLES_HPP

// Location samples: one point per employed worker per time slot, stored in
// coordinates normalized to [0,1]^2.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "wpsc/geometry.hpp"
#include "wpsc/harness/traces.hpp"

namespace wpsc::harness {

struct SampleSet {
  std::vector<std::vector<Point2>> samples;
  Rect norm = kUnitSquare;  ///< physical bounds mapped onto [0,1]^2
  std::string provenance;   ///< "traces" or "synthetic:<spec>"
  int skipped_slots = 0;

  std::size_t arity() const { return samples.empty() ? 0 : samples.front().size(); }

  void validate() const {
    for (std::size_t i = 0; i < samples.size(); ++i) {
      if (samples[i].size() != arity()) {
        throw std::invalid_argument(fmt::format("SampleSet: sample {} has arity {}, expected {}", i,
                                                samples[i].size(), arity()));
      }
      for (Point2 p : samples[i]) {
        if (!kUnitSquare.contains(p)) {
          throw std::invalid_argument(fmt::format("SampleSet: sample {} leaves [0,1]^2", i));
        }
      }
    }
  }
};

/// Cuts the traces of the `employed` workers into slots of `slot` seconds
/// starting at their earliest record. A slot becomes a sample when every
/// employed worker has a record in it; the latest such record is used.
inline SampleSet build_samples(const std::vector<WorkerTrace>& traces,
                               const std::vector<int>& employed, double slot, const Rect& norm) {
  if (!(slot > 0.0)) throw std::invalid_argument("build_samples: slot must be > 0");
  if (employed.empty()) throw std::invalid_argument("build_samples: no employed workers");
  std::vector<const WorkerTrace*> rows;
  for (int id : employed) {
    auto it = std::find_if(traces.begin(), traces.end(), [&](const WorkerTrace& t) { return t.id == id; });
    if (it == traces.end() || it->records.empty()) {
      throw std::invalid_argument(fmt::format("build_samples: no trace for worker {}", id));
    }
    rows.push_back(&*it);
  }
  double t0 = std::numeric_limits<double>::infinity();
  for (const auto* t : rows) t0 = std::min(t0, t->records.front().timestamp);

  // slot index -> per-worker latest point
  std::map<long, std::vector<std::optional<Point2>>> slots;
  for (std::size_t w = 0; w < rows.size(); ++w) {
    for (const auto& r : rows[w]->records) {
      const long k = static_cast<long>(std::floor((r.timestamp - t0) / slot));
      auto& cell = slots[k];
      if (cell.empty()) cell.resize(rows.size());
      cell[w] = Point2{r.x, r.y};
    }
  }
  SampleSet set;
  set.norm = norm;
  set.provenance = "traces";
  const long last = slots.empty() ? -1 : slots.rbegin()->first;
  for (long k = 0; k <= last; ++k) {
    auto it = slots.find(k);
    if (it == slots.end() ||
        std::any_of(it->second.begin(), it->second.end(), [](const auto& p) { return !p; })) {
      ++set.skipped_slots;
      continue;
    }
    std::vector<Point2> s;
    for (const auto& p : it->second) s.push_back(norm.normalize(norm.clamp(*p)));
    set.samples.push_back(std::move(s));
  }
  if (set.samples.empty()) throw std::runtime_error("build_samples: no complete slots");
  return set;
}

/// Generator for synthetic samples on [0,1]^2:
///   uniform                        i.i.d. uniform points
///   mixture:mx,my,sd,w;...         each point picks a Gaussian component by weight
///                                  (clamped to the square)
///   rects:x0,x1,y0,y1;...          worker i uniform in rectangle i (cycled)
struct SyntheticSpec {
  enum class Kind { uniform, mixture, rects };
  struct Component {
    Point2 mean;
    double sd = 0.1;
    double weight = 1.0;
  };
  Kind kind = Kind::uniform;
  std::vector<Component> components;
  std::vector<Rect> rects;

  static SyntheticSpec parse(std::string_view text) {
    SyntheticSpec spec;
    const auto colon = text.find(':');
    const std::string_view head = text.substr(0, colon);
    const std::string_view body = colon == std::string_view::npos ? "" : text.substr(colon + 1);
    auto numbers = [&](std::string_view group, std::size_t want) {
      std::vector<double> v;
      std::stringstream ss{std::string(group)};
      std::string tok;
      while (std::getline(ss, tok, ',')) {
        double d = 0.0;
        if (!detail::parse_field(tok, d)) {
          throw std::invalid_argument(fmt::format("synthetic spec: bad number '{}'", tok));
        }
        v.push_back(d);
      }
      if (v.size() != want) {
        throw std::invalid_argument(
            fmt::format("synthetic spec: '{}' needs {} numbers", group, want));
      }
      return v;
    };
    auto groups = [&] {
      std::vector<std::string> out;
      std::stringstream ss{std::string(body)};
      std::string g;
      while (std::getline(ss, g, ';')) {
        if (!detail::trim(g).empty()) out.push_back(g);
      }
      return out;
    };
    if (head == "uniform" && body.empty()) {
      spec.kind = Kind::uniform;
    } else if (head == "mixture") {
      spec.kind = Kind::mixture;
      for (const auto& g : groups()) {
        const auto v = numbers(g, 4);
        if (!(v[2] >= 0.0) || !(v[3] > 0.0)) {
          throw std::invalid_argument("synthetic spec: mixture needs sd >= 0 and weight > 0");
        }
        spec.components.push_back({{v[0], v[1]}, v[2], v[3]});
      }
      if (spec.components.empty()) throw std::invalid_argument("synthetic spec: empty mixture");
    } else if (head == "rects") {
      spec.kind = Kind::rects;
      for (const auto& g : groups()) {
        const auto v = numbers(g, 4);
        const Rect r{v[0], v[1], v[2], v[3]};
        if (!(r.xmin <= r.xmax && r.ymin <= r.ymax) || !kUnitSquare.contains({r.xmin, r.ymin}) ||
            !kUnitSquare.contains({r.xmax, r.ymax})) {
          throw std::invalid_argument("synthetic spec: rectangles must lie in [0,1]^2");
        }
        spec.rects.push_back(r);
      }
    } else {
      throw std::invalid_argument(fmt::format("synthetic spec: unknown kind '{}'", text));
    }
    return spec;
  }

  std::string to_string() const {
    std::string out;
    switch (kind) {
      case Kind::uniform:
        return "uniform";
      case Kind::mixture:
        out = "mixture:";
        for (std::size_t i = 0; i < components.size(); ++i) {
          const auto& c = components[i];
          out += fmt::format("{}{},{},{},{}", i ? ";" : "", c.mean.x, c.mean.y, c.sd, c.weight);
        }
        return out;
      case Kind::rects:
        if (rects.empty()) return "rects";
        out = "rects:";
        for (std::size_t i = 0; i < rects.size(); ++i) {
          const auto& r = rects[i];
          out += fmt::format("{}{},{},{},{}", i ? ";" : "", r.xmin, r.xmax, r.ymin, r.ymax);
        }
        return out;
    }
    return out;
  }
};

/// Seed-deterministic synthetic samples (normalized coordinates). A `rects`
/// spec without rectangles must be given `worker_rects`.
inline SampleSet gen_synthetic(const SyntheticSpec& spec, int n_workers, int n_samples,
                               std::uint64_t seed, const Rect& norm = kUnitSquare,
                               const std::vector<Rect>& worker_rects = {}) {
  if (n_workers < 1 || n_samples < 1) {
    throw std::invalid_argument("gen_synthetic: need >= 1 worker and >= 1 sample");
  }
  const std::vector<Rect>& rects = spec.rects.empty() ? worker_rects : spec.rects;
  if (spec.kind == SyntheticSpec::Kind::rects && rects.empty()) {
    throw std::invalid_argument("gen_synthetic: rects spec without rectangles");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> cum;
  for (const auto& c : spec.components) cum.push_back((cum.empty() ? 0.0 : cum.back()) + c.weight);

  SampleSet set;
  set.norm = norm;
  set.provenance = "synthetic:" + spec.to_string();
  set.samples.reserve(static_cast<std::size_t>(n_samples));
  for (int s = 0; s < n_samples; ++s) {
    std::vector<Point2> pts;
    pts.reserve(static_cast<std::size_t>(n_workers));
    for (int i = 0; i < n_workers; ++i) {
      switch (spec.kind) {
        case SyntheticSpec::Kind::uniform:
          pts.push_back({unit(rng), unit(rng)});
          break;
        case SyntheticSpec::Kind::mixture: {
          const double u = unit(rng) * cum.back();
          const auto c = static_cast<std::size_t>(std::upper_bound(cum.begin(), cum.end(), u) - cum.begin());
          const auto& comp = spec.components[std::min(c, cum.size() - 1)];
          const double dx = gauss(rng);
          const double dy = gauss(rng);
          pts.push_back(kUnitSquare.clamp({comp.mean.x + comp.sd * dx, comp.mean.y + comp.sd * dy}));
          break;
        }
        case SyntheticSpec::Kind::rects: {
          const Rect& r = rects[static_cast<std::size_t>(i) % rects.size()];
          const double ux = unit(rng);
          const double uy = unit(rng);
          pts.push_back({r.xmin + ux * r.width(), r.ymin + uy * r.height()});
          break;
        }
      }
    }
    set.samples.push_back(std::move(pts));
  }
  return set;
}

/// Train/test partition. Chronological by default: the first `train_fraction`
/// of the samples train, the rest test. With `shuffle` the order is first
/// permuted by `seed`.
struct Split {
  std::vector<std::vector<Point2>> train;
  std::vector<std::vector<Point2>> test;
};

inline Split split_samples(const SampleSet& set, double train_fraction, bool shuffle,
                           std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw std::invalid_argument("split: train_fraction must be in (0,1)");
  }
  const std::size_t n = set.samples.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  if (shuffle) {
    std::mt19937_64 rng(seed);
    std::shuffle(idx.begin(), idx.end(), rng);
  }
  const auto n_train = static_cast<std::size_t>(std::floor(train_fraction * static_cast<double>(n)));
  if (n_train == 0 || n_train == n) {
    throw std::invalid_argument(fmt::format("split: {} samples cannot be split {}/{}", n,
                                            train_fraction, 1.0 - train_fraction));
  }
  Split s;
  for (std::size_t i = 0; i < n; ++i) {
    (i < n_train ? s.train : s.test).push_back(set.samples[idx[i]]);
  }
  return s;
}

inline nlohmann::json to_json(const SampleSet& set) {
  nlohmann::json samples = nlohmann::json::array();
  for (const auto& s : set.samples) {
    nlohmann::json row = nlohmann::json::array();
    for (Point2 p : s) row.push_back({p.x, p.y});
    samples.push_back(std::move(row));
  }
  return {{"provenance", set.provenance},
          {"norm", {set.norm.xmin, set.norm.xmax, set.norm.ymin, set.norm.ymax}},
          {"skipped_slots", set.skipped_slots},
          {"samples", std::move(samples)}};
}

inline SampleSet sample_set_from_json(const nlohmann::json& j) {
  SampleSet set;
  set.provenance = j.at("provenance").get<std::string>();
  const auto& n = j.at("norm");
  set.norm = Rect::checked(n.at(0).get<double>(), n.at(1).get<double>(), n.at(2).get<double>(),
                           n.at(3).get<double>());
  set.skipped_slots = j.value("skipped_slots", 0);
  for (const auto& row : j.at("samples")) {
    std::vector<Point2> s;
    for (const auto& p : row) s.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
    set.samples.push_back(std::move(s));
  }
  set.validate();
  return set;
}

}  // namespace wpsc::harness

#endif  // WPSC_HARNESS_SAMPLES_HPP
