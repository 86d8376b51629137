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

#ifndef WPSC_HARNESS_CONFIG_HPP
#define WPSC_HARNESS_CONFIG_HPP

// Experiment configuration: INI file sections plus `section.key=value`
// overrides. Unknown keys and unparsable values raise ConfigError.

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include "wpsc/deploy/mechanisms.hpp"
#include "wpsc/mdl/train.hpp"
#include "wpsc/model.hpp"
#include "wpsc/stackelberg.hpp"

namespace wpsc::harness {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class MechanismTag { MED, MSC, MDL, OPT };

inline std::string_view to_string(MechanismTag t) {
  switch (t) {
    case MechanismTag::MED: return "MED";
    case MechanismTag::MSC: return "MSC";
    case MechanismTag::MDL: return "MDL";
    case MechanismTag::OPT: return "OPT";
  }
  return "?";
}

inline MechanismTag mechanism_tag_from_string(std::string_view s) {
  for (auto t : {MechanismTag::MED, MechanismTag::MSC, MechanismTag::MDL, MechanismTag::OPT}) {
    if (s == to_string(t)) return t;
  }
  throw ConfigError(fmt::format("unknown mechanism '{}' (expected MED, MSC, MDL or OPT)", s));
}

struct WorkerSpec {
  int count = 40;
  double b_min = 1e-4;  ///< sensing cost drawn uniformly from [b_min, b_max]
  double b_max = 1.1e-4;
  double side_min = 0.05;  ///< synthetic working-area side, fraction of the task area
  double side_max = 0.25;
};

struct DataSpec {
  std::string source = "synthetic";  ///< synthetic | traces
  std::string traces;                ///< CSV path when source = traces
  std::string synthetic = "rects";
  int samples = 30000;
  double slot = 60.0;                ///< trace slot length, seconds
  double train_fraction = 0.8;
  bool random_split = false;
};

struct MechanismSpec {
  std::vector<MechanismTag> list{MechanismTag::MED, MechanismTag::MSC, MechanismTag::MDL,
                                 MechanismTag::OPT};
  EvenRule med_even_rule = EvenRule::paper_average;
  int msc_grid = 21;
  std::optional<Point2> msc_constant;  ///< physical units; searched when absent
};

struct MdlSpec {
  int J = 8;
  int K = 8;
  std::string checkpoint;  ///< load this model instead of training
  mdl::TrainSettings train;
};

struct AuditSpec {
  int instances = 50;
  int grid = 21;
};

struct ExperimentConfig {
  SystemConfig system = SystemConfig::reference();
  WorkerSpec workers;
  DataSpec data;
  MechanismSpec mechanisms;
  MdlSpec mdl;
  SolverSettings solver;
  AuditSpec audit;
  std::uint64_t seed = 0;
  std::string out = "out";

  void validate() const {
    try {
      system.validate();
      solver.validate();
      mdl.train.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
    if (workers.count < 1) throw ConfigError("workers.count must be >= 1");
    if (!(workers.b_min > 0.0 && workers.b_min <= workers.b_max)) {
      throw ConfigError("workers.b_min/b_max must satisfy 0 < b_min <= b_max");
    }
    if (!(workers.side_min >= 0.0 && workers.side_min <= workers.side_max && workers.side_max <= 1.0)) {
      throw ConfigError("workers.side_min/side_max must satisfy 0 <= side_min <= side_max <= 1");
    }
    if (data.source != "synthetic" && data.source != "traces") {
      throw ConfigError("data.source must be 'synthetic' or 'traces'");
    }
    if (data.source == "traces" && data.traces.empty()) {
      throw ConfigError("data.traces is required when data.source = traces");
    }
    if (data.samples < 2) throw ConfigError("data.samples must be >= 2");
    if (!(data.slot > 0.0)) throw ConfigError("data.slot must be > 0");
    if (!(data.train_fraction > 0.0 && data.train_fraction < 1.0)) {
      throw ConfigError("data.train_fraction must be in (0,1)");
    }
    if (mechanisms.msc_grid < 2) throw ConfigError("mechanisms.msc_grid must be >= 2");
    if (mdl.J < 1 || mdl.K < 1) throw ConfigError("mdl.J and mdl.K must be >= 1");
    if (audit.instances < 0) throw ConfigError("audit.instances must be >= 0");
    if (audit.grid < 2) throw ConfigError("audit.grid must be >= 2");
  }
};

namespace detail {

template <typename T>
T parse_value(const std::string& key, const std::string& raw) {
  T v{};
  const char* b = raw.data();
  const char* e = raw.data() + raw.size();
  const auto r = std::from_chars(b, e, v);
  if (raw.empty() || r.ec != std::errc() || r.ptr != e) {
    throw ConfigError(fmt::format("{}: cannot parse '{}'", key, raw));
  }
  return v;
}

inline bool parse_bool(const std::string& key, const std::string& raw) {
  if (raw == "true" || raw == "1" || raw == "yes") return true;
  if (raw == "false" || raw == "0" || raw == "no") return false;
  throw ConfigError(fmt::format("{}: expected true/false, got '{}'", key, raw));
}

inline std::string strip(std::string s) {
  const auto b = s.find_first_not_of(" \t");
  const auto e = s.find_last_not_of(" \t\r");
  return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
}

inline std::vector<double> parse_list(const std::string& key, const std::string& raw,
                                      std::size_t want) {
  std::vector<double> v;
  std::stringstream ss(raw);
  std::string tok;
  while (std::getline(ss, tok, ',')) v.push_back(parse_value<double>(key, strip(tok)));
  if (v.size() != want) throw ConfigError(fmt::format("{}: expected {} comma-separated numbers", key, want));
  return v;
}

}  // namespace detail

/// Flat view of the configuration: "section.key" -> raw string.
using ConfigMap = std::map<std::string, std::string>;

inline ConfigMap read_ini(const std::filesystem::path& path) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::read_ini(path.string(), tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(e.what());
  }
  ConfigMap out;
  for (const auto& [section, body] : tree) {
    if (body.empty()) {
      throw ConfigError(fmt::format("{}: key '{}' outside any section", path.string(), section));
    }
    for (const auto& [key, value] : body) out[section + "." + key] = detail::strip(value.data());
  }
  return out;
}

/// Parses `--section.key=value` (or `section.key=value`) overrides.
inline void apply_override(ConfigMap& map, std::string_view arg) {
  if (arg.substr(0, 2) == "--") arg.remove_prefix(2);
  const auto eq = arg.find('=');
  const auto dot = arg.find('.');
  if (eq == std::string_view::npos || dot == std::string_view::npos || dot > eq || dot == 0 ||
      dot + 1 == eq) {
    throw ConfigError(fmt::format("bad override '{}' (expected --section.key=value)", arg));
  }
  map[std::string(arg.substr(0, eq))] = detail::strip(std::string(arg.substr(eq + 1)));
}

inline ExperimentConfig build_config(const ConfigMap& map) {
  ExperimentConfig c;
  std::set<std::string> used;
  auto get = [&](const std::string& key) -> std::optional<std::string> {
    used.insert(key);
    auto it = map.find(key);
    if (it == map.end()) return std::nullopt;
    return it->second;
  };
  auto num = [&](const std::string& key, auto& field) {
    if (auto v = get(key)) field = detail::parse_value<std::decay_t<decltype(field)>>(key, *v);
  };
  auto str = [&](const std::string& key, std::string& field) {
    if (auto v = get(key)) field = *v;
  };

  num("system.g", c.system.g);
  num("system.B", c.system.B);
  num("system.alpha", c.system.alpha);
  num("system.eta", c.system.eta);
  num("system.Gamma", c.system.Gamma);
  for (auto [db_key, lin_key, field] : {std::tuple{"system.g_db", "system.g", &c.system.g},
                                        std::tuple{"system.Gamma_db", "system.Gamma", &c.system.Gamma}}) {
    if (auto v = get(db_key)) {
      if (map.count(lin_key)) throw ConfigError(fmt::format("{} and {} are both set", db_key, lin_key));
      *field = db_to_linear(detail::parse_value<double>(db_key, *v));
    }
  }
  num("system.h", c.system.h);
  num("system.a1", c.system.a1);
  num("system.a2", c.system.a2);
  if (auto v = get("system.area")) {
    const auto a = detail::parse_list("system.area", *v, 4);
    c.system.task_area = Rect{a[0], a[1], a[2], a[3]};
  }

  num("workers.count", c.workers.count);
  num("workers.b_min", c.workers.b_min);
  num("workers.b_max", c.workers.b_max);
  num("workers.side_min", c.workers.side_min);
  num("workers.side_max", c.workers.side_max);

  str("data.source", c.data.source);
  str("data.traces", c.data.traces);
  str("data.synthetic", c.data.synthetic);
  num("data.samples", c.data.samples);
  num("data.slot", c.data.slot);
  num("data.train_fraction", c.data.train_fraction);
  if (auto v = get("data.random_split")) c.data.random_split = detail::parse_bool("data.random_split", *v);

  if (auto v = get("mechanisms.list")) {
    c.mechanisms.list.clear();
    std::stringstream ss(*v);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      tok = detail::strip(tok);
      if (!tok.empty()) c.mechanisms.list.push_back(mechanism_tag_from_string(tok));
    }
  }
  if (auto v = get("mechanisms.med_even_rule")) {
    try {
      c.mechanisms.med_even_rule = even_rule_from_string(*v);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
  num("mechanisms.msc_grid", c.mechanisms.msc_grid);
  if (auto v = get("mechanisms.msc_constant"); v && *v != "auto") {
    const auto p = detail::parse_list("mechanisms.msc_constant", *v, 2);
    c.mechanisms.msc_constant = Point2{p[0], p[1]};
  }

  num("mdl.J", c.mdl.J);
  num("mdl.K", c.mdl.K);
  str("mdl.checkpoint", c.mdl.checkpoint);
  num("train.learning_rate", c.mdl.train.learning_rate);
  num("train.batch", c.mdl.train.batch);
  num("train.epochs", c.mdl.train.epochs);
  num("train.validation_fraction", c.mdl.train.validation_fraction);

  num("solver.rate_tol", c.solver.rate_tol);
  num("solver.max_iters", c.solver.max_iters);
  if (auto v = get("solver.p_max"); v && *v != "auto") c.solver.p_max = detail::parse_value<double>("solver.p_max", *v);
  if (auto v = get("solver.p_tol"); v && *v != "auto") c.solver.p_tol = detail::parse_value<double>("solver.p_tol", *v);

  num("audit.instances", c.audit.instances);
  num("audit.grid", c.audit.grid);

  num("run.seed", c.seed);
  str("run.out", c.out);

  for (const auto& [key, value] : map) {
    if (!used.count(key)) throw ConfigError(fmt::format("unknown config key '{}'", key));
  }
  c.validate();
  return c;
}

/// Writes every key of the configuration back out in INI form.
inline std::string to_ini(const ExperimentConfig& c) {
  std::string s;
  const auto& y = c.system;
  s += fmt::format("[system]\ng = {}\nB = {}\nalpha = {}\neta = {}\nGamma = {}\nh = {}\na1 = {}\na2 = {}\n",
                   y.g, y.B, y.alpha, y.eta, y.Gamma, y.h, y.a1, y.a2);
  s += fmt::format("area = {},{},{},{}\n\n", y.task_area.xmin, y.task_area.xmax, y.task_area.ymin,
                   y.task_area.ymax);
  s += fmt::format("[workers]\ncount = {}\nb_min = {}\nb_max = {}\nside_min = {}\nside_max = {}\n\n",
                   c.workers.count, c.workers.b_min, c.workers.b_max, c.workers.side_min,
                   c.workers.side_max);
  s += fmt::format(
      "[data]\nsource = {}\ntraces = {}\nsynthetic = {}\nsamples = {}\nslot = {}\n"
      "train_fraction = {}\nrandom_split = {}\n\n",
      c.data.source, c.data.traces, c.data.synthetic, c.data.samples, c.data.slot,
      c.data.train_fraction, c.data.random_split);
  std::string list;
  for (auto t : c.mechanisms.list) list += (list.empty() ? "" : ",") + std::string(to_string(t));
  s += fmt::format("[mechanisms]\nlist = {}\nmed_even_rule = {}\nmsc_grid = {}\nmsc_constant = {}\n\n",
                   list, to_string(c.mechanisms.med_even_rule), c.mechanisms.msc_grid,
                   c.mechanisms.msc_constant
                       ? fmt::format("{},{}", c.mechanisms.msc_constant->x, c.mechanisms.msc_constant->y)
                       : std::string("auto"));
  s += fmt::format("[mdl]\nJ = {}\nK = {}\ncheckpoint = {}\n\n", c.mdl.J, c.mdl.K, c.mdl.checkpoint);
  s += fmt::format("[train]\nlearning_rate = {}\nbatch = {}\nepochs = {}\nvalidation_fraction = {}\n\n",
                   c.mdl.train.learning_rate, c.mdl.train.batch, c.mdl.train.epochs,
                   c.mdl.train.validation_fraction);
  s += fmt::format("[solver]\nrate_tol = {}\nmax_iters = {}\np_max = {}\np_tol = {}\n\n",
                   c.solver.rate_tol, c.solver.max_iters,
                   c.solver.p_max ? fmt::format("{}", *c.solver.p_max) : std::string("auto"),
                   c.solver.p_tol ? fmt::format("{}", *c.solver.p_tol) : std::string("auto"));
  s += fmt::format("[audit]\ninstances = {}\ngrid = {}\n\n", c.audit.instances, c.audit.grid);
  s += fmt::format("[run]\nseed = {}\nout = {}\n", c.seed, c.out);
  return s;
}

}  // namespace wpsc::harness

#endif  // WPSC_HARNESS_CONFIG_HPP
