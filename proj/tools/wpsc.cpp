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

// Command-line front end for the wireless-powered crowdsourcing laboratory.
//
//   wpsc <command> [--config FILE] [--seed N] [--out DIR] [--section.key=value ...]
//
// Exit status: 0 success, 2 configuration error, 3 stage failure.

#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "wpsc/harness/config.hpp"
#include "wpsc/harness/pipeline.hpp"
#include "wpsc/mdl/checkpoint.hpp"

namespace {

using namespace wpsc;
using namespace wpsc::harness;

constexpr int kExitConfig = 2;
constexpr int kExitStage = 3;

void add_model_outputs(Pipeline& p, OutputSet& out) {
  out.add("mdl_model.txt", mdl::serialize_model(p.model()));
  if (!p.loss_curve().empty()) out.add("loss_curve.csv", loss_curve_csv(p.loss_curve()));
}

bool has_mdl(const ExperimentConfig& c) {
  for (auto t : c.mechanisms.list) {
    if (t == MechanismTag::MDL) return true;
  }
  return false;
}

nlohmann::json audit_doc(Pipeline& p) {
  return audit_json(p.audit(), 1e-9, 1e-12, p.config().audit.grid);
}

void run(const std::string& command, Pipeline& p, OutputSet& out) {
  if (command == "gen-data") {
    out.add_json("samples.json", to_json(p.samples()));
    fmt::print("{} samples of {} workers ({})\n", p.samples().samples.size(), p.samples().arity(),
               p.samples().provenance);
  } else if (command == "ingest") {
    out.add_json("workers.json", workers_json(p));
    fmt::print("{} workers\n", p.workers().size());
  } else if (command == "allocate") {
    out.add_json("allocation.json", allocation_json(p));
    const auto& eq = p.allocation();
    fmt::print("P_c = {:.6g} W, platform utility = {:.6g}, employed {}/{}\n", eq.outcome.p_c,
               eq.platform_utility, eq.outcome.employed.size(), p.workers().size());
  } else if (command == "label") {
    out.add_json("labels.json", labels_json(p));
    fmt::print("labeled {} train / {} test samples\n", p.train_labels().size(), p.test_labels().size());
  } else if (command == "train-mdl") {
    add_model_outputs(p, out);
    fmt::print("trained MDL (N={}), best epoch {}\n", p.model().N(), p.best_epoch());
  } else if (command == "evaluate") {
    out.add_json("metrics.json", metrics_json(p));
    out.add("metrics.csv", metrics_csv(p.evaluate()));
    for (const auto& r : p.evaluate()) {
      fmt::print("{:<4} omega_avg {:.6f} omega_wst {:.6f}\n", r.name, r.ratios.avg, r.ratios.wst);
    }
  } else if (command == "audit") {
    out.add_json("audit.json", audit_doc(p));
    for (const auto& r : p.audit()) {
      fmt::print("{:<4} {} (max gain {:.3g})\n", r.name, r.audit->report.passed ? "pass" : "FAIL",
                 r.audit->report.max_utility_gain);
    }
  } else if (command == "pipeline") {
    p.audit();
    out.add("config.ini", to_ini(p.config()));
    out.add_json("workers.json", workers_json(p));
    out.add_json("allocation.json", allocation_json(p));
    if (has_mdl(p.config())) add_model_outputs(p, out);
    out.add_json("metrics.json", metrics_json(p));
    out.add("metrics.csv", metrics_csv(p.audit()));
    out.add_json("audit.json", audit_doc(p));
    for (const auto& r : p.audit()) {
      fmt::print("{:<4} omega_avg {:.6f} omega_wst {:.6f} audit {}\n", r.name, r.ratios.avg,
                 r.ratios.wst, r.audit->report.passed ? "pass" : "FAIL");
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Wireless-powered spatial crowdsourcing: allocation, deployment and MDL training"};
  app.require_subcommand(1);
  app.allow_extras();
  app.fallthrough();
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  app.add_option("--config", config_path, "INI configuration file")->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "root random seed (run.seed)");
  app.add_option("--out", out_dir, "output directory (run.out)");

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"gen-data", "write the location samples (samples.json)"},
      {"ingest", "derive workers from traces or the synthetic spec (workers.json)"},
      {"allocate", "solve the Stackelberg game (allocation.json)"},
      {"label", "label samples with the optimal deployment (labels.json)"},
      {"train-mdl", "train the MDL mechanism (mdl_model.txt, loss_curve.csv)"},
      {"evaluate", "performance ratios on the test split (metrics.json, metrics.csv)"},
      {"audit", "strategyproofness audit (audit.json)"},
      {"pipeline", "all stages and all reports"},
  };
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->allow_extras();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  const CLI::App* sub = app.get_subcommands().front();
  std::vector<std::string> extras = app.remaining();
  for (const auto& e : sub->remaining()) extras.push_back(e);

  ExperimentConfig cfg;
  try {
    ConfigMap map;
    if (!config_path.empty()) map = read_ini(config_path);
    for (const auto& arg : extras) apply_override(map, arg);
    if (seed) map["run.seed"] = std::to_string(*seed);
    if (out_dir) map["run.out"] = *out_dir;
    cfg = build_config(map);
  } catch (const ConfigError& e) {
    fmt::print(stderr, "config error: {}\n", e.what());
    return kExitConfig;
  }

  try {
    Pipeline p(cfg);
    OutputSet out(cfg.out);
    run(sub->get_name(), p, out);
    for (const auto& path : out.commit()) fmt::print("wrote {}\n", path.string());
  } catch (const StageError& e) {
    fmt::print(stderr, "stage failure {}\n", e.what());
    return kExitStage;
  } catch (const ConfigError& e) {
    fmt::print(stderr, "config error: {}\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    fmt::print(stderr, "stage failure: {}\n", e.what());
    return kExitStage;
  }
  return 0;
}
