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

#ifndef WPSC_HARNESS_REPORT_HPP
#define WPSC_HARNESS_REPORT_HPP

// Report serialization. Numbers in metrics are rounded to 12 significant
// digits so reports are stable across platforms with equal inputs.

#include <cstdio>
#include <cstdlib>
#include <optional>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "wpsc/deploy/audit.hpp"
#include "wpsc/deploy/metrics.hpp"
#include "wpsc/mdl/train.hpp"

namespace wpsc::harness {

inline std::string fmt12(double v) { return fmt::format("{:.12g}", v); }

/// v rounded to 12 significant digits (JSON numbers print in shortest form).
inline double round12(double v) { return std::strtod(fmt12(v).c_str(), nullptr); }

/// Non-finite values become JSON null.
inline nlohmann::json num12(double v) {
  if (!std::isfinite(v)) return nullptr;
  return round12(v);
}

struct MechanismAudit {
  long instances = 0;
  AuditReport report;
};

struct MechanismMetrics {
  std::string name;
  PerformanceRatios ratios;
  std::optional<MechanismAudit> audit;
};

inline std::string metrics_csv(const std::vector<MechanismMetrics>& rows) {
  std::string out = "name,omega_avg,omega_wst,mean_cost,audit\n";
  for (const auto& r : rows) {
    out += fmt::format("{},{},{},{},{}\n", r.name, fmt12(r.ratios.avg), fmt12(r.ratios.wst),
                       fmt12(r.ratios.mean_cost),
                       !r.audit ? "skipped" : (r.audit->report.passed ? "pass" : "fail"));
  }
  return out;
}

inline nlohmann::json mechanisms_json(const std::vector<MechanismMetrics>& rows) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : rows) {
    nlohmann::json j = {{"name", r.name},
                        {"omega_avg", num12(r.ratios.avg)},
                        {"omega_wst", num12(r.ratios.wst)},
                        {"mean_cost", num12(r.ratios.mean_cost)},
                        {"mean_opt_cost", num12(r.ratios.mean_opt_cost)}};
    j["audit"] = !r.audit ? nlohmann::json("skipped")
                          : nlohmann::json(r.audit->report.passed ? "pass" : "fail");
    arr.push_back(std::move(j));
  }
  return arr;
}

inline nlohmann::json audit_json(const std::vector<MechanismMetrics>& rows, double tolerance_rel,
                                 double tolerance_abs, int grid) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : rows) {
    if (!r.audit) continue;
    const AuditReport& a = r.audit->report;
    nlohmann::json j = {{"mechanism", r.name},
                        {"instances", r.audit->instances},
                        {"tested_deviations", a.tested_deviations},
                        {"max_utility_gain", num12(a.max_utility_gain)},
                        {"passed", a.passed}};
    if (a.violating_case) {
      const Deviation& d = *a.violating_case;
      j["violating_case"] = {{"worker_id", d.worker_id},
                             {"true_location", {num12(d.true_location.x), num12(d.true_location.y)}},
                             {"reported_location",
                              {num12(d.reported_location.x), num12(d.reported_location.y)}},
                             {"gain", num12(d.gain)}};
    } else {
      j["violating_case"] = nullptr;
    }
    arr.push_back(std::move(j));
  }
  return {{"tolerance", {{"relative", tolerance_rel}, {"absolute", tolerance_abs}}},
          {"deviation_grid", grid},
          {"mechanisms", std::move(arr)}};
}

inline std::string loss_curve_csv(const std::vector<mdl::LossPoint>& curve) {
  std::string out = "epoch,train_loss,val_loss,best_val\n";
  for (const auto& p : curve) {
    out += fmt::format("{},{},{},{}\n", p.epoch, fmt12(p.train_loss), fmt12(p.val_loss),
                       fmt12(p.best_val));
  }
  return out;
}

}  // namespace wpsc::harness

#endif  // WPSC_HARNESS_REPORT_HPP
