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

#ifndef WPSC_HARNESS_TRACES_HPP
#define WPSC_HARNESS_TRACES_HPP

// GPS trace ingestion. CSV layout: header `worker_id,timestamp,x,y`, one
// record per row.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <istream>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "wpsc/model.hpp"

namespace wpsc::harness {

struct TraceRecord {
  int worker_id = 0;
  double timestamp = 0.0;  ///< seconds
  double x = 0.0;          ///< meters
  double y = 0.0;
};

class TraceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

template <typename T>
bool parse_field(std::string_view s, T& out) {
  s = trim(s);
  const auto r = std::from_chars(s.data(), s.data() + s.size(), out);
  return r.ec == std::errc() && r.ptr == s.data() + s.size();
}

inline bool parse_record(std::string_view line, TraceRecord& rec) {
  std::string_view f[4];
  for (int i = 0; i < 4; ++i) {
    const auto comma = line.find(',');
    if ((comma == std::string_view::npos) != (i == 3)) return false;
    f[i] = line.substr(0, comma);
    line = comma == std::string_view::npos ? std::string_view{} : line.substr(comma + 1);
  }
  return parse_field(f[0], rec.worker_id) && parse_field(f[1], rec.timestamp) &&
         parse_field(f[2], rec.x) && parse_field(f[3], rec.y) && std::isfinite(rec.timestamp) &&
         std::isfinite(rec.x) && std::isfinite(rec.y);
}

}  // namespace detail

/// Reads all records. Blank lines are ignored; any malformed row aborts the
/// read with the offending line numbers (first ten) in the message.
inline std::vector<TraceRecord> read_traces(std::istream& in, const std::string& source = "traces") {
  std::string line;
  int line_no = 0;
  bool have_header = false;
  std::vector<TraceRecord> out;
  std::vector<int> bad;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view s = detail::trim(line);
    if (s.empty()) continue;
    if (!have_header) {
      if (s != "worker_id,timestamp,x,y") {
        throw TraceError(source + ":" + std::to_string(line_no) +
                         ": expected header 'worker_id,timestamp,x,y'");
      }
      have_header = true;
      continue;
    }
    TraceRecord rec;
    if (detail::parse_record(s, rec)) {
      out.push_back(rec);
    } else {
      bad.push_back(line_no);
    }
  }
  if (!bad.empty()) {
    std::string msg = source + ": " + std::to_string(bad.size()) + " malformed row(s) at line";
    for (std::size_t i = 0; i < bad.size() && i < 10; ++i) msg += " " + std::to_string(bad[i]);
    throw TraceError(msg);
  }
  if (out.empty()) throw TraceError(source + ": no trace records");
  return out;
}

/// In-area records of one worker, sorted by timestamp.
struct WorkerTrace {
  int id = 0;
  std::vector<TraceRecord> records;
};

struct IngestResult {
  std::vector<WorkerTrace> traces;  ///< retained workers, ascending id
  std::vector<Worker> workers;      ///< aligned with traces
  int distinct_ids = 0;
  int dropped_workers = 0;          ///< no record inside the task area
  long dropped_records = 0;         ///< records outside the task area
};

/// Groups records per worker and derives a Worker for each: the working area
/// is the bounding box of the worker's in-area records, the location their
/// mean. `b_of(id)` supplies the per-bit sensing cost.
inline IngestResult ingest_traces(const std::vector<TraceRecord>& records, const SystemConfig& cfg,
                                  const std::function<double(int)>& b_of) {
  std::map<int, std::vector<TraceRecord>> by_id;
  IngestResult res;
  for (const auto& r : records) {
    auto& v = by_id[r.worker_id];
    if (cfg.task_area.contains({r.x, r.y})) {
      v.push_back(r);
    } else {
      ++res.dropped_records;
    }
  }
  res.distinct_ids = static_cast<int>(by_id.size());
  for (auto& [id, recs] : by_id) {
    if (recs.empty()) {
      ++res.dropped_workers;
      continue;
    }
    std::stable_sort(recs.begin(), recs.end(),
                     [](const TraceRecord& a, const TraceRecord& b) { return a.timestamp < b.timestamp; });
    Rect box{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(),
             std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
    Point2 mean;
    for (const auto& r : recs) {
      box.xmin = std::min(box.xmin, r.x);
      box.xmax = std::max(box.xmax, r.x);
      box.ymin = std::min(box.ymin, r.y);
      box.ymax = std::max(box.ymax, r.y);
      mean = mean + Point2{r.x, r.y};
    }
    mean = (1.0 / static_cast<double>(recs.size())) * mean;
    box = Rect{std::max(box.xmin, cfg.task_area.xmin), std::min(box.xmax, cfg.task_area.xmax),
               std::max(box.ymin, cfg.task_area.ymin), std::min(box.ymax, cfg.task_area.ymax)};
    res.workers.push_back(Worker::make(id, b_of(id), box.clamp(mean), box, cfg));
    res.traces.push_back({id, std::move(recs)});
  }
  return res;
}

/// Indices of the `count` traces with the most records (ties by smaller id),
/// returned in ascending id order.
inline std::vector<std::size_t> busiest_traces(const std::vector<WorkerTrace>& traces,
                                               std::size_t count) {
  std::vector<std::size_t> idx(traces.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    if (traces[a].records.size() != traces[b].records.size()) {
      return traces[a].records.size() > traces[b].records.size();
    }
    return traces[a].id < traces[b].id;
  });
  idx.resize(std::min(count, idx.size()));
  std::sort(idx.begin(), idx.end());
  return idx;
}

}  // namespace wpsc::harness

#endif  // WPSC_HARNESS_TRACES_HPP
