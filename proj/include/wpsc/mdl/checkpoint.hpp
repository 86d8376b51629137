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

#ifndef WPSC_MDL_CHECKPOINT_HPP
#define WPSC_MDL_CHECKPOINT_HPP

// Text checkpoint for MdlModel:
//
//   MDLMODEL v1 J=<j> K=<k> N=<n>
//   w1.x <count>
//   <values, one per line>
//   ... b1.x, w2.x, b2.x, then the same blocks for y ...
//   norm <xmin> <xmax> <ymin> <ymax>
//   seed <int>
//
// Values are written with 17 significant digits, so a save/load round trip
// reproduces every double exactly.

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <fmt/format.h>

#include "wpsc/mdl/network.hpp"

namespace wpsc::mdl {

inline constexpr std::string_view kCheckpointMagic = "MDLMODEL";
inline constexpr std::string_view kCheckpointVersion = "v1";

class CheckpointError : public std::runtime_error {
 public:
  enum class Kind { io, version, malformed, shape };
  CheckpointError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

inline constexpr const char* kBlockNames[4] = {"w1", "b1", "w2", "b2"};

inline std::string serialize_model(const MdlModel& m) {
  m.check_shape();
  std::string out = fmt::format("{} {} J={} K={} N={}\n", kCheckpointMagic, kCheckpointVersion,
                                m.J(), m.K(), m.N());
  for (int a = 0; a < 2; ++a) {
    const auto blocks = m.axis(a).blocks();
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      out += fmt::format("{}.{} {}\n", kBlockNames[b], a == 0 ? 'x' : 'y', blocks[b]->size());
      for (double v : *blocks[b]) out += fmt::format("{:.17g}\n", v);
    }
  }
  out += fmt::format("norm {:.17g} {:.17g} {:.17g} {:.17g}\n", m.norm.xmin, m.norm.xmax,
                     m.norm.ymin, m.norm.ymax);
  out += fmt::format("seed {}\n", m.seed);
  return out;
}

namespace detail {

class LineReader {
 public:
  explicit LineReader(std::string_view text) : text_(text) {}

  bool next(std::string_view& line) {
    if (pos_ >= text_.size()) return false;
    const auto end = text_.find('\n', pos_);
    const auto stop = end == std::string_view::npos ? text_.size() : end;
    line = text_.substr(pos_, stop - pos_);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    pos_ = stop + 1;
    ++line_no_;
    return true;
  }

  int line_no() const { return line_no_; }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
  int line_no_ = 0;
};

inline std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    const std::size_t j = i;
    while (i < s.size() && s[i] != ' ' && s[i] != '\t') ++i;
    if (i > j) out.push_back(s.substr(j, i - j));
  }
  return out;
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
  const auto* end = s.data() + s.size();
  const auto r = std::from_chars(s.data(), end, out);
  return r.ec == std::errc() && r.ptr == end;
}

inline int parse_dim(std::string_view tok, std::string_view key, int line) {
  int v = 0;
  if (tok.substr(0, key.size()) != key || !parse_number(tok.substr(key.size()), v) || v < 1) {
    throw CheckpointError(CheckpointError::Kind::malformed,
                          fmt::format("checkpoint line {}: bad dimension '{}'", line, tok));
  }
  return v;
}

}  // namespace detail

inline MdlModel parse_model(std::string_view text) {
  using Kind = CheckpointError::Kind;
  detail::LineReader rd(text);
  std::string_view line;
  if (!rd.next(line)) throw CheckpointError(Kind::malformed, "checkpoint: empty file");
  const auto head = detail::split_ws(line);
  if (head.empty() || head[0] != kCheckpointMagic) {
    throw CheckpointError(Kind::malformed, "checkpoint: missing MDLMODEL header");
  }
  if (head.size() < 2 || head[1] != kCheckpointVersion) {
    throw CheckpointError(Kind::version,
                          fmt::format("checkpoint: unsupported version '{}' (expected {})",
                                      head.size() < 2 ? "" : head[1], kCheckpointVersion));
  }
  if (head.size() != 5) throw CheckpointError(Kind::malformed, "checkpoint: bad header line");
  const int J = detail::parse_dim(head[2], "J=", 1);
  const int K = detail::parse_dim(head[3], "K=", 1);
  const int N = detail::parse_dim(head[4], "N=", 1);

  MdlModel m;
  m.x = AxisNetwork::zeros(J, K, N);
  m.y = AxisNetwork::zeros(J, K, N);
  for (int a = 0; a < 2; ++a) {
    auto blocks = m.axis(a).blocks();
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      const std::string name = fmt::format("{}.{}", kBlockNames[b], a == 0 ? 'x' : 'y');
      if (!rd.next(line)) {
        throw CheckpointError(Kind::shape, fmt::format("checkpoint: missing block {}", name));
      }
      const auto tok = detail::split_ws(line);
      std::size_t count = 0;
      if (tok.size() != 2 || tok[0] != name || !detail::parse_number(tok[1], count)) {
        double extra = 0.0;
        const bool is_value = tok.size() == 1 && detail::parse_number(tok[0], extra);
        throw CheckpointError(is_value ? Kind::shape : Kind::malformed,
                              fmt::format("checkpoint line {}: expected block header '{} <count>'",
                                          rd.line_no(), name));
      }
      if (count != blocks[b]->size()) {
        throw CheckpointError(Kind::shape,
                              fmt::format("checkpoint line {}: block {} has {} values, expected {}",
                                          rd.line_no(), name, count, blocks[b]->size()));
      }
      for (double& v : *blocks[b]) {
        if (!rd.next(line)) {
          throw CheckpointError(Kind::shape, fmt::format("checkpoint: block {} truncated", name));
        }
        if (!detail::parse_number(line, v)) {
          const bool next_section =
              !line.empty() && std::isalpha(static_cast<unsigned char>(line[0]));
          throw CheckpointError(next_section ? Kind::shape : Kind::malformed,
                                fmt::format("checkpoint line {}: bad value '{}' in block {}",
                                            rd.line_no(), line, name));
        }
      }
    }
  }

  if (!rd.next(line)) throw CheckpointError(Kind::malformed, "checkpoint: missing norm line");
  auto tok = detail::split_ws(line);
  double nb[4];
  if (tok.size() != 5 || tok[0] != "norm" || !detail::parse_number(tok[1], nb[0]) ||
      !detail::parse_number(tok[2], nb[1]) || !detail::parse_number(tok[3], nb[2]) ||
      !detail::parse_number(tok[4], nb[3])) {
    throw CheckpointError(Kind::malformed,
                          fmt::format("checkpoint line {}: bad norm line", rd.line_no()));
  }
  m.norm = Rect{nb[0], nb[1], nb[2], nb[3]};
  if (m.norm.degenerate()) throw CheckpointError(Kind::malformed, "checkpoint: degenerate norm");

  if (!rd.next(line)) throw CheckpointError(Kind::malformed, "checkpoint: missing seed line");
  tok = detail::split_ws(line);
  if (tok.size() != 2 || tok[0] != "seed" || !detail::parse_number(tok[1], m.seed)) {
    throw CheckpointError(Kind::malformed,
                          fmt::format("checkpoint line {}: bad seed line", rd.line_no()));
  }
  while (rd.next(line)) {
    if (!detail::split_ws(line).empty()) {
      throw CheckpointError(Kind::malformed,
                            fmt::format("checkpoint line {}: trailing content", rd.line_no()));
    }
  }
  if (!m.x.finite() || !m.y.finite()) {
    throw CheckpointError(Kind::malformed, "checkpoint: non-finite parameter");
  }
  return m;
}

inline void save_model(const MdlModel& m, const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw CheckpointError(CheckpointError::Kind::io, "cannot write " + path.string());
  f << serialize_model(m);
  if (!f.flush()) throw CheckpointError(CheckpointError::Kind::io, "write failed: " + path.string());
}

inline MdlModel load_model(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw CheckpointError(CheckpointError::Kind::io, "cannot read " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_model(ss.str());
}

}  // namespace wpsc::mdl

#endif  // WPSC_MDL_CHECKPOINT_HPP
