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

#ifndef WPSC_HARNESS_RANDOM_HPP
#define WPSC_HARNESS_RANDOM_HPP

#include <cstdint>

namespace wpsc::harness {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Stages that draw random numbers. Values are part of the seed derivation
/// and must not be renumbered.
enum class Stage : std::uint64_t {
  workers = 1,
  samples = 2,
  split = 3,
  mdl_init = 4,
  mdl_train = 5,
  audit = 6,
};

/// Seed for one stage, derived from the root seed and the stage counter so
/// any stage can be rerun alone.
inline std::uint64_t stage_seed(std::uint64_t root, Stage stage) {
  return splitmix64(splitmix64(root) ^ static_cast<std::uint64_t>(stage));
}

}  // namespace wpsc::harness

#endif  // WPSC_HARNESS_RANDOM_HPP
