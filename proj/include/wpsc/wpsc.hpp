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

#ifndef WPSC_WPSC_HPP
#define WPSC_WPSC_HPP

// Core library: market model, equilibrium solver, deployment mechanisms and
// the learned MDL mechanism. The harness headers (config, traces, pipeline)
// pull in Boost and nlohmann/json and are included separately.

#include "wpsc/geometry.hpp"
#include "wpsc/model.hpp"
#include "wpsc/stackelberg.hpp"
#include "wpsc/deploy/mechanisms.hpp"
#include "wpsc/deploy/optimum.hpp"
#include "wpsc/deploy/metrics.hpp"
#include "wpsc/deploy/uniform.hpp"
#include "wpsc/deploy/audit.hpp"
#include "wpsc/mdl/network.hpp"
#include "wpsc/mdl/train.hpp"
#include "wpsc/mdl/checkpoint.hpp"

#endif  // WPSC_WPSC_HPP
