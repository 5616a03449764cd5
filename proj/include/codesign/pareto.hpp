// Copyright 2026 The Codesign Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "codesign/design_space.hpp"
#include "codesign/perf_oracle.hpp"

namespace codesign {

struct ParetoPoint {
  CodesignPoint point;
  Objectives objectives;
  ResourceReport resources;
  bool on_frontier = false;
};

// Minimization dominance over (ce, latency_ms, power_w): no worse in every
// objective and strictly better in at least one.
bool dominates(const Objectives& a, const Objectives& b);

inline constexpr std::uint64_t kDefaultSpaceCap = 1'000'000;

// Oracle evaluation of every depth-aware point, architectures outermost and
// hardware configurations innermost. Throws SpaceTooLarge above `cap`.
std::vector<ParetoPoint> exhaustive_eval(const BackboneSpec& backbone, const HwDomain& domain,
                                         const OracleParams& params,
                                         std::uint64_t cap = kDefaultSpaceCap);

// Non-dominated subset, sorted lexicographically by objectives, flagged.
std::vector<ParetoPoint> pareto_front(std::span<const ParetoPoint> points);

// Sets on_frontier on every member of `points` in place.
void mark_frontier(std::vector<ParetoPoint>& points);

// False iff some frontier member beats `candidate` by more than `epsilon`
// in every objective at once.
bool verify_on_front(const Objectives& candidate, std::span<const ParetoPoint> frontier,
                     double epsilon = 1e-6);

}  // namespace codesign
