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

#include "codesign/pareto.hpp"

#include <algorithm>
#include <iterator>
#include <numeric>
#include <tuple>

#include <fmt/format.h>

#include "codesign/error.hpp"

namespace codesign {

namespace {

auto as_tuple(const Objectives& o) { return std::tie(o.ce, o.latency_ms, o.power_w); }

}  // namespace

bool dominates(const Objectives& a, const Objectives& b) {
  const bool no_worse = a.ce <= b.ce && a.latency_ms <= b.latency_ms && a.power_w <= b.power_w;
  const bool better = a.ce < b.ce || a.latency_ms < b.latency_ms || a.power_w < b.power_w;
  return no_worse && better;
}

std::vector<ParetoPoint> exhaustive_eval(const BackboneSpec& backbone, const HwDomain& domain,
                                         const OracleParams& params, std::uint64_t cap) {
  validate(backbone);
  const std::vector<HwConfig> configs = enumerate_hw_configs(domain);
  const std::uint64_t size = count_space(backbone, domain, CountMode::kDepthAware);
  if (size > cap) {
    throw SpaceTooLarge(
        fmt::format("design space has {} points, above the cap of {}", size, cap), size);
  }
  std::vector<ParetoPoint> points;
  points.reserve(static_cast<std::size_t>(size));
  for (const ArchEncoding& arch : enumerate_archs(backbone)) {
    const auto layers = arch_to_layers(arch, backbone);
    const double ce = synthetic_ce(arch, backbone);
    for (const HwConfig& hw : configs) {
      ParetoPoint p;
      p.point = {arch, hw};
      const PerfReport perf = latency(layers, hw, params, backbone.data_width);
      p.objectives = {ce, perf.latency_ms, perf.power_w};
      p.resources = mem_usage(layers, hw, backbone.data_width);
      points.push_back(std::move(p));
    }
  }
  return points;
}

void mark_frontier(std::vector<ParetoPoint>& points) {
  std::vector<std::size_t> order(points.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return as_tuple(points[a].objectives) < as_tuple(points[b].objectives);
  });
  // After the lexicographic sort a point can only be dominated by an
  // earlier one, and dominance is transitive, so checking against the
  // frontier collected so far is sufficient.
  std::vector<std::size_t> front;
  for (std::size_t idx : order) {
    const bool dominated = std::any_of(front.begin(), front.end(), [&](std::size_t f) {
      return dominates(points[f].objectives, points[idx].objectives);
    });
    points[idx].on_frontier = !dominated;
    if (!dominated) front.push_back(idx);
  }
}

std::vector<ParetoPoint> pareto_front(std::span<const ParetoPoint> points) {
  std::vector<ParetoPoint> all(points.begin(), points.end());
  mark_frontier(all);
  std::vector<ParetoPoint> front;
  std::copy_if(all.begin(), all.end(), std::back_inserter(front),
               [](const ParetoPoint& p) { return p.on_frontier; });
  std::stable_sort(front.begin(), front.end(), [](const ParetoPoint& a, const ParetoPoint& b) {
    return as_tuple(a.objectives) < as_tuple(b.objectives);
  });
  return front;
}

bool verify_on_front(const Objectives& candidate, std::span<const ParetoPoint> frontier,
                     double epsilon) {
  return std::none_of(frontier.begin(), frontier.end(), [&](const ParetoPoint& f) {
    return f.objectives.ce + epsilon < candidate.ce &&
           f.objectives.latency_ms + epsilon < candidate.latency_ms &&
           f.objectives.power_w + epsilon < candidate.power_w;
  });
}

}  // namespace codesign
