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

#include "codesign/perf_oracle.hpp"

#include <algorithm>
#include <cmath>

#include "codesign/error.hpp"

namespace codesign {

namespace {

std::int64_t ceil_div(std::int64_t a, std::int64_t b) { return (a + b - 1) / b; }

void require_positive_hw(const HwConfig& hw) {
  if (hw.pf <= 0 || hw.pc <= 0 || hw.pv <= 0 || hw.bw <= 0) {
    throw InvalidInput("hardware parallelism and bandwidth must be positive");
  }
}

}  // namespace

std::int64_t dsp_usage(const HwConfig& hw) { return hw.pc * hw.pf * hw.pv / 2; }

ResourceReport mem_usage(std::span<const LayerShape> layers, const HwConfig& hw,
                         std::int64_t data_width) {
  ResourceReport report;
  bool any_conv = false;
  for (const LayerShape& layer : layers) {
    if (layer.kind != LayerKind::kConv) continue;
    any_conv = true;
    report.mem_in = std::max(report.mem_in, layer.c_in * layer.h_in * layer.w_in * data_width);
    report.mem_weight =
        std::max(report.mem_weight, layer.c_in * hw.pf * layer.k * layer.k * data_width);
  }
  if (!any_conv) throw InvalidInput("memory model needs at least one conv layer");
  report.dsp_used = dsp_usage(hw);
  report.mem_used = 2 * (report.mem_in + report.mem_weight);
  return report;
}

PerfReport latency(std::span<const LayerShape> layers, const HwConfig& hw,
                   const OracleParams& params, std::int64_t data_width) {
  require_positive_hw(hw);
  PerfReport report;
  report.per_layer_cycles.reserve(layers.size());
  report.per_layer_compute_cycles.reserve(layers.size());
  for (const LayerShape& layer : layers) {
    std::int64_t compute = 0;
    std::int64_t cycles = 0;
    if (layer.kind == LayerKind::kConv) {
      const std::int64_t k2 = layer.k * layer.k;
      compute = ceil_div(layer.c_out, hw.pf) * ceil_div(layer.c_in, hw.pc) *
                ceil_div(layer.h_out * layer.w_out, hw.pv) * k2;
      const std::int64_t bytes = (layer.c_in * layer.h_in * layer.w_in +
                                  layer.c_in * layer.c_out * k2 +
                                  layer.c_out * layer.h_out * layer.w_out) *
                                 data_width;
      const std::int64_t mem = ceil_div(bytes * 8, hw.bw);
      cycles = std::max(compute, mem);
    } else {
      cycles = ceil_div(layer.c_out * layer.h_out * layer.w_out, hw.pv);
    }
    report.per_layer_cycles.push_back(cycles);
    report.per_layer_compute_cycles.push_back(compute);
    report.total_cycles += cycles;
    report.total_compute_cycles += compute;
  }
  report.latency_ms = static_cast<double>(report.total_cycles) / (params.clock_mhz * 1000.0);
  const double utilization =
      report.total_cycles > 0 ? static_cast<double>(report.total_compute_cycles) /
                                    static_cast<double>(report.total_cycles)
                              : 0.0;
  report.power_w = params.p_static_w +
                   params.p_dsp_w * static_cast<double>(dsp_usage(hw)) * utilization;
  return report;
}

double latency_ms(std::span<const LayerShape> layers, const HwConfig& hw,
                  const OracleParams& params, std::int64_t data_width) {
  return latency(layers, hw, params, data_width).latency_ms;
}

double power_w(std::span<const LayerShape> layers, const HwConfig& hw,
               const OracleParams& params, std::int64_t data_width) {
  return latency(layers, hw, params, data_width).power_w;
}

double synthetic_ce(const ArchEncoding& arch, const BackboneSpec& backbone) {
  validate(arch, backbone);
  double capacity = 0.0;
  for (double r : arch.ratios) capacity += r;
  const std::vector<int> units = active_units(arch, backbone);
  double mean = 0.0;
  for (int u : units) mean += u;
  mean /= static_cast<double>(units.size());
  double var = 0.0;
  for (int u : units) var += (u - mean) * (u - mean);
  var /= static_cast<double>(units.size());
  return 1.0 + 2.5 * std::exp(-capacity / 5.0) + 0.1 * std::sqrt(var);
}

OracleEvaluation evaluate_oracle(const CodesignPoint& point, const BackboneSpec& backbone,
                                 const OracleParams& params) {
  const std::vector<LayerShape> layers = arch_to_layers(point.arch, backbone);
  const PerfReport perf = latency(layers, point.hw, params, backbone.data_width);
  OracleEvaluation result;
  result.objectives.ce = synthetic_ce(point.arch, backbone);
  result.objectives.latency_ms = perf.latency_ms;
  result.objectives.power_w = perf.power_w;
  result.resources = mem_usage(layers, point.hw, backbone.data_width);
  return result;
}

}  // namespace codesign
