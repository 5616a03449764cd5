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

namespace codesign {

// Constants of the analytic accelerator model.
struct OracleParams {
  double clock_mhz = 200.0;
  double p_static_w = 20.0;
  double p_dsp_w = 0.015;
};

struct ResourceReport {
  std::int64_t dsp_used = 0;
  std::int64_t mem_in = 0;
  std::int64_t mem_weight = 0;
  std::int64_t mem_used = 0;
};

struct PerfReport {
  double latency_ms = 0.0;
  double power_w = 0.0;
  std::vector<std::int64_t> per_layer_cycles;
  std::vector<std::int64_t> per_layer_compute_cycles;
  std::int64_t total_cycles = 0;
  std::int64_t total_compute_cycles = 0;
};

// (PC * PF * PV) / 2.
std::int64_t dsp_usage(const HwConfig& hw);

// Input-buffer and PF-filter weight-buffer footprint, doubled for ping-pong
// buffering. Only conv layers size the buffers.
ResourceReport mem_usage(std::span<const LayerShape> layers, const HwConfig& hw,
                         std::int64_t data_width);

// Cycle model of the single sequential conv engine. A conv layer costs
// max(compute, memory) cycles; other layers cost one pass over PV lanes.
PerfReport latency(std::span<const LayerShape> layers, const HwConfig& hw,
                   const OracleParams& params, std::int64_t data_width);

double latency_ms(std::span<const LayerShape> layers, const HwConfig& hw,
                  const OracleParams& params, std::int64_t data_width);

// Static floor plus DSP power scaled by conv-engine utilization.
double power_w(std::span<const LayerShape> layers, const HwConfig& hw,
               const OracleParams& params, std::int64_t data_width);

// Closed-form stand-in for a trained supernet's cross-entropy:
// 1 + 2.5 exp(-sum(ratios) / 5) + 0.1 * stddev(active units per block).
double synthetic_ce(const ArchEncoding& arch, const BackboneSpec& backbone);

struct Objectives {
  double ce = 0.0;
  double latency_ms = 0.0;
  double power_w = 0.0;

  bool operator==(const Objectives&) const = default;
};

struct OracleEvaluation {
  Objectives objectives;
  ResourceReport resources;
};

// All oracle outputs for one co-design point.
OracleEvaluation evaluate_oracle(const CodesignPoint& point, const BackboneSpec& backbone,
                                 const OracleParams& params);

}  // namespace codesign
