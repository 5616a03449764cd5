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

#include <array>
#include <span>
#include <cstdint>
#include <string_view>
#include <vector>

#include "codesign/rng.hpp"

namespace codesign {

enum class LayerKind { kConv, kShortcutAdd, kPool, kFc };

std::string_view to_string(LayerKind kind);

struct LayerShape {
  LayerKind kind = LayerKind::kConv;
  std::int64_t c_in = 0;
  std::int64_t c_out = 0;
  std::int64_t h_in = 0;
  std::int64_t w_in = 0;
  std::int64_t h_out = 0;
  std::int64_t w_out = 0;
  std::int64_t k = 1;
  std::int64_t stride = 1;

  bool operator==(const LayerShape&) const = default;
};

struct BlockSpec {
  int max_units = 4;
  int min_units = 2;
  std::int64_t out_channels = 256;
  std::int64_t feature_h = 56;
  std::int64_t feature_w = 56;
  std::int64_t first_unit_stride = 1;
};

// Supernet backbone: a fixed stem followed by residual blocks whose cells
// are the searchable slots.
struct BackboneSpec {
  std::vector<BlockSpec> blocks;
  std::vector<LayerShape> stem_layers;
  std::int64_t input_resolution = 224;
  std::int64_t data_width = 1;  // bytes per element
  std::int64_t num_classes = 1000;

  int total_cells() const;
  // Index of the first cell owned by `block`.
  int block_offset(std::size_t block) const;
};

// ResNet-50-style default: 4 blocks of 4 cells, 7x7/2 conv stem + 3x3/2 pool.
BackboneSpec default_backbone();

// Stem used by default_backbone(), parameterized for smaller inputs.
std::vector<LayerShape> resnet_stem(std::int64_t input_resolution,
                                    std::int64_t stem_channels);

// Throws ValidationError describing the first violated invariant.
void validate(const BackboneSpec& backbone);

inline constexpr int kEncodingWidth = 16;
inline constexpr std::array<double, 4> kRatioAlphabet{0.0, 0.5, 0.75, 1.0};
inline constexpr std::array<double, 3> kActiveRatios{0.5, 0.75, 1.0};

bool is_ratio(double value);

// Expansion ratio per cell, 0 marks a skipped cell. One entry per backbone
// cell (16 for the default backbone).
struct ArchEncoding {
  std::vector<double> ratios;

  bool operator==(const ArchEncoding&) const = default;
  auto operator<=>(const ArchEncoding&) const = default;
};

void validate(const ArchEncoding& arch, const BackboneSpec& backbone);
bool is_valid(const ArchEncoding& arch, const BackboneSpec& backbone);

// Active-unit count per block.
std::vector<int> active_units(const ArchEncoding& arch,
                              const BackboneSpec& backbone);

struct HwConfig {
  std::int64_t pf = 8;
  std::int64_t pc = 8;
  std::int64_t pv = 4;
  std::int64_t bw = 64;       // bits per cycle
  std::int64_t mem = 4 << 20;  // bytes

  bool operator==(const HwConfig&) const = default;
  auto operator<=>(const HwConfig&) const = default;
};

// Candidate values per hardware field.
struct HwDomain {
  std::vector<std::int64_t> pf;
  std::vector<std::int64_t> pc;
  std::vector<std::int64_t> pv;
  std::vector<std::int64_t> bw;
  std::vector<std::int64_t> mem;

  std::uint64_t size() const;
  bool contains(const HwConfig& hw) const;
};

// PF, PC in {8..128}, PV in {4, 8, 16}, BW in {32..256}, one MEM value.
HwDomain default_hw_domain();

// Checks the hardware field domains and MEM > 0.
void validate(const HwConfig& hw);

struct CodesignPoint {
  ArchEncoding arch;
  HwConfig hw;

  bool operator==(const CodesignPoint&) const = default;
  auto operator<=>(const CodesignPoint&) const = default;
};

void validate(const CodesignPoint& point, const BackboneSpec& backbone);

// Cartesian product, lexicographic in (pf, pc, pv, bw, mem).
std::vector<HwConfig> enumerate_hw_configs(const HwDomain& domain);

HwConfig random_hw(Rng& rng, const HwDomain& domain);

ArchEncoding random_arch(Rng& rng, const BackboneSpec& backbone);
ArchEncoding random_arch(std::uint64_t seed, const BackboneSpec& backbone);

// Maps any vector over the ratio alphabet onto the canonical valid space:
// active cells compacted to the front of each block, blocks short of
// min_units padded with ratio 0.5.
ArchEncoding canonicalize(const std::vector<double>& raw,
                          const BackboneSpec& backbone);

// Every canonical architecture, depth-aware, in lexicographic order of
// (block 0 units, block 0 ratios, block 1 units, ...).
std::vector<ArchEncoding> enumerate_archs(const BackboneSpec& backbone);

std::vector<LayerShape> arch_to_layers(const ArchEncoding& arch,
                                       const BackboneSpec& backbone);

// Mid width of a bottleneck unit with expansion ratio `ratio`.
std::int64_t bottleneck_width(double ratio, std::int64_t out_channels);

std::array<double, kEncodingWidth> encode16(const ArchEncoding& arch);
std::array<double, kEncodingWidth + 3> encode19(const CodesignPoint& point);

ArchEncoding decode16(std::span<const double> encoded,
                      const BackboneSpec& backbone);
CodesignPoint decode19(std::span<const double> encoded, std::int64_t bw,
                       std::int64_t mem, const BackboneSpec& backbone);

enum class CountMode { kRatioOnly, kDepthAware };

// Architecture-only count.
std::uint64_t count_arch_space(const BackboneSpec& backbone, CountMode mode);
// Joint count, architecture count times hardware configurations. Throws
// CountOverflow when the count reaches 2^63.
std::uint64_t count_space(const BackboneSpec& backbone, const HwDomain& domain,
                          CountMode mode);

}  // namespace codesign
