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

#include "codesign/design_space.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <fmt/format.h>

#include "codesign/error.hpp"

namespace codesign {

namespace {

constexpr std::uint64_t kCountLimit = std::uint64_t{1} << 63;

std::int64_t ceil_div(std::int64_t a, std::int64_t b) { return (a + b - 1) / b; }

bool contains(const std::vector<std::int64_t>& values, std::int64_t v) {
  return std::find(values.begin(), values.end(), v) != values.end();
}

// Multiplies with a hard ceiling at 2^63.
std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b) {
  if (b != 0 && a > (kCountLimit - 1) / b) {
    throw CountOverflow("design-space count does not fit below 2^63");
  }
  return a * b;
}

std::uint64_t checked_add(std::uint64_t a, std::uint64_t b) {
  if (a >= kCountLimit - b) {
    throw CountOverflow("design-space count does not fit below 2^63");
  }
  return a + b;
}

std::uint64_t pow3(int exponent) {
  std::uint64_t result = 1;
  for (int i = 0; i < exponent; ++i) result = checked_mul(result, 3);
  return result;
}

LayerShape make_layer(LayerKind kind, std::int64_t c_in, std::int64_t c_out,
                      std::int64_t h_in, std::int64_t w_in, std::int64_t k,
                      std::int64_t stride) {
  LayerShape layer;
  layer.kind = kind;
  layer.c_in = c_in;
  layer.c_out = c_out;
  layer.h_in = h_in;
  layer.w_in = w_in;
  layer.h_out = ceil_div(h_in, stride);
  layer.w_out = ceil_div(w_in, stride);
  layer.k = k;
  layer.stride = stride;
  return layer;
}

// Spatial size and channel count entering the first block.
struct StemOutput {
  std::int64_t channels;
  std::int64_t h;
  std::int64_t w;
};

StemOutput stem_output(const BackboneSpec& backbone) {
  if (backbone.stem_layers.empty()) {
    return {3, backbone.input_resolution, backbone.input_resolution};
  }
  const LayerShape& last = backbone.stem_layers.back();
  return {last.c_out, last.h_out, last.w_out};
}

}  // namespace

std::string_view to_string(LayerKind kind) {
  switch (kind) {
    case LayerKind::kConv:
      return "conv";
    case LayerKind::kShortcutAdd:
      return "shortcut_add";
    case LayerKind::kPool:
      return "pool";
    case LayerKind::kFc:
      return "fc";
  }
  return "unknown";
}

int BackboneSpec::total_cells() const {
  int total = 0;
  for (const auto& block : blocks) total += block.max_units;
  return total;
}

int BackboneSpec::block_offset(std::size_t block) const {
  int offset = 0;
  for (std::size_t b = 0; b < block; ++b) offset += blocks[b].max_units;
  return offset;
}

std::vector<LayerShape> resnet_stem(std::int64_t input_resolution,
                                    std::int64_t stem_channels) {
  LayerShape conv = make_layer(LayerKind::kConv, 3, stem_channels,
                               input_resolution, input_resolution, 7, 2);
  LayerShape pool = make_layer(LayerKind::kPool, stem_channels, stem_channels,
                               conv.h_out, conv.w_out, 3, 2);
  return {conv, pool};
}

BackboneSpec default_backbone() {
  BackboneSpec backbone;
  backbone.input_resolution = 224;
  backbone.data_width = 1;
  backbone.num_classes = 1000;
  backbone.stem_layers = resnet_stem(224, 64);
  backbone.blocks = {
      {4, 2, 256, 56, 56, 1},
      {4, 2, 512, 28, 28, 2},
      {4, 2, 1024, 14, 14, 2},
      {4, 2, 2048, 7, 7, 2},
  };
  return backbone;
}

void validate(const BackboneSpec& backbone) {
  if (backbone.blocks.empty()) throw ValidationError("backbone has no blocks");
  if (backbone.input_resolution <= 0) {
    throw ValidationError("input resolution must be positive");
  }
  if (backbone.data_width <= 0) throw ValidationError("data width must be positive");
  if (backbone.num_classes <= 0) throw ValidationError("num_classes must be positive");
  if (backbone.total_cells() > kEncodingWidth) {
    throw ValidationError(fmt::format("backbone has {} cells, at most {} fit the encoding",
                                      backbone.total_cells(), kEncodingWidth));
  }

  std::int64_t channels = 3;
  std::int64_t h = backbone.input_resolution;
  std::int64_t w = backbone.input_resolution;
  for (std::size_t i = 0; i < backbone.stem_layers.size(); ++i) {
    const LayerShape& layer = backbone.stem_layers[i];
    if (layer.c_in != channels || layer.h_in != h || layer.w_in != w) {
      throw ValidationError(fmt::format("stem layer {} does not chain from its input", i));
    }
    if (layer.stride < 1 || layer.k < 1 || layer.c_out < 1) {
      throw ValidationError(fmt::format("stem layer {} has a non-positive field", i));
    }
    if (layer.h_out != ceil_div(layer.h_in, layer.stride) ||
        layer.w_out != ceil_div(layer.w_in, layer.stride)) {
      throw ValidationError(fmt::format("stem layer {} output size mismatch", i));
    }
    if (layer.kind == LayerKind::kConv && layer.k != 1 && layer.k != 3 && layer.k != 7) {
      throw ValidationError(fmt::format("stem conv {} has kernel {}", i, layer.k));
    }
    channels = layer.c_out;
    h = layer.h_out;
    w = layer.w_out;
  }

  for (std::size_t b = 0; b < backbone.blocks.size(); ++b) {
    const BlockSpec& block = backbone.blocks[b];
    if (block.min_units < 2) {
      throw ValidationError(fmt::format("block {} min_units {} < 2", b, block.min_units));
    }
    if (block.min_units > block.max_units) {
      throw ValidationError(fmt::format("block {} min_units {} > max_units {}", b,
                                        block.min_units, block.max_units));
    }
    if (block.first_unit_stride != 1 && block.first_unit_stride != 2) {
      throw ValidationError(fmt::format("block {} stride must be 1 or 2", b));
    }
    if (block.out_channels <= channels && b > 0) {
      throw ValidationError(fmt::format("block {} out_channels not increasing", b));
    }
    if (block.out_channels <= 0) {
      throw ValidationError(fmt::format("block {} out_channels must be positive", b));
    }
    if (block.feature_h != ceil_div(h, block.first_unit_stride) ||
        block.feature_w != ceil_div(w, block.first_unit_stride)) {
      throw ValidationError(fmt::format(
          "block {} feature size {}x{} inconsistent with input {}x{} and stride {}", b,
          block.feature_h, block.feature_w, h, w, block.first_unit_stride));
    }
    channels = block.out_channels;
    h = block.feature_h;
    w = block.feature_w;
  }
}

bool is_ratio(double value) {
  return std::find(kRatioAlphabet.begin(), kRatioAlphabet.end(), value) !=
         kRatioAlphabet.end();
}

void validate(const ArchEncoding& arch, const BackboneSpec& backbone) {
  const auto cells = static_cast<std::size_t>(backbone.total_cells());
  if (arch.ratios.size() != cells) {
    throw ValidationError(fmt::format("architecture has {} cells, backbone expects {}",
                                      arch.ratios.size(), cells));
  }
  for (std::size_t i = 0; i < cells; ++i) {
    if (!is_ratio(arch.ratios[i])) {
      throw ValidationError(fmt::format("cell {} has ratio {} outside {{0, 0.5, 0.75, 1}}",
                                        i, arch.ratios[i]));
    }
  }
  for (std::size_t b = 0; b < backbone.blocks.size(); ++b) {
    const BlockSpec& block = backbone.blocks[b];
    const int offset = backbone.block_offset(b);
    int active = 0;
    bool seen_skip = false;
    for (int u = 0; u < block.max_units; ++u) {
      const bool skipped = arch.ratios[static_cast<std::size_t>(offset + u)] == 0.0;
      if (skipped) {
        seen_skip = true;
      } else if (seen_skip) {
        throw ValidationError(
            fmt::format("block {} has an active cell after a skipped cell", b));
      } else {
        ++active;
      }
    }
    if (active < block.min_units) {
      throw ValidationError(fmt::format("block {} has {} active cells, needs {}", b, active,
                                        block.min_units));
    }
  }
}

bool is_valid(const ArchEncoding& arch, const BackboneSpec& backbone) {
  try {
    validate(arch, backbone);
    return true;
  } catch (const ValidationError&) {
    return false;
  }
}

std::vector<int> active_units(const ArchEncoding& arch, const BackboneSpec& backbone) {
  std::vector<int> counts;
  counts.reserve(backbone.blocks.size());
  for (std::size_t b = 0; b < backbone.blocks.size(); ++b) {
    const int offset = backbone.block_offset(b);
    int active = 0;
    for (int u = 0; u < backbone.blocks[b].max_units; ++u) {
      if (arch.ratios[static_cast<std::size_t>(offset + u)] != 0.0) ++active;
    }
    counts.push_back(active);
  }
  return counts;
}

std::uint64_t HwDomain::size() const {
  std::uint64_t total = 1;
  for (const auto* field : {&pf, &pc, &pv, &bw, &mem}) {
    total = checked_mul(total, field->size());
  }
  return total;
}

bool HwDomain::contains(const HwConfig& hw) const {
  return codesign::contains(pf, hw.pf) && codesign::contains(pc, hw.pc) &&
         codesign::contains(pv, hw.pv) && codesign::contains(bw, hw.bw) &&
         codesign::contains(mem, hw.mem);
}

HwDomain default_hw_domain() {
  return {{8, 16, 32, 64, 128}, {8, 16, 32, 64, 128}, {4, 8, 16}, {32, 64, 128, 256},
          {4 << 20}};
}

void validate(const HwConfig& hw) {
  static const HwDomain reference = default_hw_domain();
  if (!contains(reference.pf, hw.pf)) throw ValidationError(fmt::format("PF {} not allowed", hw.pf));
  if (!contains(reference.pc, hw.pc)) throw ValidationError(fmt::format("PC {} not allowed", hw.pc));
  if (!contains(reference.pv, hw.pv)) throw ValidationError(fmt::format("PV {} not allowed", hw.pv));
  if (!contains(reference.bw, hw.bw)) throw ValidationError(fmt::format("BW {} not allowed", hw.bw));
  if (hw.mem <= 0) throw ValidationError("MEM must be positive");
}

void validate(const CodesignPoint& point, const BackboneSpec& backbone) {
  validate(point.arch, backbone);
  validate(point.hw);
}

std::vector<HwConfig> enumerate_hw_configs(const HwDomain& domain) {
  const std::pair<const char*, const std::vector<std::int64_t>*> fields[] = {
      {"pf", &domain.pf}, {"pc", &domain.pc}, {"pv", &domain.pv},
      {"bw", &domain.bw}, {"mem", &domain.mem}};
  for (const auto& [name, values] : fields) {
    if (values->empty()) throw InvalidDomain(fmt::format("hardware domain field {} is empty", name));
    std::vector<std::int64_t> sorted = *values;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      throw InvalidDomain(fmt::format("hardware domain field {} has duplicates", name));
    }
  }
  std::vector<HwConfig> configs;
  configs.reserve(static_cast<std::size_t>(domain.size()));
  for (auto pf : domain.pf)
    for (auto pc : domain.pc)
      for (auto pv : domain.pv)
        for (auto bw : domain.bw)
          for (auto mem : domain.mem) configs.push_back({pf, pc, pv, bw, mem});
  return configs;
}

HwConfig random_hw(Rng& rng, const HwDomain& domain) {
  HwConfig hw;
  hw.pf = rng.pick(domain.pf);
  hw.pc = rng.pick(domain.pc);
  hw.pv = rng.pick(domain.pv);
  hw.bw = rng.pick(domain.bw);
  hw.mem = rng.pick(domain.mem);
  return hw;
}

ArchEncoding random_arch(Rng& rng, const BackboneSpec& backbone) {
  ArchEncoding arch;
  arch.ratios.assign(static_cast<std::size_t>(backbone.total_cells()), 0.0);
  for (std::size_t b = 0; b < backbone.blocks.size(); ++b) {
    const BlockSpec& block = backbone.blocks[b];
    const int offset = backbone.block_offset(b);
    const int span = block.max_units - block.min_units + 1;
    const int units = block.min_units + static_cast<int>(rng.index(static_cast<std::size_t>(span)));
    for (int u = 0; u < units; ++u) {
      arch.ratios[static_cast<std::size_t>(offset + u)] = rng.pick(kActiveRatios);
    }
  }
  return arch;
}

ArchEncoding random_arch(std::uint64_t seed, const BackboneSpec& backbone) {
  Rng rng(seed);
  return random_arch(rng, backbone);
}

ArchEncoding canonicalize(const std::vector<double>& raw, const BackboneSpec& backbone) {
  const auto cells = static_cast<std::size_t>(backbone.total_cells());
  if (raw.size() != cells) {
    throw ValidationError(
        fmt::format("raw encoding has {} values, backbone expects {}", raw.size(), cells));
  }
  for (double v : raw) {
    if (!is_ratio(v)) throw ValidationError(fmt::format("raw ratio {} outside alphabet", v));
  }
  ArchEncoding arch;
  arch.ratios.assign(cells, 0.0);
  for (std::size_t b = 0; b < backbone.blocks.size(); ++b) {
    const BlockSpec& block = backbone.blocks[b];
    const auto offset = static_cast<std::size_t>(backbone.block_offset(b));
    std::size_t write = offset;
    for (int u = 0; u < block.max_units; ++u) {
      const double v = raw[offset + static_cast<std::size_t>(u)];
      if (v != 0.0) arch.ratios[write++] = v;
    }
    while (write < offset + static_cast<std::size_t>(block.min_units)) {
      arch.ratios[write++] = 0.5;
    }
  }
  return arch;
}

std::vector<ArchEncoding> enumerate_archs(const BackboneSpec& backbone) {
  // Every valid slice per block, then the Cartesian product across blocks.
  std::vector<std::vector<std::vector<double>>> per_block;
  for (const BlockSpec& block : backbone.blocks) {
    std::vector<std::vector<double>> slices;
    for (int units = block.min_units; units <= block.max_units; ++units) {
      const std::uint64_t combos = pow3(units);
      for (std::uint64_t code = 0; code < combos; ++code) {
        std::vector<double> slice(static_cast<std::size_t>(block.max_units), 0.0);
        std::uint64_t rest = code;
        for (int u = units - 1; u >= 0; --u) {
          slice[static_cast<std::size_t>(u)] = kActiveRatios[rest % 3];
          rest /= 3;
        }
        slices.push_back(std::move(slice));
      }
    }
    per_block.push_back(std::move(slices));
  }

  std::vector<ArchEncoding> archs;
  archs.reserve(static_cast<std::size_t>(count_arch_space(backbone, CountMode::kDepthAware)));
  std::vector<std::size_t> cursor(per_block.size(), 0);
  while (true) {
    ArchEncoding arch;
    arch.ratios.reserve(static_cast<std::size_t>(backbone.total_cells()));
    for (std::size_t b = 0; b < per_block.size(); ++b) {
      const auto& slice = per_block[b][cursor[b]];
      arch.ratios.insert(arch.ratios.end(), slice.begin(), slice.end());
    }
    archs.push_back(std::move(arch));
    // Odometer with block 0 as the most significant digit.
    std::size_t b = per_block.size();
    while (b > 0) {
      --b;
      if (++cursor[b] < per_block[b].size()) break;
      cursor[b] = 0;
      if (b == 0) return archs;
    }
  }
}

std::int64_t bottleneck_width(double ratio, std::int64_t out_channels) {
  return static_cast<std::int64_t>(std::llround(ratio * static_cast<double>(out_channels) / 4.0));
}

std::vector<LayerShape> arch_to_layers(const ArchEncoding& arch, const BackboneSpec& backbone) {
  validate(arch, backbone);
  std::vector<LayerShape> layers = backbone.stem_layers;
  auto [channels, h, w] = stem_output(backbone);

  for (std::size_t b = 0; b < backbone.blocks.size(); ++b) {
    const BlockSpec& block = backbone.blocks[b];
    const auto offset = static_cast<std::size_t>(backbone.block_offset(b));
    for (int u = 0; u < block.max_units; ++u) {
      const double ratio = arch.ratios[offset + static_cast<std::size_t>(u)];
      if (ratio == 0.0) break;
      const std::int64_t stride = u == 0 ? block.first_unit_stride : 1;
      const std::int64_t mid = bottleneck_width(ratio, block.out_channels);
      LayerShape reduce = make_layer(LayerKind::kConv, channels, mid, h, w, 1, 1);
      LayerShape spatial = make_layer(LayerKind::kConv, mid, mid, h, w, 3, stride);
      LayerShape expand = make_layer(LayerKind::kConv, mid, block.out_channels, spatial.h_out,
                                     spatial.w_out, 1, 1);
      LayerShape add = make_layer(LayerKind::kShortcutAdd, block.out_channels,
                                  block.out_channels, spatial.h_out, spatial.w_out, 1, 1);
      layers.insert(layers.end(), {reduce, spatial, expand, add});
      channels = block.out_channels;
      h = spatial.h_out;
      w = spatial.w_out;
    }
  }

  // Global average pool collapses the final feature map to 1x1.
  LayerShape pool;
  pool.kind = LayerKind::kPool;
  pool.c_in = pool.c_out = channels;
  pool.h_in = h;
  pool.w_in = w;
  pool.h_out = pool.w_out = 1;
  pool.k = h;
  pool.stride = h;
  layers.push_back(pool);
  layers.push_back(make_layer(LayerKind::kFc, channels, backbone.num_classes, 1, 1, 1, 1));
  return layers;
}

std::array<double, kEncodingWidth> encode16(const ArchEncoding& arch) {
  if (arch.ratios.size() > static_cast<std::size_t>(kEncodingWidth)) {
    throw ValidationError(fmt::format("architecture with {} cells does not fit 16 dimensions",
                                      arch.ratios.size()));
  }
  std::array<double, kEncodingWidth> encoded{};
  std::copy(arch.ratios.begin(), arch.ratios.end(), encoded.begin());
  return encoded;
}

std::array<double, kEncodingWidth + 3> encode19(const CodesignPoint& point) {
  std::array<double, kEncodingWidth + 3> encoded{};
  const auto arch = encode16(point.arch);
  std::copy(arch.begin(), arch.end(), encoded.begin());
  encoded[kEncodingWidth] = static_cast<double>(point.hw.pf);
  encoded[kEncodingWidth + 1] = static_cast<double>(point.hw.pc);
  encoded[kEncodingWidth + 2] = static_cast<double>(point.hw.pv);
  return encoded;
}

ArchEncoding decode16(std::span<const double> encoded, const BackboneSpec& backbone) {
  if (encoded.size() < static_cast<std::size_t>(kEncodingWidth)) {
    throw ValidationError(fmt::format("encoding has {} dimensions, expected 16", encoded.size()));
  }
  const auto cells = static_cast<std::size_t>(backbone.total_cells());
  for (std::size_t i = cells; i < static_cast<std::size_t>(kEncodingWidth); ++i) {
    if (encoded[i] != 0.0) {
      throw ValidationError(fmt::format("padding dimension {} is non-zero", i));
    }
  }
  ArchEncoding arch;
  arch.ratios.assign(encoded.begin(), encoded.begin() + static_cast<std::ptrdiff_t>(cells));
  validate(arch, backbone);
  return arch;
}

CodesignPoint decode19(std::span<const double> encoded, std::int64_t bw, std::int64_t mem,
                       const BackboneSpec& backbone) {
  if (encoded.size() != static_cast<std::size_t>(kEncodingWidth + 3)) {
    throw ValidationError(fmt::format("encoding has {} dimensions, expected 19", encoded.size()));
  }
  CodesignPoint point;
  point.arch = decode16(encoded.first(kEncodingWidth), backbone);
  auto as_int = [&](std::size_t i) {
    const double v = encoded[i];
    if (v != std::floor(v)) throw ValidationError(fmt::format("dimension {} is not integral", i));
    return static_cast<std::int64_t>(v);
  };
  point.hw = {as_int(16), as_int(17), as_int(18), bw, mem};
  validate(point.hw);
  return point;
}

std::uint64_t count_arch_space(const BackboneSpec& backbone, CountMode mode) {
  validate(backbone);
  if (mode == CountMode::kRatioOnly) return pow3(backbone.total_cells());
  std::uint64_t total = 1;
  for (const BlockSpec& block : backbone.blocks) {
    std::uint64_t per_block = 0;
    for (int u = block.min_units; u <= block.max_units; ++u) {
      per_block = checked_add(per_block, pow3(u));
    }
    total = checked_mul(total, per_block);
  }
  return total;
}

std::uint64_t count_space(const BackboneSpec& backbone, const HwDomain& domain, CountMode mode) {
  for (const auto* field : {&domain.pf, &domain.pc, &domain.pv, &domain.bw, &domain.mem}) {
    if (field->empty()) throw InvalidDomain("hardware domain has an empty field");
  }
  return checked_mul(count_arch_space(backbone, mode), domain.size());
}

}  // namespace codesign
