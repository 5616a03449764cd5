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

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "codesign/design_space.hpp"
#include "codesign/error.hpp"

using namespace codesign;

namespace {

// Two blocks of U=3 cells taken from the front of the default backbone.
BackboneSpec small_backbone(int units = 3) {
  BackboneSpec bb = default_backbone();
  bb.blocks.resize(2);
  for (auto& b : bb.blocks) b.max_units = units;
  return bb;
}

ArchEncoding minimal_arch(const BackboneSpec& bb) {
  ArchEncoding arch;
  for (const auto& block : bb.blocks) {
    for (int u = 0; u < block.max_units; ++u) arch.ratios.push_back(u < 2 ? 0.5 : 0.0);
  }
  return arch;
}

// Independent count: walks every raw vector over the 4-letter alphabet and
// keeps the ones that validate.
std::uint64_t brute_force_count(const BackboneSpec& bb) {
  const int cells = bb.total_cells();
  std::uint64_t total = 1;
  for (int i = 0; i < cells; ++i) total *= 4;
  std::uint64_t valid = 0;
  for (std::uint64_t code = 0; code < total; ++code) {
    ArchEncoding arch;
    std::uint64_t rest = code;
    for (int i = 0; i < cells; ++i) {
      arch.ratios.push_back(kRatioAlphabet[rest % 4]);
      rest /= 4;
    }
    if (is_valid(arch, bb)) ++valid;
  }
  return valid;
}

}  // namespace

TEST_CASE("default backbone is valid and has 16 cells") {
  const BackboneSpec bb = default_backbone();
  CHECK_NOTHROW(validate(bb));
  CHECK(bb.total_cells() == 16);
  CHECK(bb.stem_layers.size() == 2);
  CHECK(bb.stem_layers.back().h_out == 56);
}

TEST_CASE("backbone validation rejects broken invariants") {
  BackboneSpec bb = default_backbone();
  SUBCASE("min_units below two") { bb.blocks[0].min_units = 1; }
  SUBCASE("min above max") { bb.blocks[1].min_units = 5; }
  SUBCASE("channels not increasing") { bb.blocks[2].out_channels = 512; }
  SUBCASE("feature size inconsistent with stride") { bb.blocks[1].feature_h = 56; }
  SUBCASE("too many cells") { bb.blocks[0].max_units = 8; }
  CHECK_THROWS_AS(validate(bb), ValidationError);
}

TEST_CASE("enumerate_hw_configs") {
  CHECK(enumerate_hw_configs(default_hw_domain()).size() == 300);

  HwDomain single{{8}, {8}, {4}, {32}, {1024}};
  CHECK(enumerate_hw_configs(single).size() == 1);

  HwDomain small{{8, 16}, {8}, {4}, {32, 64}, {1024}};
  const auto configs = enumerate_hw_configs(small);
  REQUIRE(configs.size() == 4);
  CHECK(configs[0] == HwConfig{8, 8, 4, 32, 1024});
  CHECK(configs[1] == HwConfig{8, 8, 4, 64, 1024});
  CHECK(configs[3] == HwConfig{16, 8, 4, 64, 1024});
  CHECK(std::is_sorted(configs.begin(), configs.end()));

  HwDomain empty = small;
  empty.pv.clear();
  CHECK_THROWS_AS(enumerate_hw_configs(empty), InvalidDomain);
}

TEST_CASE("enumeration length is the product of field sizes") {
  const HwDomain full = default_hw_domain();
  for (std::size_t mask = 0; mask < 32; ++mask) {
    HwDomain d = full;
    std::vector<std::int64_t>* fields[] = {&d.pf, &d.pc, &d.pv, &d.bw, &d.mem};
    std::size_t expected = 1;
    for (std::size_t f = 0; f < 5; ++f) {
      if (mask & (std::size_t{1} << f)) fields[f]->resize(1);
      expected *= fields[f]->size();
    }
    const auto configs = enumerate_hw_configs(d);
    CHECK(configs.size() == expected);
    CHECK(std::set<HwConfig>(configs.begin(), configs.end()).size() == expected);
  }
}

TEST_CASE("random_arch is deterministic and always valid") {
  const BackboneSpec bb = default_backbone();
  CHECK(random_arch(7, bb) == random_arch(7, bb));
  CHECK(random_arch(7, bb) != random_arch(8, bb));

  Rng rng(123);
  std::set<int> unit_counts;
  for (int i = 0; i < 10000; ++i) {
    const ArchEncoding arch = random_arch(rng, bb);
    REQUIRE(is_valid(arch, bb));
    CHECK(canonicalize(arch.ratios, bb) == arch);
    for (int u : active_units(arch, bb)) {
      CHECK(u >= 2);
      unit_counts.insert(u);
    }
  }
  CHECK(unit_counts == std::set<int>{2, 3, 4});
}

TEST_CASE("canonicalize compacts and repairs") {
  BackboneSpec bb = default_backbone();
  bb.blocks.resize(1);

  CHECK(canonicalize({0.5, 0, 0.75, 0}, bb).ratios == std::vector<double>{0.5, 0.75, 0, 0});
  CHECK(canonicalize({0, 0, 0, 0}, bb).ratios == std::vector<double>{0.5, 0.5, 0, 0});
  CHECK(canonicalize({0, 1.0, 0, 0}, bb).ratios == std::vector<double>{1.0, 0.5, 0, 0});
  CHECK(canonicalize({0.5, 0.75, 1.0, 0}, bb).ratios == std::vector<double>{0.5, 0.75, 1.0, 0});
  CHECK_THROWS_AS(canonicalize({0.3, 0, 0, 0}, bb), ValidationError);
}

TEST_CASE("canonicalize maps every raw vector into the valid space idempotently") {
  const BackboneSpec bb = small_backbone();
  Rng rng(5);
  for (int i = 0; i < 2000; ++i) {
    std::vector<double> raw;
    for (int c = 0; c < bb.total_cells(); ++c) raw.push_back(rng.pick(kRatioAlphabet));
    const ArchEncoding once = canonicalize(raw, bb);
    REQUIRE(is_valid(once, bb));
    CHECK(canonicalize(once.ratios, bb) == once);
  }
}

TEST_CASE("arch validation") {
  const BackboneSpec bb = small_backbone();
  ArchEncoding arch = minimal_arch(bb);
  CHECK(is_valid(arch, bb));
  arch.ratios[0] = 0.0;  // skip before active
  CHECK_FALSE(is_valid(arch, bb));
  arch = minimal_arch(bb);
  arch.ratios[1] = 0.0;  // one active unit
  CHECK_FALSE(is_valid(arch, bb));
  arch = minimal_arch(bb);
  arch.ratios[2] = 0.6;
  CHECK_FALSE(is_valid(arch, bb));
  arch = minimal_arch(bb);
  arch.ratios.pop_back();
  CHECK_FALSE(is_valid(arch, bb));
}

TEST_CASE("arch_to_layers lowering") {
  const BackboneSpec bb = default_backbone();

  SUBCASE("minimal arch has 36 layers") {
    // 8 cells x 4 layers + 2 stem + pool + fc, counted by walking the rule.
    const auto layers = arch_to_layers(minimal_arch(bb), bb);
    CHECK(layers.size() == 36);
    CHECK(layers[34].kind == LayerKind::kPool);
    CHECK(layers[35].kind == LayerKind::kFc);
    CHECK(layers[35].c_out == 1000);
  }

  SUBCASE("mid widths") {
    CHECK(bottleneck_width(1.0, 256) == 64);
    CHECK(bottleneck_width(0.75, 512) == 96);
    CHECK(bottleneck_width(0.5, 2048) == 256);
    ArchEncoding arch = minimal_arch(bb);
    arch.ratios[0] = 1.0;
    const auto layers = arch_to_layers(arch, bb);
    CHECK(layers[2].c_out == 64);
    CHECK(layers[3].c_in == 64);
    CHECK(layers[3].k == 3);
  }

  SUBCASE("channels chain and spatial size follows block strides") {
    Rng rng(9);
    for (int trial = 0; trial < 200; ++trial) {
      const auto layers = arch_to_layers(random_arch(rng, bb), bb);
      for (std::size_t i = 1; i < layers.size(); ++i) {
        CHECK(layers[i].c_in == layers[i - 1].c_out);
        CHECK(layers[i].h_in == layers[i - 1].h_out);
      }
      for (const auto& l : layers) {
        if (l.kind == LayerKind::kConv) {
          CHECK((l.k == 1 || l.k == 3 || l.k == 7));
          CHECK(l.h_out == (l.h_in + l.stride - 1) / l.stride);
        }
      }
      CHECK(layers[layers.size() - 2].h_in == 7);
    }
  }

  SUBCASE("invalid arch rejected") {
    ArchEncoding arch = minimal_arch(bb);
    arch.ratios[1] = 0.0;
    CHECK_THROWS_AS(arch_to_layers(arch, bb), ValidationError);
  }
}

TEST_CASE("encode16 and encode19") {
  const BackboneSpec bb = default_backbone();
  ArchEncoding all_half;
  all_half.ratios.assign(16, 0.5);
  const auto e16 = encode16(all_half);
  CHECK(std::all_of(e16.begin(), e16.end(), [](double v) { return v == 0.5; }));
  CHECK(decode16(e16, bb) == all_half);

  ArchEncoding prefix = minimal_arch(bb);
  prefix.ratios[1] = 0.75;
  const auto p16 = encode16(prefix);
  CHECK(p16[0] == 0.5);
  CHECK(p16[1] == 0.75);
  CHECK(p16[2] == 0.0);
  CHECK(p16[3] == 0.0);

  CodesignPoint point{all_half, {64, 32, 8, 128, 4 << 20}};
  const auto e19 = encode19(point);
  for (int i = 0; i < 16; ++i) CHECK(e19[static_cast<std::size_t>(i)] == 0.5);
  CHECK(e19[16] == 64);
  CHECK(e19[17] == 32);
  CHECK(e19[18] == 8);

  CodesignPoint other_bw = point;
  other_bw.hw.bw = 32;
  other_bw.hw.mem = 1 << 20;
  CHECK(encode19(other_bw) == e19);
  CHECK(decode19(e19, 128, 4 << 20, bb) == point);
  CHECK(decode19(e19, 32, 1 << 20, bb).arch == point.arch);
}

TEST_CASE("smaller backbones pad the 16-dim encoding with zeros") {
  const BackboneSpec bb = small_backbone();
  const ArchEncoding arch = random_arch(3, bb);
  const auto e = encode16(arch);
  for (std::size_t i = 6; i < 16; ++i) CHECK(e[i] == 0.0);
  CHECK(decode16(e, bb) == arch);
  auto bad = e;
  bad[10] = 0.5;
  CHECK_THROWS_AS(decode16(bad, bb), ValidationError);
}

TEST_CASE("encodings are injective on canonical architectures") {
  const BackboneSpec bb = small_backbone();
  const auto archs = enumerate_archs(bb);
  std::set<std::array<double, 16>> seen;
  for (const auto& a : archs) seen.insert(encode16(a));
  CHECK(seen.size() == archs.size());
}

TEST_CASE("count_space") {
  const BackboneSpec bb = default_backbone();
  CHECK(count_arch_space(bb, CountMode::kRatioOnly) == 43046721ull);
  CHECK(count_space(bb, default_hw_domain(), CountMode::kRatioOnly) == 12914016300ull);
  CHECK(count_arch_space(bb, CountMode::kDepthAware) == 117ull * 117 * 117 * 117);

  BackboneSpec one = default_backbone();
  one.blocks.resize(1);
  one.blocks[0].max_units = 2;
  HwDomain single{{8}, {8}, {4}, {32}, {1024}};
  CHECK(count_space(one, single, CountMode::kDepthAware) == 9);
}

TEST_CASE("depth-aware count equals brute-force enumeration on small backbones") {
  for (int units : {2, 3}) {
    const BackboneSpec bb = small_backbone(units);
    const std::uint64_t expected = brute_force_count(bb);
    CHECK(count_arch_space(bb, CountMode::kDepthAware) == expected);
    CHECK(enumerate_archs(bb).size() == expected);
  }
  BackboneSpec mixed = small_backbone(3);
  mixed.blocks[1].max_units = 2;
  CHECK(count_arch_space(mixed, CountMode::kDepthAware) == brute_force_count(mixed));
}

TEST_CASE("count overflow is reported") {
  const BackboneSpec bb = default_backbone();
  HwDomain wide;
  for (std::int64_t v = 1; v <= 200; ++v) {
    for (auto* field : {&wide.pf, &wide.pc, &wide.pv, &wide.bw, &wide.mem}) field->push_back(v);
  }
  // 117^4 depth-aware archs times 200^5 configurations exceeds 2^63.
  CHECK_THROWS_AS(count_space(bb, wide, CountMode::kDepthAware), CountOverflow);
  wide.mem.resize(1);
  wide.bw.resize(1);
  CHECK(count_space(bb, wide, CountMode::kRatioOnly) == 43046721ull * 200 * 200 * 200);
}
