// Copyright 2026 The Finch Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Fuzzing a custom in-process target.
//
// The target below parses a tiny "image header": a 4-byte magic, a signed
// 16-bit width, and a 32-bit checksum over the first 8 bytes. It narrates its
// control flow through the ExecutionContext so that the engine sees blocks,
// comparisons and bugs.
//
//   custom_target [execs]

#include <cstdio>
#include <cstdlib>
#include <random>
#include <vector>

#include "finch/engine.hpp"
#include "finch/target.hpp"

namespace {

finch::TargetHandle image_header() {
  using finch::Relation;
  finch::TargetHandle t;
  t.name = "image_header";
  t.description = "magic, signed width, checksum";
  t.max_input_len = 32;
  t.site_count = 4;
  t.block_count = 6;
  t.body = [](finch::ExecutionContext& ctx, std::span<const std::uint8_t> in) {
    ctx.report_block(1);
    if (!ctx.report_cmp(0, Relation::EQ, finch::load_u32_be(in, 0), 0x494d4721)) {
      return;  // "IMG!"
    }
    ctx.report_block(2);
    const auto width = static_cast<std::int16_t>(finch::load_u32_le(in, 4) & 0xffff);
    // Signed operands go through ordered() so distances stay monotone.
    if (ctx.report_cmp(1, Relation::LT, finch::ordered(width), finch::ordered(-100))) {
      ctx.report_block(3);
      ctx.report_bug(0);
    }
    ctx.report_block(4);
    std::uint32_t sum = 0;
    for (std::size_t i = 0; i < 8 && i < in.size(); ++i) sum = sum * 31 + in[i];
    if (ctx.report_cmp(2, Relation::EQ, finch::load_u32_le(in, 8), sum)) {
      ctx.report_block(5);
      if (ctx.report_opaque(3, in.size() > 16)) {
        ctx.report_block(6);
        ctx.report_bug(1);
      }
    }
  };
  return t;
}

}  // namespace

int main(int argc, char** argv) {
  const std::uint64_t execs = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 500000;
  const auto target = image_header();

  std::mt19937_64 rng(1);
  finch::Bytes seed(12);
  for (auto& b : seed) b = static_cast<std::uint8_t>(rng());

  finch::EngineHooks hooks;
  hooks.on_stats = [](const finch::StatsRow& r) {
    std::printf("execs=%-8llu edges=%-3zu pool=%-3zu objectives=%zu bugs=%zu\n",
                static_cast<unsigned long long>(r.execs), r.edges_covered,
                r.pool_size, r.objective_count, r.crashes_unique);
  };
  const auto result = finch::hot_fuzz(target, std::vector<finch::Bytes>{seed},
                                      finch::Budget::Execs(execs), {}, hooks);

  for (const auto& c : result.crash_pool) {
    std::printf("bug %u:", c.bug);
    for (auto b : c.input) std::printf(" %02x", b);
    std::printf("\n");
  }
  return result.crash_pool.empty() ? 1 : 0;
}
