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

// Built-in synthetic targets. Each exercises one obstacle class that random
// mutation handles badly: checksums, 4-byte magics, nested ranges, and
// length-prefixed structure.

#ifndef FINCH_TARGETS_HPP_
#define FINCH_TARGETS_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "finch/target.hpp"

namespace finch {

namespace targets {

inline std::uint32_t load_u16_be(std::span<const std::uint8_t> in,
                                 std::size_t pos) {
  const std::uint32_t hi = pos < in.size() ? in[pos] : 0u;
  const std::uint32_t lo = pos + 1 < in.size() ? in[pos + 1] : 0u;
  return (hi << 8) | lo;
}

inline std::uint8_t byte_at(std::span<const std::uint8_t> in, std::size_t pos) {
  return pos < in.size() ? in[pos] : 0;
}

// Checksum guard followed by a magic comparison:
//
//   if (in[0] + in[1] + in[2] + in[3] == 8)         // site 0
//     if (in[4] == 'F')                             // site 1
//       if (in[5] == 'Z') bug 1;                    // site 2
//   if ((uint64_t)u32_be(in) * 2 == 0xdeadbeee)     // site 3
//     bug 2;
//
// Sites 0..3 are the four branches left uncovered by [1,1,1,0x0a,0,0,0,0]
// and [0x6f,0x56,0xdf,0x75,0,0,0,0]. The product is computed in 64 bits, so
// the magic branch is reached only by 0x6f56df77.
inline TargetHandle fig1() {
  TargetHandle t;
  t.name = "fig1";
  t.description = "checksum guard and u32*2 == 0xdeadbeee magic";
  t.max_input_len = 64;
  t.site_count = 4;
  t.block_count = 8;
  t.body = [](ExecutionContext& ctx, std::span<const std::uint8_t> in) {
    ctx.report_block(1);
    if (in.size() < 4) return;
    ctx.report_block(2);
    const std::uint64_t sum = std::uint64_t{in[0]} + in[1] + in[2] + in[3];
    if (ctx.report_cmp(0, Relation::EQ, sum, 8)) {
      ctx.report_block(3);
      if (ctx.report_cmp(1, Relation::EQ, byte_at(in, 4), 'F')) {
        ctx.report_block(4);
        if (ctx.report_cmp(2, Relation::EQ, byte_at(in, 5), 'Z')) {
          ctx.report_block(5);
          ctx.report_bug(1);
        }
      }
    }
    ctx.report_block(6);
    const std::uint64_t scaled = std::uint64_t{load_u32_be(in, 0)} * 2;
    if (ctx.report_cmp(3, Relation::EQ, scaled, 0xdeadbeee)) {
      ctx.report_block(7);
      ctx.report_bug(2);
    }
    ctx.report_block(8);
  };
  return t;
}

inline constexpr std::uint32_t kLava8Magics[] = {
    0x6c617661, 0x1badb002, 0xcafebabe, 0x8badf00d,
    0xfeedface, 0x0badc0de, 0x5eed1e55, 0xdeadbeef};
inline constexpr std::size_t kLava8Positions[] = {0, 7, 13, 22, 29, 38, 47, 56};

inline TargetHandle lava8() {
  return make_lava_target(
      std::vector<std::uint32_t>(std::begin(kLava8Magics),
                                 std::end(kLava8Magics)),
      std::vector<std::size_t>(std::begin(kLava8Positions),
                               std::end(kLava8Positions)),
      64, "lava8");
}

// Four nested range checks over a 16-byte header; bug 0 sits at the bottom.
// An all-zero input fails the first check, so only site 0 is visited.
inline TargetHandle nested() {
  TargetHandle t;
  t.name = "nested";
  t.description = "4-deep nested range conditions";
  t.max_input_len = 16;
  t.site_count = 4;
  t.block_count = 6;
  t.body = [](ExecutionContext& ctx, std::span<const std::uint8_t> in) {
    ctx.report_block(1);
    if (ctx.report_cmp(0, Relation::GT, byte_at(in, 0), 0xc0)) {
      ctx.report_block(2);
      if (ctx.report_cmp(1, Relation::GE, load_u16_be(in, 2), 0xa000)) {
        ctx.report_block(3);
        if (ctx.report_cmp(2, Relation::LT, load_u32_be(in, 4), 0x1000)) {
          ctx.report_block(4);
          if (ctx.report_cmp(3, Relation::GT, load_u32_be(in, 8),
                             0xffff0000u)) {
            ctx.report_block(5);
            ctx.report_bug(0);
          }
        }
      }
    }
    ctx.report_block(6);
  };
  return t;
}

// "LF" followed by records [type:1][len:1][payload:len]. Type 1 appends its
// payload to a store; type 2 is a copy {offset, count} out of the store whose
// bounds check only looks at the offset, so offset + count past the stored
// length is an out-of-bounds read (bug 0).
inline TargetHandle lenfield() {
  TargetHandle t;
  t.name = "lenfield";
  t.description = "length-prefixed record parser with an out-of-bounds copy";
  t.max_input_len = 256;
  t.site_count = 7;
  t.block_count = 10;
  t.body = [](ExecutionContext& ctx, std::span<const std::uint8_t> in) {
    constexpr std::size_t kMaxRecords = 32;
    ctx.report_block(1);
    if (!ctx.report_cmp(0, Relation::EQ, load_u16_be(in, 0), 0x4c46)) return;
    ctx.report_block(2);
    std::size_t pos = 2;
    std::size_t stored = 0;
    for (std::size_t rec = 0; rec < kMaxRecords && pos + 2 <= in.size();
         ++rec) {
      ctx.report_block(3);
      const std::uint8_t type = in[pos];
      const std::uint8_t len = in[pos + 1];
      const std::size_t remaining = in.size() - pos - 2;
      pos += 2;
      if (!ctx.report_cmp(2, Relation::LE, len, remaining)) {
        ctx.report_block(4);
        return;
      }
      if (ctx.report_cmp(1, Relation::EQ, type, 0x01)) {
        ctx.report_block(5);
        stored += len;
      } else if (ctx.report_cmp(3, Relation::EQ, type, 0x02)) {
        ctx.report_block(6);
        if (ctx.report_cmp(4, Relation::EQ, len, 2)) {
          ctx.report_block(7);
          const std::uint8_t offset = in[pos];
          const std::uint8_t count = in[pos + 1];
          if (ctx.report_cmp(5, Relation::LT, offset, stored)) {
            ctx.report_block(8);
            if (ctx.report_cmp(6, Relation::GT, std::uint64_t{offset} + count,
                               stored)) {
              ctx.report_block(9);
              ctx.report_bug(0);
            }
          }
        }
      }
      pos += len;
    }
    ctx.report_block(10);
  };
  return t;
}

}  // namespace targets

inline std::vector<TargetHandle> builtin_targets() {
  return {targets::fig1(), targets::lava8(), targets::nested(),
          targets::lenfield()};
}

inline std::optional<TargetHandle> find_target(std::string_view name) {
  for (auto& t : builtin_targets()) {
    if (t.name == name) return t;
  }
  return std::nullopt;
}

}  // namespace finch

#endif  // FINCH_TARGETS_HPP_
