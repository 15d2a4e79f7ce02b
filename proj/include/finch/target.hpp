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

// In-process harness API.
//
// A target is a plain function over the input bytes that narrates its own
// execution through an ExecutionContext:
//
//   report_block(id)          on entry to each basic block (ids start at 1)
//   report_cmp(site, rel, a, b)
//                             evaluates `a rel b`, records the branch distance
//                             and outcome for `site`, and returns the outcome
//   report_opaque(site, taken)
//                             a condition over non-integer data; distance 0
//   report_bug(id)            stops the run with a labeled crash
//
// Signed operands go through finch::ordered() before reaching report_cmp.
// Targets must keep no state between runs.

#ifndef FINCH_TARGET_HPP_
#define FINCH_TARGET_HPP_

#include <algorithm>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "finch/common.hpp"
#include "finch/coverage.hpp"
#include "finch/distance.hpp"

namespace finch {

using BugId = std::uint32_t;

inline constexpr std::uint64_t kDefaultEventBudget = 1'000'000;

enum class Outcome : std::uint8_t { Ok, Crash, Hang };

struct RunOptions {
  std::uint64_t max_distance = kDefaultMaxDistance;
  DistanceMode distance_mode = DistanceMode::Abs;
  std::uint32_t map_size = kDefaultMapSize;
  std::uint64_t event_budget = kDefaultEventBudget;
};

struct ExecutionResult {
  CoverageBitmap coverage;
  BranchCoverage branches;
  DistanceBitmap distances;
  Outcome outcome = Outcome::Ok;
  BugId bug = 0;           // meaningful when outcome == Crash
  bool truncated = false;  // input was longer than max_input_len

  friend bool operator==(const ExecutionResult&,
                         const ExecutionResult&) = default;
};

namespace detail {
struct StopRun {};
}  // namespace detail

class ExecutionContext {
 public:
  explicit ExecutionContext(ExecutionResult& result, const RunOptions& opts)
      : result_(result), opts_(opts) {}

  void report_block(BlockId id) {
    tick();
    result_.coverage.record_transition(block_location(id));
  }

  bool report_cmp(SiteId site, Relation rel, std::uint64_t a,
                  std::uint64_t b) {
    tick();
    const bool taken = evaluate(rel, a, b);
    result_.distances.record(site,
                             branch_distance(rel, a, b, opts_.distance_mode));
    result_.branches.mark(site, taken);
    return taken;
  }

  bool report_opaque(SiteId site, bool taken) {
    tick();
    result_.distances.record(site, 0);
    result_.branches.mark(site, taken);
    return taken;
  }

  [[noreturn]] void report_bug(BugId id) {
    result_.outcome = Outcome::Crash;
    result_.bug = id;
    throw detail::StopRun{};
  }

 private:
  void tick() {
    if (++events_ > opts_.event_budget) {
      result_.outcome = Outcome::Hang;
      throw detail::StopRun{};
    }
  }

  ExecutionResult& result_;
  const RunOptions& opts_;
  std::uint64_t events_ = 0;
};

struct TargetHandle {
  using Body = std::function<void(ExecutionContext&, std::span<const std::uint8_t>)>;

  std::string name;
  std::string description;
  std::size_t max_input_len = 10 * 1024;
  std::size_t site_count = 0;
  std::size_t block_count = 0;
  Body body;
};

// Runs targets while reusing one result buffer. Not thread-safe; use one
// Executor per thread.
class Executor {
 public:
  explicit Executor(const TargetHandle& target, RunOptions opts = {})
      : target_(target), opts_(opts) {
    result_.coverage = CoverageBitmap(opts_.map_size);
    result_.branches = BranchCoverage(target_.site_count);
    result_.distances = DistanceBitmap(opts_.max_distance);
  }

  const ExecutionResult& run(std::span<const std::uint8_t> input) {
    result_.coverage.reset();
    result_.branches.reset();
    result_.distances.clear();
    result_.outcome = Outcome::Ok;
    result_.bug = 0;
    result_.truncated = input.size() > target_.max_input_len;
    if (result_.truncated) input = input.first(target_.max_input_len);
    ExecutionContext ctx(result_, opts_);
    try {
      target_.body(ctx, input);
    } catch (const detail::StopRun&) {
    }
    return result_;
  }

  const TargetHandle& target() const { return target_; }
  const RunOptions& options() const { return opts_; }

 private:
  const TargetHandle& target_;
  RunOptions opts_;
  ExecutionResult result_;
};

inline ExecutionResult run(const TargetHandle& target,
                           std::span<const std::uint8_t> input,
                           const RunOptions& opts = {}) {
  Executor exec(target, opts);
  return exec.run(input);
}

// Missing bytes past the end of the input read as zero.
inline std::uint32_t load_u32_be(std::span<const std::uint8_t> in,
                                 std::size_t pos) {
  std::uint32_t v = 0;
  for (std::size_t i = 0; i < 4; ++i) {
    v = (v << 8) | (pos + i < in.size() ? in[pos + i] : 0u);
  }
  return v;
}

inline std::uint32_t load_u32_le(std::span<const std::uint8_t> in,
                                 std::size_t pos) {
  std::uint32_t v = 0;
  for (std::size_t i = 4; i-- > 0;) {
    v = (v << 8) | (pos + i < in.size() ? in[pos + i] : 0u);
  }
  return v;
}

// A target where bug i fires iff the little-endian u32 at positions[i] equals
// magics[i]. Each bug is guarded by its own site (site i), evaluated in
// order, so only the first matching bug is reported per run.
inline TargetHandle make_lava_target(std::vector<std::uint32_t> magics,
                                     std::vector<std::size_t> positions,
                                     std::size_t max_input_len = 64,
                                     std::string name = "lava") {
  if (magics.size() != positions.size()) {
    throw ConfigError("lava target: magics and positions differ in length");
  }
  if (magics.empty()) throw ConfigError("lava target: no bugs");
  for (std::size_t i = 0; i < magics.size(); ++i) {
    if (positions[i] + 4 > max_input_len) {
      throw ConfigError("lava target: position past max_input_len");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (magics[i] == magics[j]) {
        throw ConfigError("lava target: duplicate magic");
      }
      const std::size_t lo = std::min(positions[i], positions[j]);
      const std::size_t hi = std::max(positions[i], positions[j]);
      if (hi < lo + 4) throw ConfigError("lava target: overlapping positions");
    }
  }
  TargetHandle t;
  t.name = std::move(name);
  t.description = std::to_string(magics.size()) +
                  " independent 4-byte magic comparisons, one bug each";
  t.max_input_len = max_input_len;
  t.site_count = magics.size();
  t.block_count = 1 + 2 * magics.size();
  t.body = [magics = std::move(magics), positions = std::move(positions)](
               ExecutionContext& ctx, std::span<const std::uint8_t> in) {
    ctx.report_block(1);
    for (std::size_t i = 0; i < magics.size(); ++i) {
      const auto site = static_cast<SiteId>(i);
      const auto check = static_cast<BlockId>(2 + 2 * i);
      ctx.report_block(check);
      if (ctx.report_cmp(site, Relation::EQ, load_u32_le(in, positions[i]),
                         magics[i])) {
        ctx.report_block(check + 1);
        ctx.report_bug(static_cast<BugId>(i));
      }
    }
  };
  return t;
}

}  // namespace finch

#endif  // FINCH_TARGET_HPP_
