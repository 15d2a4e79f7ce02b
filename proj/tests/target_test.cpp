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

#include "finch/target.hpp"

#include <gtest/gtest.h>

#include <random>
#include <vector>

#include "finch/targets.hpp"

namespace finch {
namespace {

constexpr std::uint64_t K = kDefaultMaxDistance;

std::vector<std::uint64_t> distance_vector(const ExecutionResult& r,
                                           std::size_t sites) {
  std::vector<std::uint64_t> f;
  for (SiteId s = 0; s < sites; ++s) f.push_back(r.distances.get(s));
  return f;
}

// Sites 0..3 of fig1 are the four branches labeled 1..4 in the worked example.
TEST(Fig1Test, FirstExampleInput) {
  const auto t = targets::fig1();
  const auto r = run(t, Bytes{1, 1, 1, 0x0a, 0, 0, 0, 0});
  EXPECT_EQ(r.outcome, Outcome::Ok);
  EXPECT_EQ(distance_vector(r, 4),
            (std::vector<std::uint64_t>{5, K, K, 3702242522u}));
  EXPECT_EQ(r.distances.size(), 2u);  // only visited sites are stored
}

TEST(Fig1Test, SecondExampleInput) {
  const auto t = targets::fig1();
  const auto r = run(t, Bytes{0x6f, 0x56, 0xdf, 0x75, 0, 0, 0, 0});
  EXPECT_EQ(r.outcome, Outcome::Ok);
  EXPECT_EQ(distance_vector(r, 4), (std::vector<std::uint64_t>{529, K, K, 4}));
}

TEST(Fig1Test, RecordsEdgesBetweenBlockLocations) {
  const auto r = run(targets::fig1(), Bytes{1, 1, 1, 0x0a, 0, 0, 0, 0});
  // Checksum fails: blocks 1, 2, 6, 8.
  const BlockId path[] = {kEntryBlock, 1, 2, 6, 8};
  CoverageBitmap expected;
  for (std::size_t i = 1; i < std::size(path); ++i) {
    expected.set(edge_id(block_location(path[i - 1]), block_location(path[i]),
                         expected.map_size()));
  }
  EXPECT_EQ(r.coverage.popcount(), 4u);
  EXPECT_FALSE(expected.has_new_bits(r.coverage));
  EXPECT_FALSE(r.coverage.has_new_bits(expected));
}

TEST(Fig1Test, MagicTriggersBugTwo) {
  const auto t = targets::fig1();
  const auto r = run(t, Bytes{0x6f, 0x56, 0xdf, 0x77, 0, 0, 0, 0});
  EXPECT_EQ(r.outcome, Outcome::Crash);
  EXPECT_EQ(r.bug, 2u);
  EXPECT_EQ(r.distances.get(3), 0u);
  // 0xef56df77 * 2 wraps to the magic in 32 bits but not in 64.
  EXPECT_EQ(run(t, Bytes{0xef, 0x56, 0xdf, 0x77}).outcome, Outcome::Ok);
}

TEST(Fig1Test, ChecksumPathReachesBugOne) {
  const auto t = targets::fig1();
  const auto r = run(t, Bytes{2, 2, 2, 2, 'F', 'Z', 0, 0});
  EXPECT_EQ(r.outcome, Outcome::Crash);
  EXPECT_EQ(r.bug, 1u);
  const auto near = run(t, Bytes{2, 2, 2, 2, 'F', 'A'});
  EXPECT_EQ(near.outcome, Outcome::Ok);
  EXPECT_EQ(near.distances.get(2), static_cast<std::uint64_t>('Z' - 'A'));
}

TEST(LavaTargetTest, ExactMatchCrashes) {
  const auto t = make_lava_target({0xdeadbeef}, {0}, 8);
  const auto r = run(t, Bytes{0xef, 0xbe, 0xad, 0xde});
  EXPECT_EQ(r.outcome, Outcome::Crash);
  EXPECT_EQ(r.bug, 0u);
}

TEST(LavaTargetTest, ZeroInputReportsMagicAsDistance) {
  const auto t = make_lava_target({0xdeadbeef}, {0}, 8);
  const auto r = run(t, Bytes(8, 0));
  EXPECT_EQ(r.outcome, Outcome::Ok);
  EXPECT_EQ(r.distances.get(0), 0xdeadbeefu);
}

TEST(LavaTargetTest, OnlyFirstMatchingBugIsReported) {
  const auto t = make_lava_target({0x01020304, 0x0a0b0c0d}, {0, 4}, 8);
  const auto r = run(t, Bytes{4, 3, 2, 1, 0x0d, 0x0c, 0x0b, 0x0a});
  EXPECT_EQ(r.outcome, Outcome::Crash);
  EXPECT_EQ(r.bug, 0u);
  EXPECT_FALSE(r.distances.visited(1));
  EXPECT_EQ(run(t, Bytes{0, 0, 0, 0, 0x0d, 0x0c, 0x0b, 0x0a}).bug, 1u);
}

TEST(LavaTargetTest, RejectsBadLayouts) {
  EXPECT_THROW(make_lava_target({1, 2}, {0, 3}, 16), ConfigError);  // overlap
  EXPECT_THROW(make_lava_target({1, 1}, {0, 8}, 16), ConfigError);  // duplicate
  EXPECT_THROW(make_lava_target({1}, {14}, 16), ConfigError);       // past end
  EXPECT_THROW(make_lava_target({1, 2}, {0}, 16), ConfigError);
  EXPECT_NO_THROW(make_lava_target({1, 2}, {0, 4}, 8));
}

TEST(BuiltinTargetsTest, RegistryContents) {
  std::vector<std::string> names;
  for (const auto& t : builtin_targets()) names.push_back(t.name);
  for (const char* want : {"fig1", "lava8", "nested", "lenfield"}) {
    EXPECT_NE(std::find(names.begin(), names.end(), want), names.end()) << want;
  }
  EXPECT_TRUE(find_target("fig1").has_value());
  EXPECT_FALSE(find_target("nope").has_value());
}

TEST(BuiltinTargetsTest, EmptyInputIsHarmless) {
  for (const auto& t : builtin_targets()) {
    const auto r = run(t, Bytes{});
    EXPECT_TRUE(r.outcome == Outcome::Ok || r.outcome == Outcome::Hang) << t.name;
  }
}

TEST(BuiltinTargetsTest, LavaEightLayout) {
  const auto t = targets::lava8();
  EXPECT_EQ(t.site_count, 8u);
  const auto r = run(t, Bytes(64, 0));
  EXPECT_EQ(r.outcome, Outcome::Ok);
  for (SiteId s = 0; s < 8; ++s) {
    EXPECT_EQ(r.distances.get(s), targets::kLava8Magics[s]);
  }
  Bytes hit(64, 0);
  const std::size_t pos = targets::kLava8Positions[5];
  const std::uint32_t magic = targets::kLava8Magics[5];
  for (int i = 0; i < 4; ++i) hit[pos + i] = static_cast<std::uint8_t>(magic >> (8 * i));
  EXPECT_EQ(run(t, hit).bug, 5u);
}

TEST(NestedTest, ZeroInputStopsAtFirstCheck) {
  // in[0] = 0 fails `in[0] > 0xc0`, so sites 1..3 are never evaluated.
  const auto r = run(targets::nested(), Bytes(16, 0));
  EXPECT_TRUE(r.distances.visited(0));
  EXPECT_EQ(r.distances.get(0), 0xc0u);
  EXPECT_FALSE(r.distances.visited(1));
  EXPECT_FALSE(r.distances.visited(3));
}

TEST(NestedTest, AllChecksPassedReachesBug) {
  const Bytes in{0xc1, 0, 0xa0, 0x00, 0, 0, 0x0f, 0xff,
                 0xff, 0xff, 0x00, 0x01, 0, 0, 0, 0};
  const auto r = run(targets::nested(), in);
  EXPECT_EQ(r.outcome, Outcome::Crash);
  EXPECT_EQ(r.bug, 0u);
}

TEST(LenfieldTest, WellFormedRecordsAreFine) {
  // data record of 3 bytes, then a copy {offset 1, count 2}
  const Bytes in{'L', 'F', 1, 3, 'a', 'b', 'c', 2, 2, 1, 2};
  const auto r = run(targets::lenfield(), in);
  EXPECT_EQ(r.outcome, Outcome::Ok);
  EXPECT_EQ(r.distances.get(6), 0u);  // offset + count == stored
}

TEST(LenfieldTest, CopyPastStoredDataIsOutOfBounds) {
  const Bytes in{'L', 'F', 1, 3, 'a', 'b', 'c', 2, 2, 1, 3};
  const auto r = run(targets::lenfield(), in);
  EXPECT_EQ(r.outcome, Outcome::Crash);
  EXPECT_EQ(r.bug, 0u);
}

TEST(LenfieldTest, BadMagicVisitsOnlyTheHeaderCheck) {
  const auto r = run(targets::lenfield(), Bytes{'L', 'G', 1, 0});
  EXPECT_EQ(r.distances.size(), 1u);
  EXPECT_EQ(r.distances.get(0), 1u);
}

TEST(HarnessTest, EventBudgetTurnsLoopsIntoHangs) {
  TargetHandle spin;
  spin.name = "spin";
  spin.site_count = 1;
  spin.body = [](ExecutionContext& ctx, std::span<const std::uint8_t>) {
    for (;;) ctx.report_block(1);
  };
  RunOptions opts;
  opts.event_budget = 1000;
  EXPECT_EQ(run(spin, Bytes{1}, opts).outcome, Outcome::Hang);
}

TEST(HarnessTest, OpaqueComparisonsRecordZeroDistance) {
  TargetHandle t;
  t.site_count = 1;
  t.body = [](ExecutionContext& ctx, std::span<const std::uint8_t> in) {
    const double v = in.empty() ? 0.0 : in[0] / 3.0;
    ctx.report_opaque(0, v > 10.0);
  };
  const auto r = run(t, Bytes{9});
  EXPECT_TRUE(r.distances.visited(0));
  EXPECT_EQ(r.distances.get(0), 0u);
  EXPECT_TRUE(r.branches.covered(0, false));
}

TEST(HarnessTest, LongInputsAreTruncated) {
  TargetHandle t;
  t.max_input_len = 4;
  std::size_t seen = 0;
  t.body = [&seen](ExecutionContext&, std::span<const std::uint8_t> in) {
    seen = in.size();
  };
  const auto r = run(t, Bytes(10, 1));
  EXPECT_TRUE(r.truncated);
  EXPECT_EQ(seen, 4u);
}

TEST(HarnessTest, XorModeReachesTheTarget) {
  RunOptions opts;
  opts.distance_mode = DistanceMode::Xor;
  const auto r = run(targets::fig1(), Bytes{1, 1, 1, 0x0a, 0, 0, 0, 0}, opts);
  EXPECT_EQ(r.distances.get(0), 13u ^ 8u);
}

class DeterminismTest : public ::testing::TestWithParam<std::string> {};

TEST_P(DeterminismTest, RepeatedAndInterleavedRunsAgree) {
  const auto t = *find_target(GetParam());
  std::mt19937_64 rng(21);
  std::vector<Bytes> inputs;
  for (int i = 0; i < 1000; ++i) {
    Bytes b(rng() % (t.max_input_len + 1));
    for (auto& x : b) x = static_cast<std::uint8_t>(rng());
    if (t.name == "lenfield" && b.size() >= 2 && i % 2 == 0) {
      b[0] = 'L';
      b[1] = 'F';
    }
    inputs.push_back(std::move(b));
  }
  std::vector<ExecutionResult> first;
  for (const auto& in : inputs) first.push_back(run(t, in));
  Executor shared(t);
  std::vector<std::size_t> order(inputs.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  for (std::size_t i : order) {
    ASSERT_EQ(shared.run(inputs[i]), first[i]) << "input " << i;
  }
}

INSTANTIATE_TEST_SUITE_P(Builtins, DeterminismTest,
                         ::testing::Values("fig1", "lava8", "nested", "lenfield"));

}  // namespace
}  // namespace finch
