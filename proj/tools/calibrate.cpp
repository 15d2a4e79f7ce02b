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

// Repeats a campaign over several seeds and reports which bugs each run
// found and when. Used to pick the budgets of the end-to-end checks.
//
//   calibrate --target fig1 --execs 500000 --runs 5 [--mode baseline]
//
// Run i starts from one random input drawn from mt19937_64(1000 + i) and uses
// campaign seed i.

#include <chrono>
#include <cstdio>
#include <iostream>
#include <random>
#include <string>

#include "CLI11.hpp"
#include "finch/campaign.hpp"
#include "finch/engine.hpp"
#include "finch/targets.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Campaign calibration runs"};
  std::string target_name = "fig1", mode_name = "finch";
  std::uint64_t execs = 500000;
  int runs = 5;
  std::size_t seed_len = 0;
  app.add_option("--target", target_name, "Built-in target");
  app.add_option("--execs", execs, "Execution budget per run");
  app.add_option("--runs", runs, "Number of campaign seeds");
  app.add_option("--mode", mode_name, "finch | baseline")
      ->check(CLI::IsMember({"finch", "baseline"}));
  auto* o_len = app.add_option("--seed-len", seed_len,
                               "Initial input length (default 8 for fig1, else up to 64)");
  CLI11_PARSE(app, argc, argv);

  const auto target = finch::find_target(target_name);
  if (!target) {
    std::cerr << "unknown target '" << target_name << "'\n";
    finch::print_targets(std::cerr);
    return 2;
  }
  const finch::Mode mode = mode_name == "baseline" ? finch::Mode::Baseline : finch::Mode::Finch;
  if (o_len->count() == 0) {
    seed_len = target_name == "fig1" ? 8 : std::min<std::size_t>(target->max_input_len, 64);
  }

  for (int i = 0; i < runs; ++i) {
    std::mt19937_64 rng(1000 + static_cast<std::uint64_t>(i));
    finch::Bytes seed(seed_len);
    for (auto& b : seed) b = static_cast<std::uint8_t>(rng());
    finch::EngineConfig cfg;
    cfg.campaign_seed = static_cast<std::uint64_t>(i);

    std::vector<std::pair<finch::BugId, std::uint64_t>> first_seen;
    std::size_t known = 0;
    const auto start = std::chrono::steady_clock::now();
    const auto r = finch::fuzz(mode, *target, std::vector<finch::Bytes>{seed},
                               finch::Budget::Execs(execs), cfg);
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    for (const auto& row : r.stats) {
      while (known < row.crashes_unique && known < r.crash_pool.size()) {
        first_seen.emplace_back(r.crash_pool[known].bug, row.execs);
        ++known;
      }
    }
    std::printf("run %d: %.1fs, %zu generations, %zu bugs:", i, secs, r.trace.size(),
                r.crash_pool.size());
    for (const auto& [bug, at] : first_seen) {
      std::printf(" %u@%llu", bug, static_cast<unsigned long long>(at));
    }
    std::printf("  (pool %zu, edges %zu)\n", r.seed_pool.size(), r.coverage.popcount());
  }
  return 0;
}
