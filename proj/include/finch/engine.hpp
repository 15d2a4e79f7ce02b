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

// Fuzzing loops.
//
// hot_fuzz keeps a min-Pareto seed pool over the just-missed branches, trains
// a fresh model on that pool every generation, and mutates each seed with
// hot-byte walks plus havoc. A mutant enters the pool when no current seed
// dominates it, whether or not it found new coverage.
//
// baseline_fuzz is the classic loop: havoc only, keep mutants with new edges.

#ifndef FINCH_ENGINE_HPP_
#define FINCH_ENGINE_HPP_

#include <algorithm>
#include <cassert>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <string_view>
#include <vector>

#include "finch/common.hpp"
#include "finch/coverage.hpp"
#include "finch/distance.hpp"
#include "finch/model.hpp"
#include "finch/mutator.hpp"
#include "finch/pareto.hpp"
#include "finch/target.hpp"

namespace finch {

enum class Mode : std::uint8_t { Finch, Baseline };

// Virtual time makes stats reproducible: each execution costs a fixed
// nominal time and training costs a fixed time per multiply-add.
enum class ClockMode : std::uint8_t { Virtual, Wall };

inline constexpr double kVirtualSecondsPerExec = 1e-6;
inline constexpr double kVirtualSecondsPerMac = 1e-9;

struct Budget {
  std::uint64_t execs = 0;
  double seconds = 0.0;
  bool timed = false;

  static Budget Execs(std::uint64_t n) { return {n, 0.0, false}; }
  static Budget Seconds(double s) { return {0, s, true}; }
};

struct EngineConfig {
  std::uint64_t campaign_seed = 0;
  RunOptions run;
  NormMode norm = NormMode::Linear;
  ModelConfig model;
  double havoc_ratio = 0.25;
  std::size_t mutant_budget = kDefaultMutantBudget;
  // Havoc mutants per seed when there is no model (baseline mode and
  // degraded generations).
  std::size_t havoc_only_count = 1024;
  // Differentiate each minimized objective separately instead of their sum.
  bool per_objective_gradients = false;
  ClockMode clock = ClockMode::Virtual;
};

struct StatsRow {
  double wall_seconds = 0.0;
  std::uint64_t execs = 0;
  std::size_t edges_covered = 0;
  std::size_t pool_size = 0;
  std::size_t objective_count = 0;
  double training_seconds_cum = 0.0;
  std::size_t crashes_unique = 0;

  friend bool operator==(const StatsRow&, const StatsRow&) = default;
};

// Per-generation bookkeeping of the pool reduction.
struct GenerationTrace {
  std::size_t generation = 0;
  std::size_t objectives = 0;
  std::size_t retained_mutants = 0;  // new seeds accepted this generation
  std::size_t candidates = 0;        // pool + new seeds at merge time
  std::size_t boundary = 0;          // Pareto boundary of the candidates
  std::size_t pool = 0;              // min-Pareto set kept
  // Retained mutants that found no new edge but beat every current seed on
  // some objective.
  std::size_t non_covering_improvements = 0;
  bool degraded = false;             // havoc-only generation
  bool training_diverged = false;
  double first_loss = 0.0;
  double final_loss = 0.0;
};

struct Seed {
  Bytes input;
  DistanceBitmap distances;
  std::vector<std::size_t> minimizes;  // objective indices this seed holds
};

struct Crash {
  Bytes input;
  BugId bug = 0;
  friend bool operator==(const Crash&, const Crash&) = default;
};

struct CampaignResult {
  std::vector<Seed> seed_pool;
  std::vector<Crash> crash_pool;
  std::vector<StatsRow> stats;
  std::vector<GenerationTrace> trace;
  std::vector<SiteId> objectives;
  CoverageBitmap coverage;
  BranchCoverage branches;
  std::uint64_t execs = 0;
  std::uint64_t hangs = 0;
  std::uint64_t truncated = 0;
  std::size_t degraded_generations = 0;
  std::size_t diverged_trainings = 0;
};

struct EngineHooks {
  std::function<void(const StatsRow&)> on_stats;
  std::function<void(std::size_t generation, const Bytes&)> on_mutant;
};

// Appends `c` iff its bug id is new. Returns true when appended.
inline bool dedup_crash(std::vector<Crash>& pool, Crash c) {
  for (const auto& known : pool) {
    if (known.bug == c.bug) return false;
  }
  pool.push_back(std::move(c));
  return true;
}

namespace detail {

inline std::uint64_t derive_seed(std::uint64_t campaign, std::uint64_t a,
                                 std::uint64_t b) {
  std::seed_seq seq{static_cast<std::uint32_t>(campaign),
                    static_cast<std::uint32_t>(campaign >> 32),
                    static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b)};
  std::uint32_t out[2];
  seq.generate(std::begin(out), std::end(out));
  return (std::uint64_t{out[0]} << 32) | out[1];
}

// Min-Pareto reduction of `seeds` under `objectives`. Seeds that reach none
// of the objectives are dropped before the boundary is computed.
inline std::vector<Seed> minimize_pool(std::vector<Seed> seeds,
                                       std::span<const SiteId> objectives,
                                       std::uint64_t k,
                                       GenerationTrace* trace = nullptr) {
  std::vector<Scored<std::size_t>> scored;
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    auto f = project(seeds[i].distances, objectives);
    if (all_unvisited(f, k)) continue;
    scored.push_back({i, std::move(f), {}});
  }
  auto boundary = pareto_boundary(std::move(scored));
  if (trace) trace->boundary = boundary.size();
  auto kept = min_pareto_set(std::move(boundary));
  std::vector<Seed> out;
  out.reserve(kept.size());
  for (auto& s : kept) {
    Seed seed = std::move(seeds[s.item]);
    seed.minimizes = std::move(s.minimizes);
    out.push_back(std::move(seed));
  }
  return out;
}

class Campaign {
 public:
  Campaign(const TargetHandle& target, const EngineConfig& cfg, Budget budget,
           EngineHooks hooks)
      : cfg_(cfg), budget_(budget), hooks_(std::move(hooks)),
        exec_(target, cfg.run), start_(std::chrono::steady_clock::now()) {
    result_.coverage = CoverageBitmap(cfg.run.map_size);
    result_.branches = BranchCoverage(target.site_count);
  }

  CampaignResult hot_fuzz(std::span<const Bytes> t0) {
    std::vector<Seed> initial = execute_initial(t0);
    result_.objectives = just_missed(bitmaps(initial), result_.branches);
    pool_ = minimize_pool(initial, result_.objectives, k());
    if (pool_.empty()) pool_ = std::move(initial);
    emit_stats();

    for (std::size_t gen = 1; !pool_.empty() && !exhausted(); ++gen) {
      GenerationTrace tr;
      tr.generation = gen;
      tr.objectives = result_.objectives.size();
      finch_generation(gen, tr);
      result_.trace.push_back(tr);
      emit_stats();
    }
    return finish();
  }

  CampaignResult baseline_fuzz(std::span<const Bytes> t0) {
    CoverageBitmap seen(cfg_.run.map_size);
    for (const Bytes& t : t0) {
      const Bytes input = clip(t);
      const ExecutionResult& r = run_one(input);
      if (r.outcome == Outcome::Hang) continue;
      const bool fresh = seen.has_new_bits(r.coverage);
      seen.merge(r.coverage);
      absorb_coverage(r);
      if (r.outcome == Outcome::Crash) {
        dedup_crash(result_.crash_pool, {input, r.bug});
      } else if (fresh) {
        pool_.push_back({input, r.distances, {}});
      }
    }
    mutant_execs_ = 0;
    result_.objectives = just_missed(bitmaps(pool_), result_.branches);
    emit_stats();

    for (std::size_t gen = 1; !pool_.empty() && !exhausted(); ++gen) {
      GenerationTrace tr;
      tr.generation = gen;
      tr.degraded = true;
      std::vector<Seed> fresh;
      for (std::size_t s = 0; s < pool_.size() && !exhausted(); ++s) {
        Havoc havoc(exec_.target().max_input_len,
                    derive_seed(cfg_.campaign_seed, gen, s));
        for (std::size_t i = 0; i < cfg_.havoc_only_count && !exhausted(); ++i) {
          Bytes m = havoc.mutate(pool_[s].input);
          if (hooks_.on_mutant) hooks_.on_mutant(gen, m);
          const ExecutionResult& r = run_one(m);
          if (r.outcome == Outcome::Hang) continue;
          const bool new_edges = absorb_coverage(r).first;
          if (r.outcome == Outcome::Crash) {
            dedup_crash(result_.crash_pool, {std::move(m), r.bug});
          } else if (new_edges) {
            fresh.push_back({std::move(m), r.distances, {}});
          }
        }
      }
      tr.retained_mutants = fresh.size();
      for (auto& s : fresh) pool_.push_back(std::move(s));
      result_.objectives = just_missed(bitmaps(pool_), result_.branches);
      tr.objectives = result_.objectives.size();
      tr.candidates = tr.boundary = tr.pool = pool_.size();
      result_.trace.push_back(tr);
      emit_stats();
    }
    return finish();
  }

 private:
  std::uint64_t k() const { return cfg_.run.max_distance; }

  template <class Seeds>
  static std::vector<DistanceBitmap> bitmaps(const Seeds& seeds) {
    std::vector<DistanceBitmap> out;
    out.reserve(seeds.size());
    for (const auto& s : seeds) out.push_back(s.distances);
    return out;
  }

  Bytes clip(const Bytes& t) {
    if (t.size() <= exec_.target().max_input_len) return t;
    ++result_.truncated;
    return Bytes(t.begin(), t.begin() + static_cast<std::ptrdiff_t>(
                                             exec_.target().max_input_len));
  }

  const ExecutionResult& run_one(const Bytes& input) {
    ++result_.execs;
    ++mutant_execs_;
    const ExecutionResult& r = exec_.run(input);
    if (r.truncated) ++result_.truncated;
    if (r.outcome == Outcome::Hang) ++result_.hangs;
    return r;
  }

  // Merges a run into global coverage; returns {new edges, new outcomes}.
  std::pair<bool, std::size_t> absorb_coverage(const ExecutionResult& r) {
    const bool fresh = result_.coverage.has_new_bits(r.coverage);
    if (fresh) result_.coverage.merge(r.coverage);
    return {fresh, result_.branches.merge(r.branches)};
  }

  std::vector<Seed> execute_initial(std::span<const Bytes> t0) {
    std::vector<Seed> seeds;
    for (const Bytes& t : t0) {
      const Bytes input = clip(t);
      const ExecutionResult& r = run_one(input);
      if (r.outcome == Outcome::Hang) continue;
      absorb_coverage(r);
      if (r.outcome == Outcome::Crash) {
        dedup_crash(result_.crash_pool, {input, r.bug});
      } else {
        seeds.push_back({input, r.distances, {}});
      }
    }
    mutant_execs_ = 0;  // the initial corpus does not count against the budget
    return seeds;
  }

  bool exhausted() const {
    if (budget_.timed) {
      const std::chrono::duration<double> el =
          std::chrono::steady_clock::now() - start_;
      return el.count() >= budget_.seconds;
    }
    return mutant_execs_ >= budget_.execs;
  }

  void finch_generation(std::size_t gen, GenerationTrace& tr) {
    const std::vector<SiteId>& objectives = result_.objectives;
    std::optional<Model> model;
    if (!objectives.empty()) {
      std::vector<std::pair<Bytes, DistanceBitmap>> labeled;
      for (const auto& s : pool_) labeled.emplace_back(s.input, s.distances);
      const auto data = build_training_set(labeled, objectives, cfg_.norm);
      ModelConfig mc = cfg_.model;
      mc.rng_seed = derive_seed(cfg_.campaign_seed, gen, ~0ull);
      const auto t_start = std::chrono::steady_clock::now();
      TrainResult trained = train(data, mc);
      const std::chrono::duration<double> t_el =
          std::chrono::steady_clock::now() - t_start;
      training_seconds_ += cfg_.clock == ClockMode::Virtual
                               ? static_cast<double>(trained.multiply_adds) *
                                     kVirtualSecondsPerMac
                               : t_el.count();
      tr.first_loss = trained.first_loss;
      tr.final_loss = trained.final_loss;
      if (trained.diverged) {
        tr.training_diverged = true;
        ++result_.diverged_trainings;
      }
      if (trained.epochs_run > 0) model.emplace(std::move(trained.model));
    }
    tr.degraded = !model.has_value();
    if (tr.degraded) ++result_.degraded_generations;

    // Scores of the current pool, frozen for this generation.
    std::vector<std::vector<std::uint64_t>> pool_f;
    std::vector<std::uint64_t> best(objectives.size(), UINT64_MAX);
    std::set<std::vector<std::uint64_t>> seen_f;
    for (const auto& s : pool_) {
      pool_f.push_back(project(s.distances, objectives));
      for (std::size_t i = 0; i < objectives.size(); ++i) {
        best[i] = std::min(best[i], pool_f.back()[i]);
      }
      seen_f.insert(pool_f.back());
    }
    std::set<SiteId> pending_sites;
    std::vector<Seed> fresh;

    auto consider = [&](Bytes&& m) {
      if (hooks_.on_mutant) hooks_.on_mutant(gen, m);
      const ExecutionResult& r = run_one(m);
      if (r.outcome == Outcome::Hang) return;
      const auto [new_edges, new_outcomes] = absorb_coverage(r);
      if (r.outcome == Outcome::Crash) {
        dedup_crash(result_.crash_pool, {std::move(m), r.bug});
        return;
      }
      if (tr.degraded) {
        if (new_edges || new_outcomes > 0) {
          fresh.push_back({std::move(m), r.distances, {}});
        }
        return;
      }
      bool reaches_new = false;
      for (const auto& e : r.distances.entries()) {
        if (std::binary_search(objectives.begin(), objectives.end(), e.site) ||
            result_.branches.fully_covered(e.site) ||
            pending_sites.count(e.site)) {
          continue;
        }
        reaches_new = true;
        pending_sites.insert(e.site);
      }
      auto f = project(r.distances, objectives);
      bool accept = reaches_new;
      if (!accept && !all_unvisited(f, k()) && !seen_f.count(f)) {
        accept = std::none_of(pool_f.begin(), pool_f.end(),
                              [&](const auto& p) { return dominates(p, f); });
      }
      if (!accept) return;
      bool improves = false;
      for (std::size_t i = 0; i < f.size(); ++i) improves |= f[i] < best[i];
      if (improves && !new_edges) ++tr.non_covering_improvements;
      seen_f.insert(std::move(f));
      fresh.push_back({std::move(m), r.distances, {}});
    };

    for (std::size_t s = 0; s < pool_.size() && !exhausted(); ++s) {
      const Seed& seed = pool_[s];
      std::size_t hot_emitted = 0;
      if (model) {
        const auto x = scale_bytes(seed.input, model->in_dim());
        std::vector<std::vector<std::size_t>> subsets;
        if (cfg_.per_objective_gradients && seed.minimizes.size() > 1) {
          for (std::size_t j : seed.minimizes) subsets.push_back({j});
        } else {
          subsets.push_back(seed.minimizes);  // empty means all outputs
        }
        const std::size_t share =
            std::max<std::size_t>(1, cfg_.mutant_budget / subsets.size());
        for (const auto& subset : subsets) {
          const auto g = model->input_gradients(x, subset);
          HotByteMutator hot(seed.input, g, share);
          Bytes m;
          while (!exhausted() && hot.next(m)) {
            ++hot_emitted;
            consider(std::move(m));
          }
        }
      }
      // Seeds with a flat gradient get the havoc-only share.
      const std::size_t havoc_count =
          hot_emitted > 0
              ? static_cast<std::size_t>(
                    std::ceil(cfg_.havoc_ratio * static_cast<double>(hot_emitted)))
              : std::max<std::size_t>(cfg_.havoc_only_count, 1);
      Havoc havoc(exec_.target().max_input_len,
                  derive_seed(cfg_.campaign_seed, gen, s));
      for (std::size_t i = 0; i < havoc_count && !exhausted(); ++i) {
        consider(havoc.mutate(seed.input));
      }
    }

    tr.retained_mutants = fresh.size();
    std::vector<Seed> all = std::move(pool_);
    for (auto& s : fresh) all.push_back(std::move(s));
    tr.candidates = all.size();
    result_.objectives = just_missed(bitmaps(all), result_.branches);
    std::vector<Seed> kept =
        minimize_pool(all, result_.objectives, k(), &tr);
    if (kept.empty()) {
      tr.boundary = all.size();
      kept = std::move(all);
    }
#ifndef NDEBUG
    {
      const auto again = minimize_pool(kept, result_.objectives, k());
      assert(kept.empty() || again.size() == kept.size() ||
             result_.objectives.empty());
    }
#endif
    pool_ = std::move(kept);
    tr.pool = pool_.size();
  }

  void emit_stats() {
    StatsRow row;
    row.execs = result_.execs;
    if (!result_.stats.empty() && result_.stats.back().execs == row.execs) return;
    row.training_seconds_cum = training_seconds_;
    if (cfg_.clock == ClockMode::Virtual) {
      row.wall_seconds = static_cast<double>(result_.execs) * kVirtualSecondsPerExec +
                         training_seconds_;
    } else {
      const std::chrono::duration<double> el =
          std::chrono::steady_clock::now() - start_;
      row.wall_seconds = el.count();
    }
    row.edges_covered = result_.coverage.popcount();
    row.pool_size = pool_.size();
    row.objective_count = result_.objectives.size();
    row.crashes_unique = result_.crash_pool.size();
    result_.stats.push_back(row);
    if (hooks_.on_stats) hooks_.on_stats(row);
  }

  CampaignResult finish() {
    result_.seed_pool = std::move(pool_);
    return std::move(result_);
  }

  EngineConfig cfg_;
  Budget budget_;
  EngineHooks hooks_;
  Executor exec_;
  std::chrono::steady_clock::time_point start_;
  CampaignResult result_;
  std::vector<Seed> pool_;
  std::uint64_t mutant_execs_ = 0;
  double training_seconds_ = 0.0;
};

}  // namespace detail

inline CampaignResult hot_fuzz(const TargetHandle& target,
                               std::span<const Bytes> t0, Budget budget,
                               const EngineConfig& cfg = {},
                               EngineHooks hooks = {}) {
  if (t0.empty()) throw ConfigError("hot_fuzz: empty initial corpus");
  return detail::Campaign(target, cfg, budget, std::move(hooks)).hot_fuzz(t0);
}

inline CampaignResult baseline_fuzz(const TargetHandle& target,
                                    std::span<const Bytes> t0, Budget budget,
                                    const EngineConfig& cfg = {},
                                    EngineHooks hooks = {}) {
  if (t0.empty()) throw ConfigError("baseline_fuzz: empty initial corpus");
  return detail::Campaign(target, cfg, budget, std::move(hooks))
      .baseline_fuzz(t0);
}

inline CampaignResult fuzz(Mode mode, const TargetHandle& target,
                           std::span<const Bytes> t0, Budget budget,
                           const EngineConfig& cfg = {}, EngineHooks hooks = {}) {
  return mode == Mode::Finch
             ? hot_fuzz(target, t0, budget, cfg, std::move(hooks))
             : baseline_fuzz(target, t0, budget, cfg, std::move(hooks));
}

inline std::string_view to_string(Mode m) {
  return m == Mode::Finch ? "finch" : "baseline";
}

}  // namespace finch

#endif  // FINCH_ENGINE_HPP_
