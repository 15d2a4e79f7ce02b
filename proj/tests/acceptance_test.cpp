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

// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero if any fails.
//
// Budgets for the end-to-end comparison were frozen after reference runs of
// this code: fig1 finch found bug 2 in 5/5 campaigns at 5e5 executions
// (first crash at 14k-43k), baseline in 0/5; lava8 finch found 8/8 bugs in
// every 2e6-execution campaign, baseline 0/8.

#include <unistd.h>

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "finch/campaign.hpp"
#include "finch/coverage.hpp"
#include "finch/distance.hpp"
#include "finch/engine.hpp"
#include "finch/model.hpp"
#include "finch/mutator.hpp"
#include "finch/pareto.hpp"
#include "finch/target.hpp"
#include "finch/targets.hpp"
#include "reference_network.hpp"

namespace finch {
namespace {

constexpr std::uint64_t K = kDefaultMaxDistance;

struct Verdict {
  bool ok = true;
  std::string detail;

  void require(bool cond, const std::string& what) {
    if (!cond && ok) {
      ok = false;
      detail = what;
    }
  }
};

double seconds_since(std::chrono::steady_clock::time_point t) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count();
}

Verdict distance_vectors() {
  Verdict v;
  const auto start = std::chrono::steady_clock::now();
  const auto t = targets::fig1();
  const std::vector<SiteId> sites{0, 1, 2, 3};
  const auto a = project(run(t, Bytes{1, 1, 1, 0x0a, 0, 0, 0, 0}).distances, sites);
  const auto b = project(run(t, Bytes{0x6f, 0x56, 0xdf, 0x75, 0, 0, 0, 0}).distances, sites);
  v.require(a == std::vector<std::uint64_t>{5, K, K, 3702242522u}, "first input");
  v.require(b == std::vector<std::uint64_t>{529, K, K, 4}, "second input");
  v.require(seconds_since(start) < 1.0, "slower than 1 s");
  return v;
}

using Named = Scored<std::size_t>;

bool covers(const std::vector<Named>& all, const std::vector<Named>& chosen) {
  const std::size_t n = all.front().fvec.size();
  for (std::size_t i = 0; i < n; ++i) {
    std::uint64_t best = UINT64_MAX;
    for (const auto& s : all) best = std::min(best, s.fvec[i]);
    bool hit = false;
    for (const auto& s : chosen) hit |= s.fvec[i] == best;
    if (!hit) return false;
  }
  return true;
}

Verdict min_pareto_oracle() {
  Verdict v;
  const auto start = std::chrono::steady_clock::now();
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 10000 && v.ok; ++trial) {
    const std::size_t seeds = 1 + rng() % 8, objs = 1 + rng() % 5;
    std::vector<Named> pool;
    for (std::size_t k = 0; k < seeds; ++k) {
      std::vector<std::uint64_t> f(objs);
      for (auto& x : f) x = rng() % 21;
      pool.push_back({k, f, {}});
    }
    const auto boundary = pareto_boundary(pool);
    const auto s = min_pareto_set(boundary);
    v.require(covers(pool, s), "cover property");
    std::set<std::size_t> in_boundary;
    for (const auto& b : boundary) in_boundary.insert(b.item);
    for (const auto& m : s) v.require(in_boundary.count(m.item) > 0, "not a boundary subset");
    std::vector<std::size_t> once, twice;
    for (const auto& m : s) once.push_back(m.item);
    for (const auto& m : min_pareto_set(s)) twice.push_back(m.item);
    v.require(once == twice, "not idempotent");
  }
  v.require(seconds_since(start) < 60.0, "slower than 60 s");
  return v;
}

Verdict dominance_laws() {
  Verdict v;
  std::mt19937_64 rng(3);
  std::size_t violations = 0;
  for (int trial = 0; trial < 100000; ++trial) {
    const std::size_t n = 1 + rng() % 5;
    std::vector<std::uint64_t> a(n), b(n), c(n);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = rng() % 4;
      b[i] = rng() % 4;
      c[i] = rng() % 4;
    }
    violations += dominates(a, a);
    violations += dominates(a, b) && dominates(b, c) && !dominates(a, c);
  }
  v.require(violations == 0, std::to_string(violations) + " violations");
  return v;
}

Verdict gradients() {
  using testing::close;
  using testing::Reference;
  using testing::widen;
  Verdict v;
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0), c(-0.5, 0.5);
  const long double h = 1e-4L;
  std::size_t checked = 0;
  for (int net = 0; net < 100 && v.ok; ++net) {
    const std::size_t in = 1 + rng() % 16, hidden = 1 + rng() % 8, out = 1 + rng() % 4;
    Model m = Model::random(in, hidden, out, rng());
    for (double& b : m.b1()) b = c(rng);
    for (double& b : m.b2()) b = c(rng);
    std::vector<double> x(in), y(out);
    for (double& e : x) e = u(rng);
    for (double& e : y) e = u(rng) < 0.25 ? 1.0 : 0.99 * u(rng);
    y[0] = 1.0;  // at least one masked output

    const Reference ref = Reference::of(m);
    std::vector<bool> pattern;
    ref.forward(widen(x), &pattern);

    std::vector<double> grad(m.parameters().size(), 0.0);
    const double loss = m.accumulate_gradients(x, y, grad);
    for (std::size_t k = 0; k < grad.size() && v.ok; ++k) {
      Reference plus = ref, minus = ref;
      plus.p[k] += h;
      minus.p[k] -= h;
      std::vector<bool> pp, pm;
      plus.forward(widen(x), &pp);
      minus.forward(widen(x), &pm);
      if (pp != pattern || pm != pattern) continue;
      const long double fd = (plus.loss(widen(x), y) - minus.loss(widen(x), y)) / (2 * h);
      if (std::fabs(grad[k]) <= 1e-6 && std::fabs(fd) <= 1e-6L) continue;
      v.require(close(grad[k], fd), "parameter gradient, net " + std::to_string(net));
      ++checked;
    }

    const auto g = m.input_gradients(x, {});
    for (std::size_t i = 0; i < in && v.ok; ++i) {
      auto xp = widen(x), xm = widen(x);
      xp[i] += h;
      xm[i] -= h;
      std::vector<bool> pp, pm;
      const auto yp = ref.forward(xp, &pp), ym = ref.forward(xm, &pm);
      if (pp != pattern || pm != pattern || std::fabs(g[i]) <= 1e-6) continue;
      long double fd = 0;
      for (std::size_t o = 0; o < out; ++o) fd += (yp[o] - ym[o]) / (2 * h);
      v.require(close(g[i], fd), "input gradient, net " + std::to_string(net));
      ++checked;
    }

    // The masked output's bias only moves the masked prediction.
    Model moved = m;
    moved.b2()[0] += 0.9;
    std::vector<double> grad2(grad.size(), 0.0);
    const double loss2 = moved.accumulate_gradients(x, y, grad2);
    v.require(loss2 == loss && grad2 == grad, "masked output leaks");
    v.require(grad[grad.size() - out] == 0.0, "masked bias gradient nonzero");
  }
  v.require(checked > 1000, "too few coordinates checked");
  return v;
}

Verdict hot_byte_walks() {
  Verdict v;
  const Bytes t{1, 1, 1, 0x0a, 0, 0, 0, 0};
  const std::vector<double> g{0.5, 0.5, 0.5, 0.9, 0, 0, 0, 0};
  auto drain = [](HotByteTrajectory w) {
    std::vector<Bytes> out;
    Bytes m;
    while (w.next(m)) out.push_back(m);
    return out;
  };
  const auto up = drain(hot_byte_trajectory(t, g, {2, 3}, +1));
  const auto down = drain(hot_byte_trajectory(t, g, {2, 3}, -1));
  v.require(!up.empty() && up.front() == Bytes{1, 1, 2, 0x0b, 0, 0, 0, 0}, "first upward step");
  v.require(!up.empty() && up.back() == Bytes{1, 1, 0xff, 0xff, 0, 0, 0, 0}, "upward end");
  v.require(!down.empty() && down.back() == Bytes{1, 1, 0, 0, 0, 0, 0, 0}, "downward end");
  for (const auto* walk : {&up, &down}) {
    for (const auto& m : *walk) {
      for (std::size_t i : {0u, 1u, 4u, 5u, 6u, 7u}) v.require(m[i] == t[i], "other byte moved");
    }
  }

  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 1000 && v.ok; ++trial) {
    Bytes s(1 + rng() % 64);
    for (auto& b : s) b = static_cast<std::uint8_t>(rng());
    std::vector<double> gr(s.size());
    for (double& e : gr) e = rng() % 3 == 0 ? 0.0 : static_cast<double>(rng() % 2001) / 1000 - 1;
    for (auto [lo, hi] : hot_byte_ranges(s.size())) {
      const auto locs = top(gr, lo, hi);
      for (int dir : {-1, +1}) {
        auto walk = hot_byte_trajectory(s, gr, locs, dir);
        Bytes m;
        std::size_t steps = 0;
        while (walk.next(m) && steps <= 255) ++steps;
        v.require(steps <= 255, "walk exceeded 255 steps");
      }
    }
  }
  return v;
}

Verdict edge_ids() {
  Verdict v;
  std::mt19937_64 rng(6);
  for (int i = 0; i < 10000; ++i) {
    const std::uint32_t map_size = 1u << (6 + rng() % 15);
    const auto x = static_cast<BlockId>(rng());
    const auto y = static_cast<BlockId>(rng());
    const std::uint64_t expected = ((std::uint64_t{x} / 2) ^ y) % map_size;
    v.require(edge_id(x, y, map_size) == expected, "mismatch at pair " + std::to_string(i));
  }
  return v;
}

Bytes random_bytes(std::uint64_t seed, std::size_t len) {
  std::mt19937_64 rng(seed);
  Bytes b(len);
  for (auto& e : b) e = static_cast<std::uint8_t>(rng());
  return b;
}

std::size_t bugs_found(Mode mode, const TargetHandle& t, const Bytes& seed,
                       std::uint64_t execs, std::uint64_t campaign_seed,
                       std::optional<BugId> only = std::nullopt) {
  EngineConfig cfg;
  cfg.campaign_seed = campaign_seed;
  const auto r = fuzz(mode, t, std::vector<Bytes>{seed}, Budget::Execs(execs), cfg);
  std::size_t n = 0;
  for (const auto& c : r.crash_pool) n += !only || c.bug == *only;
  return n;
}

Verdict end_to_end(std::string& summary) {
  Verdict v;
  const auto fig1 = targets::fig1();
  std::size_t finch_hits = 0, baseline_hits = 0;
  for (std::uint64_t s = 0; s < 5; ++s) {
    const Bytes seed = random_bytes(1000 + s, 8);
    finch_hits += bugs_found(Mode::Finch, fig1, seed, 500000, s, 2);
    baseline_hits += bugs_found(Mode::Baseline, fig1, seed, 500000, s, 2);
  }
  const auto lava = targets::lava8();
  const Bytes seed = random_bytes(1000, 64);
  const std::size_t lava_finch = bugs_found(Mode::Finch, lava, seed, 2000000, 0);
  const std::size_t lava_baseline = bugs_found(Mode::Baseline, lava, seed, 2000000, 0);
  std::ostringstream os;
  os << "fig1 bug 2: finch " << finch_hits << "/5, baseline " << baseline_hits
     << "/5; lava8: finch " << lava_finch << "/8, baseline " << lava_baseline << "/8";
  summary = os.str();
  v.require(finch_hits >= 4, "fig1 finch");
  v.require(baseline_hits <= 1, "fig1 baseline");
  v.require(lava_finch >= 7, "lava8 finch");
  v.require(lava_baseline <= 2, "lava8 baseline");
  return v;
}

Verdict pool_minimization(std::string& summary) {
  Verdict v;
  const auto r = hot_fuzz(targets::fig1(), std::vector<Bytes>{random_bytes(1000, 8)},
                          Budget::Execs(100000));
  std::size_t improving = 0;
  for (const auto& g : r.trace) {
    v.require(g.pool <= g.boundary, "pool larger than boundary");
    v.require(g.boundary <= g.candidates, "boundary larger than candidates");
    improving += g.non_covering_improvements > 0;
  }
  v.require(!r.trace.empty(), "no generations");
  v.require(improving > 0, "no non-covering improvement");
  summary = std::to_string(r.trace.size()) + " generations, " +
            std::to_string(improving) + " with non-covering improvements";
  return v;
}

Verdict reproducibility() {
  Verdict v;
  const fs::path root =
      fs::temp_directory_path() / ("finch_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(root);
  fs::create_directories(root / "seeds");
  write_file(root / "seeds" / "s0", random_bytes(1000, 8));
  write_file(root / "seeds" / "s1", random_bytes(1001, 8));
  CampaignConfig cfg;
  cfg.target_name = "fig1";
  cfg.seeds_dir = root / "seeds";
  cfg.budget = Budget::Execs(100000);
  cfg.campaign_seed = 11;
  std::ostringstream log;
  auto crashes = [](const fs::path& dir) {
    std::vector<std::pair<std::string, Bytes>> out;
    for (const auto& p : list_files(dir / "crashes")) {
      out.emplace_back(p.filename().string(), *read_file(p));
    }
    return out;
  };
  cfg.out_dir = root / "a";
  v.require(run_campaign(cfg, log) == 0, "first run failed");
  cfg.out_dir = root / "b";
  v.require(run_campaign(cfg, log) == 0, "second run failed");
  const auto sa = read_file(root / "a" / "stats.csv");
  const auto sb = read_file(root / "b" / "stats.csv");
  v.require(sa && sb && !sa->empty() && *sa == *sb, "stats.csv differs");
  v.require(crashes(root / "a") == crashes(root / "b"), "crash sets differ");
  fs::remove_all(root);
  return v;
}

}  // namespace
}  // namespace finch

int main() {
  using namespace finch;
  struct Criterion {
    int id;
    const char* name;
    std::function<Verdict(std::string&)> check;
  };
  auto plain = [](Verdict (*f)()) {
    return [f](std::string&) { return f(); };
  };
  const std::vector<Criterion> criteria{
      {1, "worked-example distance vectors", plain(distance_vectors)},
      {2, "min-Pareto set against brute force", plain(min_pareto_oracle)},
      {3, "dominance is irreflexive and transitive", plain(dominance_laws)},
      {4, "model gradients match finite differences", plain(gradients)},
      {5, "hot-byte walks and saturation", plain(hot_byte_walks)},
      {6, "edge ids against reference formula", plain(edge_ids)},
      {7, "finch vs baseline on fig1 and lava8", end_to_end},
      {8, "pool minimization mechanism", pool_minimization},
      {9, "reproducible stats and crashes", plain(reproducibility)},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    std::string summary;
    Verdict v;
    try {
      v = c.check(summary);
    } catch (const std::exception& e) {
      v.ok = false;
      v.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(
                            std::chrono::steady_clock::now() - start).count();
    std::printf("%s %d %s (%.1fs)", v.ok ? "PASS" : "FAIL", c.id, c.name, secs);
    if (!summary.empty()) std::printf(" [%s]", summary.c_str());
    if (!v.ok) std::printf(": %s", v.detail.c_str());
    std::printf("\n");
    std::fflush(stdout);
    failed += !v.ok;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed,
              criteria.size());
  return failed == 0 ? 0 : 1;
}
