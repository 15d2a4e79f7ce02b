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

// Multi-objective seed scheduling.
//
// Every just-missed branch is an objective: minimize the branch distance of
// its site. Seeds are compared by Pareto dominance over their distance
// vectors, and the pool is reduced to a greedy min-Pareto set that keeps one
// minimizer per objective.

#ifndef FINCH_PARETO_HPP_
#define FINCH_PARETO_HPP_

#include <algorithm>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "finch/common.hpp"
#include "finch/coverage.hpp"
#include "finch/distance.hpp"

namespace finch {

// A pool member scored against the active objective list. `minimizes` is J:
// the objective indices on which this member attains the pool minimum.
template <class Payload>
struct Scored {
  Payload item{};
  std::vector<std::uint64_t> fvec;
  std::vector<std::size_t> minimizes;
};

using ScoredSeed = Scored<Bytes>;

// Counts elementary steps so tests can check the quadratic bound.
struct OpCounter {
  std::uint64_t ops = 0;
};

inline bool dominates(std::span<const std::uint64_t> a,
                      std::span<const std::uint64_t> b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("dominates: distance vectors are not aligned");
  }
  bool strictly = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] > b[i]) return false;
    if (a[i] < b[i]) strictly = true;
  }
  return strictly;
}

template <class P>
bool dominates(const Scored<P>& a, const Scored<P>& b) {
  return dominates(std::span<const std::uint64_t>(a.fvec),
                   std::span<const std::uint64_t>(b.fvec));
}

// Sites visited by some pool member that still have an uncovered outcome,
// ascending. Sites nobody reaches are future objectives and stay out.
template <class Bitmaps>
std::vector<SiteId> just_missed(const Bitmaps& bitmaps,
                                const BranchCoverage& covered) {
  std::vector<SiteId> sites;
  for (const DistanceBitmap& bm : bitmaps) {
    for (const auto& e : bm.entries()) {
      if (!covered.fully_covered(e.site)) sites.push_back(e.site);
    }
  }
  std::sort(sites.begin(), sites.end());
  sites.erase(std::unique(sites.begin(), sites.end()), sites.end());
  return sites;
}

inline std::vector<std::uint64_t> project(const DistanceBitmap& bitmap,
                                          std::span<const SiteId> objectives) {
  std::vector<std::uint64_t> f;
  f.reserve(objectives.size());
  for (SiteId s : objectives) f.push_back(bitmap.get(s));
  return f;
}

// True when every entry is `k`: the seed reaches none of the objectives.
inline bool all_unvisited(std::span<const std::uint64_t> fvec,
                          std::uint64_t k) {
  return std::all_of(fvec.begin(), fvec.end(),
                     [k](std::uint64_t d) { return d >= k; });
}

// Members not dominated by any other member, in input order. Members with
// identical vectors are all kept.
template <class P>
std::vector<Scored<P>> pareto_boundary(std::vector<Scored<P>> pool,
                                       OpCounter* counter = nullptr) {
  std::vector<char> keep(pool.size(), 1);
  for (std::size_t i = 0; i < pool.size(); ++i) {
    for (std::size_t j = 0; j < pool.size() && keep[i]; ++j) {
      if (counter) counter->ops += pool[i].fvec.size();
      if (i != j && dominates(pool[j], pool[i])) keep[i] = 0;
    }
  }
  std::vector<Scored<P>> out;
  out.reserve(pool.size());
  for (std::size_t i = 0; i < pool.size(); ++i) {
    if (keep[i]) out.push_back(std::move(pool[i]));
  }
  return out;
}

// Fills in J for every member: objective i belongs to J_t iff
// f_i(t) <= f_i(t') for all t' in the pool.
template <class P>
void assign_minimizer_sets(std::vector<Scored<P>>& pool,
                           OpCounter* counter = nullptr) {
  if (pool.empty()) return;
  const std::size_t n = pool.front().fvec.size();
  std::vector<std::uint64_t> best(n, UINT64_MAX);
  for (const auto& s : pool) {
    if (s.fvec.size() != n) {
      throw std::invalid_argument("pool distance vectors are not aligned");
    }
    for (std::size_t i = 0; i < n; ++i) best[i] = std::min(best[i], s.fvec[i]);
    if (counter) counter->ops += n;
  }
  for (auto& s : pool) {
    s.minimizes.clear();
    for (std::size_t i = 0; i < n; ++i) {
      if (s.fvec[i] == best[i]) s.minimizes.push_back(i);
    }
    if (counter) counter->ops += n;
  }
}

// Greedy min-Pareto set. Members are visited in descending |J| (ties keep
// input order); a member is kept iff some of its objectives are not yet
// claimed, and the objectives it claims are removed from everyone after it.
// On return each kept member's `minimizes` holds the objectives it claimed.
//
// J is recomputed from the vectors on entry, so the input only needs aligned
// fvecs. The result covers every objective with a pool minimizer.
template <class P>
std::vector<Scored<P>> min_pareto_set(std::vector<Scored<P>> pool,
                                      OpCounter* counter = nullptr) {
  assign_minimizer_sets(pool, counter);
  std::stable_sort(pool.begin(), pool.end(),
                   [](const Scored<P>& a, const Scored<P>& b) {
                     return a.minimizes.size() > b.minimizes.size();
                   });
  const std::size_t n = pool.empty() ? 0 : pool.front().fvec.size();
  // Residual J as bitsets; subtraction is a word-wise and-not.
  const std::size_t words = (n + 63) / 64;
  std::vector<std::vector<std::uint64_t>> residual(
      pool.size(), std::vector<std::uint64_t>(words, 0));
  for (std::size_t k = 0; k < pool.size(); ++k) {
    for (std::size_t i : pool[k].minimizes) {
      residual[k][i >> 6] |= std::uint64_t{1} << (i & 63);
    }
  }
  std::vector<Scored<P>> out;
  for (std::size_t k = 0; k < pool.size(); ++k) {
    const bool nonempty = std::any_of(residual[k].begin(), residual[k].end(),
                                      [](std::uint64_t w) { return w != 0; });
    if (!nonempty) continue;
    for (std::size_t later = k + 1; later < pool.size(); ++later) {
      for (std::size_t w = 0; w < words; ++w) {
        residual[later][w] &= ~residual[k][w];
      }
      if (counter) counter->ops += n;
    }
    Scored<P> kept = std::move(pool[k]);
    kept.minimizes.clear();
    for (std::size_t i = 0; i < n; ++i) {
      if ((residual[k][i >> 6] >> (i & 63)) & 1u) kept.minimizes.push_back(i);
    }
    out.push_back(std::move(kept));
  }
  return out;
}

}  // namespace finch

#endif  // FINCH_PARETO_HPP_
