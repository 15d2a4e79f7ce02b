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

// Mutation strategies: gradient-guided hot-byte stepping and AFL-style havoc.

#ifndef FINCH_MUTATOR_HPP_
#define FINCH_MUTATOR_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "finch/common.hpp"

namespace finch {

inline constexpr std::size_t kDefaultMutantBudget = 1u << 16;

// Byte positions sorted by |g| descending, ties by index ascending, together
// with the sign of each gradient entry.
struct GradientRanking {
  std::vector<std::size_t> order;
  std::vector<int> signs;
};

inline int sign_of(double v) { return (v > 0) - (v < 0); }

inline GradientRanking rank_gradient(std::span<const double> g) {
  GradientRanking r;
  r.order.resize(g.size());
  std::iota(r.order.begin(), r.order.end(), 0);
  std::stable_sort(r.order.begin(), r.order.end(),
                   [&](std::size_t a, std::size_t b) {
                     return std::fabs(g[a]) > std::fabs(g[b]);
                   });
  r.signs.reserve(g.size());
  for (double v : g) r.signs.push_back(sign_of(v));
  return r;
}

// Ranking positions [lo, hi) of the |g|-descending order; hi is clipped.
inline std::vector<std::size_t> top(std::span<const double> g, std::size_t lo,
                                    std::size_t hi) {
  const GradientRanking r = rank_gradient(g);
  hi = std::min(hi, r.order.size());
  if (lo >= hi) return {};
  return {r.order.begin() + static_cast<std::ptrdiff_t>(lo),
          r.order.begin() + static_cast<std::ptrdiff_t>(hi)};
}

// Rank slices [0,2), [2,4), [4,8), [8,16), ... until `len` positions are
// covered.
inline std::vector<std::pair<std::size_t, std::size_t>> hot_byte_ranges(
    std::size_t len) {
  std::vector<std::pair<std::size_t, std::size_t>> ranges;
  if (len == 0) return ranges;
  ranges.emplace_back(0, 2);
  for (std::size_t lo = 2; lo < len; lo *= 2) ranges.emplace_back(lo, lo * 2);
  return ranges;
}

// One (group, direction) walk: every step adds dir * sign(g[i]) to each byte
// of the group, saturating at 0 and 255. The walk ends when a step would
// change nothing, so it emits at most 255 mutants.
class HotByteTrajectory {
 public:
  HotByteTrajectory(const Bytes& seed, std::vector<std::size_t> locs,
                    std::vector<int> steps)
      : current_(seed), locs_(std::move(locs)), steps_(std::move(steps)) {}

  // Advances one step; false once the group is saturated.
  bool next(Bytes& out) {
    bool changed = false;
    for (std::size_t k = 0; k < locs_.size(); ++k) {
      std::uint8_t& b = current_[locs_[k]];
      const int v = std::clamp(static_cast<int>(b) + steps_[k], 0, 255);
      if (v != b) {
        b = static_cast<std::uint8_t>(v);
        changed = true;
      }
    }
    if (!changed) return false;
    out = current_;
    return true;
  }

 private:
  Bytes current_;
  std::vector<std::size_t> locs_;
  std::vector<int> steps_;
};

// Trajectory for an explicit group of byte positions and a direction.
inline HotByteTrajectory hot_byte_trajectory(const Bytes& t,
                                             std::span<const double> g,
                                             std::vector<std::size_t> locs,
                                             int dir) {
  std::vector<int> steps;
  steps.reserve(locs.size());
  for (std::size_t i : locs) steps.push_back(dir * sign_of(g[i]));
  return HotByteTrajectory(t, std::move(locs), std::move(steps));
}

// Streams the hot-byte mutants of one seed. Every (range, direction)
// trajectory advances one step per round, round-robin, so that the hottest
// groups are still exercised when `budget` cuts the stream short.
class HotByteMutator {
 public:
  HotByteMutator(const Bytes& t, std::span<const double> g,
                 std::size_t budget = kDefaultMutantBudget)
      : budget_(budget) {
    if (t.empty()) return;
    // Positions past the end of t are padding and never ranked.
    const std::span<const double> gt = g.first(std::min(g.size(), t.size()));
    const GradientRanking rank = rank_gradient(gt);
    for (auto [lo, hi] : hot_byte_ranges(gt.size())) {
      hi = std::min(hi, rank.order.size());
      std::vector<std::size_t> locs(rank.order.begin() + static_cast<std::ptrdiff_t>(lo),
                                    rank.order.begin() + static_cast<std::ptrdiff_t>(hi));
      for (int dir : {-1, +1}) {
        walks_.push_back(hot_byte_trajectory(t, gt, locs, dir));
      }
    }
    live_.assign(walks_.size(), 1);
  }

  bool next(Bytes& out) {
    while (emitted_ < budget_ && live_count() > 0) {
      const std::size_t k = cursor_;
      cursor_ = (cursor_ + 1) % walks_.size();
      if (!live_[k]) continue;
      if (walks_[k].next(out)) {
        ++emitted_;
        return true;
      }
      live_[k] = 0;
    }
    return false;
  }

  std::size_t emitted() const { return emitted_; }

 private:
  std::size_t live_count() const {
    return static_cast<std::size_t>(std::count(live_.begin(), live_.end(), 1));
  }

  std::vector<HotByteTrajectory> walks_;
  std::vector<char> live_;
  std::size_t cursor_ = 0;
  std::size_t emitted_ = 0;
  std::size_t budget_;
};

inline std::vector<Bytes> mutate_hot_bytes(const Bytes& t,
                                           std::span<const double> g,
                                           std::size_t budget = kDefaultMutantBudget) {
  std::vector<Bytes> out;
  HotByteMutator gen(t, g, budget);
  Bytes m;
  while (gen.next(m)) out.push_back(m);
  return out;
}

// AFL-style havoc: 1..64 stacked random operators per mutant. Word-sized
// arithmetic is included so that carries across byte boundaries are
// reachable in one step.
class Havoc {
 public:
  Havoc(std::size_t max_len, std::uint64_t seed) : max_len_(std::max<std::size_t>(max_len, 1)), rng_(seed) {}

  Bytes mutate(const Bytes& t) {
    Bytes out = t.empty() ? Bytes{0} : t;
    if (out.size() > max_len_) out.resize(max_len_);
    const std::size_t stack = 1 + below(64);
    for (std::size_t s = 0; s < stack; ++s) apply_one(out);
    return out;
  }

 private:
  static constexpr std::uint8_t kInteresting8[] = {0, 1, 0x7f, 0x80, 0xff};
  static constexpr std::uint16_t kInteresting16[] = {0, 1, 0x7fff, 0x8000, 0xffff};
  static constexpr std::uint32_t kInteresting32[] = {0, 1, 0x7fffffff, 0x80000000,
                                                    0xffffffff};

  std::size_t below(std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_);
  }

  void apply_one(Bytes& b) {
    switch (below(12)) {
      case 0: {  // bit flip
        const std::size_t bit = below(b.size() * 8);
        b[bit / 8] ^= static_cast<std::uint8_t>(0x80u >> (bit % 8));
        break;
      }
      case 1:  // random byte
        b[below(b.size())] = static_cast<std::uint8_t>(below(256));
        break;
      case 2: {  // byte arithmetic
        const auto delta = static_cast<std::uint8_t>(1 + below(35));
        std::uint8_t& x = b[below(b.size())];
        x = below(2) ? static_cast<std::uint8_t>(x + delta)
                     : static_cast<std::uint8_t>(x - delta);
        break;
      }
      case 3:
        b[below(b.size())] = kInteresting8[below(std::size(kInteresting8))];
        break;
      case 4: {
        if (b.size() < 2) break;
        const std::uint16_t v = kInteresting16[below(std::size(kInteresting16))];
        write_word(b, below(b.size() - 1), v, 2);
        break;
      }
      case 5: {
        if (b.size() < 4) break;
        const std::uint32_t v = kInteresting32[below(std::size(kInteresting32))];
        write_word(b, below(b.size() - 3), v, 4);
        break;
      }
      case 6: {  // block delete
        if (b.size() < 2) break;
        const std::size_t len = 1 + below(b.size() - 1);
        const std::size_t from = below(b.size() - len + 1);
        b.erase(b.begin() + static_cast<std::ptrdiff_t>(from),
                b.begin() + static_cast<std::ptrdiff_t>(from + len));
        break;
      }
      case 7: {  // block duplicate (insert a copy of a block)
        if (b.size() >= max_len_) break;
        const std::size_t room = max_len_ - b.size();
        const std::size_t len = 1 + below(std::min(b.size(), room));
        const std::size_t from = below(b.size() - len + 1);
        const std::size_t to = below(b.size() + 1);
        const Bytes block(b.begin() + static_cast<std::ptrdiff_t>(from),
                          b.begin() + static_cast<std::ptrdiff_t>(from + len));
        b.insert(b.begin() + static_cast<std::ptrdiff_t>(to), block.begin(), block.end());
        break;
      }
      case 8: {  // block overwrite with another block of the input
        if (b.size() < 2) break;
        const std::size_t len = 1 + below(b.size() - 1);
        const std::size_t from = below(b.size() - len + 1);
        const std::size_t to = below(b.size() - len + 1);
        std::copy(b.begin() + static_cast<std::ptrdiff_t>(from),
                  b.begin() + static_cast<std::ptrdiff_t>(from + len),
                  b.begin() + static_cast<std::ptrdiff_t>(to));
        break;
      }
      case 10:
      case 11: {  // 16/32-bit arithmetic, random endianness
        const std::size_t width = below(2) ? 4 : 2;
        if (b.size() < width) break;
        const std::size_t at = below(b.size() - width + 1);
        const bool big_endian = below(2);
        std::uint32_t v = read_word(b, at, width, big_endian);
        const auto delta = static_cast<std::uint32_t>(1 + below(35));
        v = below(2) ? v + delta : v - delta;
        store_word(b, at, v, width, big_endian);
        break;
      }
      default: {  // block overwrite with a constant byte
        const std::size_t len = 1 + below(b.size());
        const std::size_t to = below(b.size() - len + 1);
        std::fill_n(b.begin() + static_cast<std::ptrdiff_t>(to), len,
                    below(2) ? static_cast<std::uint8_t>(below(256)) : b[below(b.size())]);
        break;
      }
    }
  }

  void write_word(Bytes& b, std::size_t at, std::uint32_t v, std::size_t width) {
    store_word(b, at, v, width, below(2));
  }

  static void store_word(Bytes& b, std::size_t at, std::uint32_t v,
                         std::size_t width, bool big_endian) {
    for (std::size_t i = 0; i < width; ++i) {
      const std::size_t shift = 8 * (big_endian ? width - 1 - i : i);
      b[at + i] = static_cast<std::uint8_t>(v >> shift);
    }
  }

  static std::uint32_t read_word(const Bytes& b, std::size_t at,
                                 std::size_t width, bool big_endian) {
    std::uint32_t v = 0;
    for (std::size_t i = 0; i < width; ++i) {
      const std::size_t shift = 8 * (big_endian ? width - 1 - i : i);
      v |= std::uint32_t{b[at + i]} << shift;
    }
    return v;
  }

  std::size_t max_len_;
  std::mt19937_64 rng_;
};

inline std::vector<Bytes> havoc(const Bytes& t, std::uint64_t rng_seed,
                                std::size_t count, std::size_t max_len) {
  Havoc h(max_len, rng_seed);
  std::vector<Bytes> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(h.mutate(t));
  return out;
}

}  // namespace finch

#endif  // FINCH_MUTATOR_HPP_
