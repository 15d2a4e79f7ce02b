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

// Branch distances and per-execution distance bitmaps.
//
// A conditional site `a <rel> b` reports how far its operands are from the
// boundary of the condition. An execution collects one distance per visited
// site; a site that was never reached has the maximum distance K.

#ifndef FINCH_DISTANCE_HPP_
#define FINCH_DISTANCE_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace finch {

using SiteId = std::uint32_t;

// 32-bit comparisons dominate the targets we care about; wider operands
// saturate.
inline constexpr std::uint64_t kDefaultMaxDistance = 0xffffffffull;

enum class Relation : std::uint8_t { True, False, GT, GE, LE, LT, EQ, NE };

enum class DistanceMode : std::uint8_t { Abs, Xor };

enum class NormMode : std::uint8_t { Linear, Log };

inline bool evaluate(Relation rel, std::uint64_t a, std::uint64_t b) {
  switch (rel) {
    case Relation::True: return true;
    case Relation::False: return false;
    case Relation::GT: return a > b;
    case Relation::GE: return a >= b;
    case Relation::LE: return a <= b;
    case Relation::LT: return a < b;
    case Relation::EQ: return a == b;
    case Relation::NE: return a != b;
  }
  return false;
}

// Maps a signed operand onto unsigned order-preserving form. Harnesses must
// report signed comparisons through this so that |a - b| stays meaningful.
constexpr std::uint64_t ordered(std::int64_t v) {
  return static_cast<std::uint64_t>(v) ^ (std::uint64_t{1} << 63);
}

inline std::uint64_t branch_distance(Relation rel, std::uint64_t a,
                                     std::uint64_t b,
                                     DistanceMode mode = DistanceMode::Abs) {
  if (rel == Relation::True || rel == Relation::False) return 0;
  if (mode == DistanceMode::Xor) return a ^ b;
  return a > b ? a - b : b - a;
}

// Distances of the sites visited by one execution. Absent sites read as K.
class DistanceBitmap {
 public:
  struct Entry {
    SiteId site;
    std::uint64_t distance;
    friend bool operator==(const Entry&, const Entry&) = default;
  };

  explicit DistanceBitmap(std::uint64_t max_distance = kDefaultMaxDistance)
      : max_distance_(max_distance) {}

  // Keeps the smallest distance seen for `site`; values above K are capped.
  void record(SiteId site, std::uint64_t d) {
    d = std::min(d, max_distance_);
    auto it = std::lower_bound(
        entries_.begin(), entries_.end(), site,
        [](const Entry& e, SiteId s) { return e.site < s; });
    if (it != entries_.end() && it->site == site) {
      it->distance = std::min(it->distance, d);
    } else {
      entries_.insert(it, Entry{site, d});
    }
  }

  std::uint64_t get(SiteId site) const {
    const Entry* e = find(site);
    return e ? e->distance : max_distance_;
  }

  bool visited(SiteId site) const { return find(site) != nullptr; }

  std::span<const Entry> entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  std::uint64_t max_distance() const { return max_distance_; }

  void clear() { entries_.clear(); }

  friend bool operator==(const DistanceBitmap&,
                         const DistanceBitmap&) = default;

 private:
  const Entry* find(SiteId site) const {
    auto it = std::lower_bound(
        entries_.begin(), entries_.end(), site,
        [](const Entry& e, SiteId s) { return e.site < s; });
    return (it != entries_.end() && it->site == site) ? &*it : nullptr;
  }

  std::vector<Entry> entries_;  // sorted by site
  std::uint64_t max_distance_;
};

// Projects a bitmap onto an objective list as model labels in [0, 1].
// Unvisited sites map to exactly 1.0. An empty objective list yields an empty
// vector, which callers treat as "nothing to learn".
inline std::vector<double> normalize(const DistanceBitmap& bitmap,
                                     std::span<const SiteId> objectives,
                                     NormMode mode = NormMode::Linear) {
  const std::uint64_t k = bitmap.max_distance();
  std::vector<double> out;
  out.reserve(objectives.size());
  for (SiteId site : objectives) {
    if (!bitmap.visited(site) || k == 0) {
      out.push_back(1.0);
      continue;
    }
    const std::uint64_t d = std::min(bitmap.get(site), k);
    if (d == k) {
      out.push_back(1.0);
    } else if (mode == NormMode::Linear) {
      out.push_back(static_cast<double>(static_cast<long double>(d) /
                                        static_cast<long double>(k)));
    } else {
      out.push_back(static_cast<double>(
          std::log1p(static_cast<long double>(d)) /
          std::log1p(static_cast<long double>(k))));
    }
  }
  return out;
}

inline std::string_view to_string(DistanceMode m) {
  return m == DistanceMode::Abs ? "abs" : "xor";
}

inline std::string_view to_string(NormMode m) {
  return m == NormMode::Linear ? "linear" : "log";
}

inline DistanceMode parse_distance_mode(std::string_view s) {
  if (s == "abs") return DistanceMode::Abs;
  if (s == "xor") return DistanceMode::Xor;
  throw std::invalid_argument("unknown distance mode: " + std::string(s));
}

inline NormMode parse_norm_mode(std::string_view s) {
  if (s == "linear") return NormMode::Linear;
  if (s == "log") return NormMode::Log;
  throw std::invalid_argument("unknown normalization: " + std::string(s));
}

}  // namespace finch

#endif  // FINCH_DISTANCE_HPP_
