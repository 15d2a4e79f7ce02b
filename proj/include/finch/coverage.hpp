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

// AFL-style edge coverage plus per-site branch outcome accounting.

#ifndef FINCH_COVERAGE_HPP_
#define FINCH_COVERAGE_HPP_

#include <bit>
#include <cstdint>
#include <vector>

#include "finch/common.hpp"
#include "finch/distance.hpp"

namespace finch {

using BlockId = std::uint32_t;

inline constexpr std::uint32_t kDefaultMapSize = 65536;

// Block id 0 is reserved as the "previous block" of the first transition.
// Harness block ids therefore start at 1.
inline constexpr BlockId kEntryBlock = 0;

inline std::uint32_t edge_id(BlockId x, BlockId y, std::uint32_t map_size) {
  return ((x >> 1) ^ y) & (map_size - 1);
}

// Fixed bijection from sequential harness block ids to map locations, in
// place of compile-time random locations. Consecutive ids would otherwise
// collide under edge_id. Maps 0 to 0.
constexpr BlockId block_location(BlockId id) {
  id ^= id >> 16;
  id *= 0x85ebca6bu;
  id ^= id >> 13;
  id *= 0xc2b2ae35u;
  id ^= id >> 16;
  return id;
}

class CoverageBitmap {
 public:
  explicit CoverageBitmap(std::uint32_t map_size = kDefaultMapSize)
      : map_size_(map_size) {
    if (map_size == 0 || !std::has_single_bit(map_size)) {
      throw ConfigError("map_size must be a power of two");
    }
    words_.assign((map_size + 63) / 64, 0);
  }

  void record_transition(BlockId y) {
    set(edge_id(last_block_, y, map_size_));
    last_block_ = y;
  }

  void set(std::uint32_t key) {
    words_[key >> 6] |= std::uint64_t{1} << (key & 63);
  }

  bool test(std::uint32_t key) const {
    return (words_[key >> 6] >> (key & 63)) & 1u;
  }

  // Clears all bits and rewinds the transition tracker to the entry sentinel.
  void reset() {
    std::fill(words_.begin(), words_.end(), 0);
    last_block_ = kEntryBlock;
  }

  std::size_t popcount() const {
    std::size_t n = 0;
    for (std::uint64_t w : words_) n += std::popcount(w);
    return n;
  }

  void merge(const CoverageBitmap& other) {
    check_same_size(other);
    for (std::size_t i = 0; i < words_.size(); ++i) words_[i] |= other.words_[i];
  }

  // True iff `run` sets some bit this bitmap lacks.
  bool has_new_bits(const CoverageBitmap& run) const {
    check_same_size(run);
    for (std::size_t i = 0; i < words_.size(); ++i) {
      if (run.words_[i] & ~words_[i]) return true;
    }
    return false;
  }

  std::uint32_t map_size() const { return map_size_; }
  BlockId last_block() const { return last_block_; }

  friend bool operator==(const CoverageBitmap& a, const CoverageBitmap& b) {
    return a.map_size_ == b.map_size_ && a.words_ == b.words_;
  }

  void check_same_size(const CoverageBitmap& other) const {
    if (other.map_size_ != map_size_) {
      throw ConfigError("coverage bitmaps have different map sizes");
    }
  }

 private:
  friend std::vector<std::uint32_t> new_edges(const CoverageBitmap&,
                                              const CoverageBitmap&);
  std::uint32_t map_size_;
  BlockId last_block_ = kEntryBlock;
  std::vector<std::uint64_t> words_;
};

// Edge keys present in `run` but not in `global`, ascending.
inline std::vector<std::uint32_t> new_edges(const CoverageBitmap& global,
                                            const CoverageBitmap& run) {
  global.check_same_size(run);
  std::vector<std::uint32_t> keys;
  for (std::size_t i = 0; i < global.words_.size(); ++i) {
    std::uint64_t fresh = run.words_[i] & ~global.words_[i];
    while (fresh) {
      const int bit = std::countr_zero(fresh);
      keys.push_back(static_cast<std::uint32_t>(i * 64 + bit));
      fresh &= fresh - 1;
    }
  }
  return keys;
}

// Which outcomes (false/true) each conditional site has produced. Edge keys
// are hashed and cannot be mapped back to sites, so objective selection
// consults this instead.
class BranchCoverage {
 public:
  static constexpr std::uint8_t kFalse = 1;
  static constexpr std::uint8_t kTrue = 2;

  BranchCoverage() = default;
  explicit BranchCoverage(std::size_t site_count) : bits_(site_count, 0) {}

  void mark(SiteId site, bool taken) {
    if (site >= bits_.size()) bits_.resize(site + 1, 0);
    bits_[site] |= taken ? kTrue : kFalse;
  }

  bool covered(SiteId site, bool taken) const {
    return site < bits_.size() && (bits_[site] & (taken ? kTrue : kFalse));
  }

  bool fully_covered(SiteId site) const {
    return site < bits_.size() && bits_[site] == (kTrue | kFalse);
  }

  // Merges `other` in; returns the number of outcomes that were new.
  std::size_t merge(const BranchCoverage& other) {
    if (other.bits_.size() > bits_.size()) bits_.resize(other.bits_.size(), 0);
    std::size_t fresh = 0;
    for (std::size_t i = 0; i < other.bits_.size(); ++i) {
      const std::uint8_t add = other.bits_[i] & ~bits_[i];
      fresh += std::popcount(static_cast<unsigned>(add));
      bits_[i] |= other.bits_[i];
    }
    return fresh;
  }

  std::size_t count() const {
    std::size_t n = 0;
    for (std::uint8_t b : bits_) n += std::popcount(static_cast<unsigned>(b));
    return n;
  }

  void reset() { std::fill(bits_.begin(), bits_.end(), 0); }

  friend bool operator==(const BranchCoverage&,
                         const BranchCoverage&) = default;

 private:
  std::vector<std::uint8_t> bits_;
};

}  // namespace finch

#endif  // FINCH_COVERAGE_HPP_
