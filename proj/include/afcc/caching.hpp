/*
 * Copyright 2026 The afcc Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/**
 * @file caching.hpp
 * @brief Decentralized placement accounting and coded-delivery segment loads.
 *
 * Each user caches every bit of every file independently with probability m.
 * A bit of file W requested by user k that is cached exactly at the set S
 * (k not in S) is useful to k; when the requests of a user group J are
 * combined, that bit is XOR-ed into the codeword destined to I = (S n J) u {k}.
 * Summing subfile sizes over all S with S n J = I \ {k} gives the load
 *
 *     b(J, I) = m^(|I|-1) (1-m)^(|J|-|I|+1)
 *
 * per file, in units of F. For fixed k the loads over I containing k add up
 * to (1-m), and summed over all I at J = [K] they give the total delivery
 * load (1-m)(1-(1-m)^K)/m.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "afcc/subset.hpp"

namespace afcc {

struct FileTag {
  std::uint64_t id = 0;
  friend constexpr auto operator<=>(FileTag, FileTag) = default;
};

struct CacheParams {
  double normalized_memory = 0.0;  ///< m = M/N
  std::int64_t file_size = 1;      ///< F, bits
  int num_users = 1;

  void validate() const {
    if (!(normalized_memory >= 0.0 && normalized_memory <= 1.0))
      throw std::invalid_argument("CacheParams: normalized_memory must lie in [0,1]");
    if (file_size < 1) throw std::invalid_argument("CacheParams: file_size must be >= 1");
    if (num_users < 1 || num_users > kMaxUsers)
      throw std::invalid_argument("CacheParams: num_users must lie in [1,16]");
  }
};

/// Fraction of a file cached at exactly a given set of `cache_set_size` users.
inline double subfile_fraction(double m, int num_users, int cache_set_size) {
  if (cache_set_size < 0 || cache_set_size > num_users)
    throw std::out_of_range("subfile_fraction: cache_set_size outside [0,K]");
  return std::pow(m, cache_set_size) * std::pow(1.0 - m, num_users - cache_set_size);
}

/// b(J,I) by cardinalities; requires 1 <= target_size <= group_size.
inline double codeword_load(double m, int group_size, int target_size) {
  if (target_size < 1 || target_size > group_size)
    throw std::out_of_range("codeword_load: need 1 <= |I| <= |J|");
  return std::pow(m, target_size - 1) * std::pow(1.0 - m, group_size - target_size + 1);
}

inline double codeword_load(double m, SubsetIndex group, SubsetIndex target) {
  if (!group.valid() || !target.valid()) throw std::invalid_argument("codeword_load: empty subset");
  if (!target.is_subset_of(group)) throw std::invalid_argument("codeword_load: I must be a subset of J");
  return codeword_load(m, group.size(), target.size());
}

/// Files transmitted to serve one request of each of K users, coded delivery.
inline double total_load(double m, int num_users) {
  if (!(m > 0.0 && m <= 1.0)) throw std::domain_error("total_load: requires 0 < m <= 1");
  return (1.0 - m) * (1.0 - std::pow(1.0 - m, num_users)) / m;
}

/// Files transmitted with uncoded (local caching gain only) delivery.
inline double uncoded_load(double m, int num_users) { return num_users * (1.0 - m); }

/// Bits each member of a file's useful portion: round((1-m)F).
inline std::int64_t useful_bits(const CacheParams& p) {
  return std::llround((1.0 - p.normalized_memory) * static_cast<double>(p.file_size));
}

/**
 * Integer segment sizes indexed by (|J|, |I|).
 *
 * Every user's segments must total exactly round((1-m)F) bits. Shared
 * segments (|I| >= 2) start at floor(b F); the resulting per-user deficit is
 * handed back one bit at a time to the sizes with the largest fractional
 * remainders, as long as the bit still fits (a size-i bump costs each user
 * C(j-1, i-1) bits). The singleton segment takes whatever is left, so it is
 * never negative.
 */
class SegmentSizeTable {
 public:
  SegmentSizeTable() = default;

  explicit SegmentSizeTable(const CacheParams& params) : num_users_(params.num_users) {
    params.validate();
    const double m = params.normalized_memory;
    const double F = static_cast<double>(params.file_size);
    const std::int64_t per_user = useful_bits(params);
    sizes_.assign(static_cast<std::size_t>((num_users_ + 1) * (num_users_ + 1)), 0);
    for (int j = 1; j <= num_users_; ++j) {
      std::int64_t deficit = per_user;
      std::vector<std::pair<double, int>> remainders;
      for (int i = 2; i <= j; ++i) {
        const double exact = codeword_load(m, j, i) * F;
        const auto bits = static_cast<std::int64_t>(std::floor(exact));
        at(j, i) = bits;
        deficit -= static_cast<std::int64_t>(binomial(j - 1, i - 1)) * bits;
        remainders.emplace_back(exact - static_cast<double>(bits), i);
      }
      std::stable_sort(remainders.begin(), remainders.end(),
                       [](const auto& a, const auto& b) { return a.first > b.first; });
      for (const auto& [frac, i] : remainders) {
        const auto cost = static_cast<std::int64_t>(binomial(j - 1, i - 1));
        if (frac > 0.0 && cost <= deficit) {
          ++at(j, i);
          deficit -= cost;
        }
      }
      at(j, 1) = deficit;
    }
  }

  std::int64_t bits(int group_size, int target_size) const {
    return sizes_[static_cast<std::size_t>(group_size * (num_users_ + 1) + target_size)];
  }

  int num_users() const { return num_users_; }

 private:
  std::int64_t& at(int j, int i) { return sizes_[static_cast<std::size_t>(j * (num_users_ + 1) + i)]; }

  int num_users_ = 0;
  std::vector<std::int64_t> sizes_;
};

/// One XOR codeword: bits destined to `target`, decodable by each listed file's owner.
struct Segment {
  SubsetIndex target;
  std::int64_t bits = 0;
  std::vector<FileTag> files;  ///< one per member of target, in increasing user order
};

/**
 * Codeword segments produced by combining one request per user of `group`.
 *
 * `files` holds one tag per member of `group` in increasing user order; tags
 * must be distinct. Zero-bit segments are still emitted so that the pattern of
 * target queues is visible to callers.
 */
inline std::vector<Segment> enumerate_segments(SubsetIndex group, std::span<const FileTag> files,
                                               const CacheParams& params,
                                               const SegmentSizeTable& table) {
  if (!group.valid() || !group.fits(params.num_users))
    throw std::invalid_argument("enumerate_segments: group outside [K]");
  if (static_cast<int>(files.size()) != group.size())
    throw std::invalid_argument("enumerate_segments: need exactly one file per group member");
  for (std::size_t a = 0; a < files.size(); ++a)
    for (std::size_t b = a + 1; b < files.size(); ++b)
      if (files[a] == files[b]) throw std::invalid_argument("enumerate_segments: duplicate file tags");

  // Position of each member inside `files`.
  int slot_of[kMaxUsers] = {};
  {
    int pos = 0;
    for_each_member(group.mask(), [&](int u) { slot_of[u] = pos++; });
  }

  std::vector<Segment> out;
  out.reserve((std::size_t{1} << group.size()) - 1);
  const int j = group.size();
  for_each_nonempty_submask(group.mask(), [&](Mask sub) {
    Segment seg;
    seg.target = SubsetIndex(sub);
    seg.bits = table.bits(j, popcount(sub));
    for_each_member(sub, [&](int u) { seg.files.push_back(files[slot_of[u]]); });
    out.push_back(std::move(seg));
  });
  return out;
}

inline std::vector<Segment> enumerate_segments(SubsetIndex group, std::span<const FileTag> files,
                                               const CacheParams& params) {
  return enumerate_segments(group, files, params, SegmentSizeTable(params));
}

}  // namespace afcc
