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
 * @file subset.hpp
 * @brief Canonical bit-mask identifiers for nonempty user subsets.
 *
 * Users are numbered 0..K-1 internally; bit u of the mask is set iff user u
 * belongs to the subset. Every per-subset quantity in the library (codeword
 * queues, message weights, multicast rates) lives in a dense vector of size
 * 2^K indexed by mask, with slot 0 (the empty set) unused.
 */
#pragma once

#include <bit>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <stdexcept>
#include <string>

namespace afcc {

/// Largest supported user count; 2^16 - 1 codeword queues.
inline constexpr int kMaxUsers = 16;

using Mask = std::uint32_t;

class SubsetIndex {
 public:
  constexpr SubsetIndex() = default;

  explicit SubsetIndex(Mask mask) : mask_(mask) {
    if (mask == 0) throw std::invalid_argument("SubsetIndex: empty subset");
    if (mask >> kMaxUsers) throw std::invalid_argument("SubsetIndex: user id exceeds kMaxUsers");
  }

  /// Build from zero-based user ids.
  static SubsetIndex of(std::initializer_list<int> users) {
    Mask m = 0;
    for (int u : users) {
      if (u < 0 || u >= kMaxUsers) throw std::invalid_argument("SubsetIndex: user id out of range");
      m |= Mask{1} << u;
    }
    return SubsetIndex(m);
  }

  static SubsetIndex all(int num_users) { return SubsetIndex(full_mask(num_users)); }

  static constexpr Mask full_mask(int num_users) {
    return num_users >= 32 ? ~Mask{0} : (Mask{1} << num_users) - 1;
  }

  constexpr Mask mask() const { return mask_; }
  constexpr bool valid() const { return mask_ != 0; }
  int size() const { return std::popcount(mask_); }
  bool contains(int user) const { return (mask_ >> user) & 1U; }
  bool is_subset_of(SubsetIndex other) const { return (mask_ & ~other.mask_) == 0; }
  bool fits(int num_users) const { return (mask_ & ~full_mask(num_users)) == 0; }

  /// Smallest member id.
  int first() const { return std::countr_zero(mask_); }

  /// One-based rendering, e.g. "{1,3}".
  std::string to_string() const {
    std::string out = "{";
    bool first_member = true;
    for (Mask m = mask_; m != 0; m &= m - 1) {
      if (!first_member) out += ',';
      out += std::to_string(std::countr_zero(m) + 1);
      first_member = false;
    }
    return out + "}";
  }

  friend constexpr auto operator<=>(SubsetIndex, SubsetIndex) = default;

 private:
  Mask mask_ = 0;
};

/// Number of mask slots (including the unused empty slot) for K users.
inline std::size_t subset_slots(int num_users) { return std::size_t{1} << num_users; }

inline int popcount(Mask m) { return std::popcount(m); }

/// Calls f(user) for each member of mask in increasing id order.
template <class F>
void for_each_member(Mask mask, F&& f) {
  for (Mask m = mask; m != 0; m &= m - 1) f(std::countr_zero(m));
}

/// Calls f(sub) for each nonempty submask of mask.
template <class F>
void for_each_nonempty_submask(Mask mask, F&& f) {
  for (Mask sub = mask; sub != 0; sub = (sub - 1) & mask) f(sub);
}

inline double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace afcc
