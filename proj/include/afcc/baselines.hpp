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
 * @file baselines.hpp
 * @brief Comparison policies: unicast opportunistic (alpha-fair) scheduling
 *        with local caching gain only, and standard coded caching over all
 *        users with non-opportunistic TDMA delivery.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <stdexcept>
#include <vector>

#include "afcc/caching.hpp"
#include "afcc/channel.hpp"
#include "afcc/subset.hpp"

namespace afcc {

struct UnicastOutcome {
  int served_user = -1;
  double bits = 0.0;
  std::vector<int> completed;  ///< files finished this slot, per user
  std::vector<int> started;    ///< files entering service this slot, per user
};

/**
 * Full-power unicast to argmax_k log2(1 + h_k P) / T_k^alpha, where T_k is the
 * running mean of user k's served rate over past slots (0 while unserved).
 * Every user always has one file in flight.
 */
class OpportunisticScheduler {
 public:
  static constexpr double kInitialRate = 1e-3;  ///< T_k at the first slot, bits/use

  OpportunisticScheduler(int num_users, double file_bits, int slot_length)
      : file_bits_(file_bits), slot_length_(slot_length), rate_sum_(num_users, 0.0),
        residual_(num_users, file_bits) {
    if (num_users < 1) throw std::invalid_argument("OpportunisticScheduler: num_users must be >= 1");
    if (!(file_bits >= 0.0)) throw std::invalid_argument("OpportunisticScheduler: file_bits must be >= 0");
  }

  int num_users() const { return static_cast<int>(residual_.size()); }

  double average_rate(int k) const {
    if (slots_ == 0) return kInitialRate;
    return std::max(rate_sum_[k] / static_cast<double>(slots_), kInitialRate);
  }

  double residual(int k) const { return residual_[k]; }

  UnicastOutcome step(const ChannelState& h, double power, double alpha) {
    const int K = num_users();
    UnicastOutcome out;
    out.completed.assign(K, 0);
    out.started.assign(K, slots_ == 0 ? 1 : 0);

    double best_score = -1.0;
    for (int k = 0; k < K; ++k) {
      const double score = std::log2(1.0 + h.gains[k] * power) / std::pow(average_rate(k), alpha);
      if (score > best_score) {
        best_score = score;
        out.served_user = k;
      }
    }
    const int k = out.served_user;
    const double rate = std::log2(1.0 + h.gains[k] * power);
    out.bits = rate * slot_length_;

    double budget = out.bits;
    if (file_bits_ > 0.0) {
      while (budget >= residual_[k]) {
        budget -= residual_[k];
        residual_[k] = file_bits_;
        ++out.completed[k];
        ++out.started[k];
      }
      residual_[k] -= budget;
    }
    rate_sum_[k] += rate;
    ++slots_;
    return out;
  }

 private:
  double file_bits_;
  int slot_length_;
  std::uint64_t slots_ = 0;
  std::vector<double> rate_sum_;
  std::vector<double> residual_;
};

struct TdmaOutcome {
  double bits = 0.0;
  int rounds_completed = 0;
  int rounds_started = 0;
};

/**
 * Standard decentralized coded caching over all K users. A round holds every
 * nonempty-subset codeword for one request per user, sent in order of
 * increasing subset size then mask, each at the weakest member's rate. A slot's
 * channel uses carry over to the next codeword once the current one drains.
 */
class TdmaCodedCaching {
 public:
  struct Codeword {
    Mask target;
    double residual_bits;
  };

  TdmaCodedCaching(const CacheParams& cache, int slot_length)
      : num_users_(cache.num_users), slot_length_(slot_length), sizes_(cache) {
    const Mask full = SubsetIndex::full_mask(num_users_);
    for (int size = 1; size <= num_users_; ++size)
      for (Mask I = 1; I <= full; ++I)
        if (popcount(I) == size && sizes_.bits(num_users_, size) > 0)
          template_.push_back({I, static_cast<double>(sizes_.bits(num_users_, size))});
  }

  /// Bits in one full round.
  std::int64_t round_bits() const {
    std::int64_t total = 0;
    for (const auto& c : template_) total += static_cast<std::int64_t>(c.residual_bits);
    return total;
  }

  const std::deque<Codeword>& pending() const { return pending_; }
  std::uint64_t rounds_completed() const { return rounds_; }

  TdmaOutcome step(const ChannelState& h, double power) {
    TdmaOutcome out;
    double uses = slot_length_;
    while (uses > 0.0) {
      if (pending_.empty()) {
        if (template_.empty()) break;  // m = 1: nothing to send
        pending_.assign(template_.begin(), template_.end());
        ++out.rounds_started;
      }
      Codeword& head = pending_.front();
      double weakest = h.gains[SubsetIndex(head.target).first()];
      for_each_member(head.target, [&](int k) { weakest = std::min(weakest, h.gains[k]); });
      const double rate = std::log2(1.0 + power * weakest);
      if (!(rate > 0.0)) break;
      const double capacity = uses * rate;
      if (capacity >= head.residual_bits) {
        uses -= head.residual_bits / rate;
        out.bits += head.residual_bits;
        pending_.pop_front();
        if (pending_.empty()) {
          ++out.rounds_completed;
          ++rounds_;
        }
      } else {
        head.residual_bits -= capacity;
        out.bits += capacity;
        uses = 0.0;
      }
    }
    return out;
  }

 private:
  int num_users_;
  int slot_length_;
  SegmentSizeTable sizes_;
  std::vector<Codeword> template_;
  std::deque<Codeword> pending_;
  std::uint64_t rounds_ = 0;
};

}  // namespace afcc
