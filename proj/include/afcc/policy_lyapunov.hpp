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
 * @file policy_lyapunov.hpp
 * @brief Drift-plus-penalty controller: virtual-queue admission control,
 *        backpressure routing of requests into codeword queues, and
 *        queue-weighted broadcast scheduling.
 *
 * Queue units: S_k and U_k are in files, Q_I in bits. Backpressure
 * comparisons put Q in file units (Q / F) so both sides of the routing
 * threshold are measured in files.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <utility>
#include <vector>

#include "afcc/bc_capacity.hpp"
#include "afcc/caching.hpp"
#include "afcc/channel.hpp"
#include "afcc/subset.hpp"

namespace afcc {

struct PolicyParams {
  double alpha = 1.0;      ///< fairness exponent
  double V = 100.0;        ///< utility/backlog tradeoff
  double d = 0.01;         ///< utility domain shift
  double gamma_max = 1.0;  ///< admission cap, files/slot
  int sigma_max = 1;       ///< combinations per subset per slot

  void validate() const {
    if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw std::invalid_argument("PolicyParams: alpha must be >= 0");
    if (!(V > 0.0)) throw std::invalid_argument("PolicyParams: V must be > 0");
    if (!(d > 0.0)) throw std::invalid_argument("PolicyParams: d must be > 0");
    if (!(gamma_max > 0.0)) throw std::invalid_argument("PolicyParams: gamma_max must be > 0");
    if (sigma_max < 1) throw std::invalid_argument("PolicyParams: sigma_max must be >= 1");
  }
};

/// Alpha-fair utility, shifted by d so that it is finite at zero.
inline double utility(double x, double alpha, double d) {
  if (alpha == 1.0) return std::log(1.0 + x / d);
  return std::pow(d + x, 1.0 - alpha) / (1.0 - alpha);
}

/// argmax over [0, gamma_max] of V g(x) - U x.
inline double virtual_arrival(double backlog, const PolicyParams& p) {
  if (backlog <= 0.0) return p.gamma_max;
  double x = 0.0;
  if (p.alpha == 0.0) {
    // Linear utility: corner solution.
    x = backlog < p.V ? p.gamma_max : 0.0;
  } else if (p.alpha == 1.0) {
    x = p.V / backlog - p.d;
  } else {
    x = std::pow(p.V / backlog, 1.0 / p.alpha) - p.d;
  }
  return std::clamp(x, 0.0, p.gamma_max);
}

/// On-off admission; admits on ties.
inline double admission_decide(double user_backlog, double virtual_backlog, const PolicyParams& p) {
  return virtual_backlog >= user_backlog ? p.gamma_max : 0.0;
}

struct QueueState {
  std::vector<double> S;        ///< admitted, not yet combined (files)
  std::vector<std::int64_t> Q;  ///< codeword backlog by mask (bits)
  std::vector<double> U;        ///< virtual utility queues (files)

  static QueueState empty(int num_users) {
    return {std::vector<double>(num_users, 0.0), std::vector<std::int64_t>(subset_slots(num_users), 0),
            std::vector<double>(num_users, 0.0)};
  }

  int num_users() const { return static_cast<int>(S.size()); }

  double total_S() const { return std::accumulate(S.begin(), S.end(), 0.0); }
  double total_U() const { return std::accumulate(U.begin(), U.end(), 0.0); }
  std::int64_t total_Q_bits() const { return std::accumulate(Q.begin(), Q.end(), std::int64_t{0}); }
};

/// Fractional loads b(j, i) by cardinality, cached for the routing loop.
class LoadTable {
 public:
  LoadTable() = default;
  explicit LoadTable(const CacheParams& c) : stride_(c.num_users + 1), loads_(stride_ * stride_, 0.0) {
    for (int j = 1; j <= c.num_users; ++j)
      for (int i = 1; i <= j; ++i) loads_[j * stride_ + i] = codeword_load(c.normalized_memory, j, i);
  }
  double operator()(int j, int i) const { return loads_[j * stride_ + i]; }

 private:
  int stride_ = 0;
  std::vector<double> loads_;
};

struct RoutingDecision {
  std::vector<int> sigma;       ///< by mask
  std::vector<double> margin;   ///< sum_{k in J} S_k - sum_{I in J} b(J,I) Q_I / F, by mask
};

inline RoutingDecision routing_decide(const QueueState& q, const PolicyParams& p, const CacheParams& cache,
                                      const LoadTable& loads) {
  const int K = q.num_users();
  const double inv_F = 1.0 / static_cast<double>(cache.file_size);
  RoutingDecision out{std::vector<int>(subset_slots(K), 0), std::vector<double>(subset_slots(K), 0.0)};
  const Mask full = SubsetIndex::full_mask(K);
  for (Mask J = 1; J <= full; ++J) {
    double demand = 0.0;
    for_each_member(J, [&](int k) { demand += q.S[k]; });
    const int j = popcount(J);
    double pressure = 0.0;
    for_each_nonempty_submask(J, [&](Mask I) {
      if (q.Q[I] != 0) pressure += loads(j, popcount(I)) * static_cast<double>(q.Q[I]);
    });
    out.margin[J] = demand - pressure * inv_F;
    out.sigma[J] = out.margin[J] > 0.0 ? p.sigma_max : 0;
  }
  return out;
}

inline RoutingDecision routing_decide(const QueueState& q, const PolicyParams& p, const CacheParams& cache) {
  return routing_decide(q, p, cache, LoadTable(cache));
}

/// Codeword backlogs (bits) as subset weights.
inline RateAllocation schedule_decide(const QueueState& q, const ChannelState& h, double power) {
  std::vector<double> theta(q.Q.size());
  for (std::size_t i = 0; i < q.Q.size(); ++i) theta[i] = static_cast<double>(q.Q[i]);
  return max_weighted_rate(h, power, theta);
}

struct SlotDecision {
  std::vector<double> admissions;        ///< a_k
  std::vector<double> virtual_arrivals;  ///< gamma_k
  RoutingDecision routing;               ///< nominal sigma_J and margins
  std::vector<int> effective;            ///< combinations backed by whole files, by mask
  std::vector<Mask> combination_order;   ///< subsets with effective > 0, in processing order
  RateAllocation schedule;
  std::vector<std::int64_t> service_bits;  ///< floor(T_slot mu_I), by mask
};

/**
 * Stateless slot controller; bundles parameters and precomputed tables.
 *
 * Every decision reads the pre-update state. Combinations are capped by the
 * whole files each user actually holds (floor of S_k); subsets are served in
 * decreasing routing margin, ties by mask. S and Q then follow
 *
 *     S_k <- S_k - sum_{J ni k} eff_J + a_k
 *     Q_I <- [Q_I - floor(T_slot mu_I)]^+ + sum_{J >= I} eff_J bits(J, I)
 *     U_k <- [U_k - a_k]^+ + gamma_k
 */
class LyapunovController {
 public:
  LyapunovController(PolicyParams policy, CacheParams cache, double power, int slot_length)
      : policy_(policy), cache_(cache), power_(power), slot_length_(slot_length),
        loads_(cache), segments_(cache) {
    policy_.validate();
    cache_.validate();
    if (!(power > 0.0)) throw std::invalid_argument("LyapunovController: power must be positive");
    if (slot_length < 1) throw std::invalid_argument("LyapunovController: slot_length must be >= 1");
  }

  const PolicyParams& policy() const { return policy_; }
  const CacheParams& cache() const { return cache_; }
  const SegmentSizeTable& segment_sizes() const { return segments_; }
  int slot_length() const { return slot_length_; }
  double power() const { return power_; }

  SlotDecision decide(const QueueState& q, const ChannelState& h) const {
    const int K = q.num_users();
    SlotDecision d;
    d.admissions.resize(K);
    d.virtual_arrivals.resize(K);
    for (int k = 0; k < K; ++k) {
      d.virtual_arrivals[k] = virtual_arrival(q.U[k], policy_);
      d.admissions[k] = admission_decide(q.S[k], q.U[k], policy_);
    }
    d.routing = routing_decide(q, policy_, cache_, loads_);
    d.schedule = schedule_decide(q, h, power_);
    d.service_bits.assign(q.Q.size(), 0);
    for (std::size_t I = 1; I < q.Q.size(); ++I)
      d.service_bits[I] =
          static_cast<std::int64_t>(std::floor(slot_length_ * d.schedule.subset_rates[I] + 1e-9));

    std::vector<Mask> fired;
    for (Mask J = 1; J < d.routing.sigma.size(); ++J)
      if (d.routing.sigma[J] > 0) fired.push_back(J);
    std::stable_sort(fired.begin(), fired.end(),
                     [&](Mask a, Mask b) { return d.routing.margin[a] > d.routing.margin[b]; });
    std::vector<std::int64_t> whole(K);
    for (int k = 0; k < K; ++k) whole[k] = whole_files(q.S[k]);
    d.effective.assign(q.Q.size(), 0);
    for (Mask J : fired) {
      std::int64_t n = d.routing.sigma[J];
      for_each_member(J, [&](int k) { n = std::min(n, whole[k]); });
      if (n <= 0) continue;
      for_each_member(J, [&](int k) { whole[k] -= n; });
      d.effective[J] = static_cast<int>(n);
      d.combination_order.push_back(J);
    }
    return d;
  }

  QueueState apply(const QueueState& q, const SlotDecision& d) const {
    const int K = q.num_users();
    QueueState next = q;
    for (std::size_t I = 1; I < q.Q.size(); ++I) next.Q[I] = std::max<std::int64_t>(0, q.Q[I] - d.service_bits[I]);
    for (Mask J : d.combination_order) {
      const int n = d.effective[J];
      const int j = popcount(J);
      for_each_member(J, [&](int k) { next.S[k] -= n; });
      for_each_nonempty_submask(J, [&](Mask I) { next.Q[I] += n * segments_.bits(j, popcount(I)); });
    }
    for (int k = 0; k < K; ++k) {
      next.S[k] = std::max(0.0, next.S[k]) + d.admissions[k];
      next.U[k] = std::max(0.0, q.U[k] - d.admissions[k]) + d.virtual_arrivals[k];
    }
    return next;
  }

  std::pair<QueueState, SlotDecision> step(const QueueState& q, const ChannelState& h) const {
    SlotDecision d = decide(q, h);
    QueueState next = apply(q, d);
    return {std::move(next), std::move(d)};
  }

  /// Whole files represented by a real-valued backlog.
  static std::int64_t whole_files(double backlog) {
    return static_cast<std::int64_t>(std::floor(backlog + 1e-9));
  }

 private:
  PolicyParams policy_;
  CacheParams cache_;
  double power_;
  int slot_length_;
  LoadTable loads_;
  SegmentSizeTable segments_;
};

inline std::pair<QueueState, SlotDecision> step(const QueueState& q, const ChannelState& h,
                                                const PolicyParams& params, const CacheParams& cache,
                                                double power, int slot_length) {
  return LyapunovController(params, cache, power, slot_length).step(q, h);
}

}  // namespace afcc
