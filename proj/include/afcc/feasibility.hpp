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
 * @file feasibility.hpp
 * @brief Static randomized policies: Monte-Carlo average service rates,
 *        slack of the combine/transmit rate-balance constraints, and a fluid
 *        queue simulator for checking stability empirically.
 *
 * A static policy admits a_k files/slot, combines sigma_J request groups per
 * slot and, in every slot, transmits one of K+1 candidate rate points drawn
 * from a channel-dependent mixture psi(h). The candidates are the K
 * single-user corner points (all power to user k's private message) plus the
 * max-weighted-rate point for a fixed weight vector.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include "afcc/bc_capacity.hpp"
#include "afcc/caching.hpp"
#include "afcc/channel.hpp"

namespace afcc {

struct RatePoint {
  SubsetVector rates;                 ///< bits/use by mask
  std::vector<double> power_fractions;  ///< per gain-order position
};

struct StaticPolicySpec {
  std::vector<double> admissions;  ///< a_k, files/slot
  SubsetVector combinations;       ///< sigma_J, groups/slot, by mask
  SubsetVector point_weights;      ///< weights of the (K+1)-th candidate point
  /// Mixture over the K+1 candidates given the slot's channel; must sum to 1.
  std::function<std::vector<double>(const ChannelState&)> mixture;

  int num_users() const { return static_cast<int>(admissions.size()); }

  /// Same mixture in every channel state.
  static std::function<std::vector<double>(const ChannelState&)> constant_mixture(std::vector<double> psi) {
    return [psi = std::move(psi)](const ChannelState&) { return psi; };
  }
};

/// The K+1 candidate rate points for one channel state.
inline std::vector<RatePoint> candidate_points(const ChannelState& h, double power,
                                               std::span<const double> point_weights) {
  const int K = h.num_users();
  const auto order = gain_order(h);
  std::vector<RatePoint> out;
  out.reserve(K + 1);
  for (int k = 0; k < K; ++k) {
    RatePoint p{SubsetVector(subset_slots(K), 0.0), std::vector<double>(K, 0.0)};
    const auto pos = std::find(order.begin(), order.end(), k) - order.begin();
    // Full power on k's layer; stronger layers get nothing, so k sees no interference.
    p.power_fractions[pos] = 1.0;
    p.rates[Mask{1} << k] = std::log2(1.0 + h.gains[k] * power);
    out.push_back(std::move(p));
  }
  const RateAllocation wsr = max_weighted_rate(h, power, point_weights);
  out.push_back({wsr.subset_rates, wsr.power_fractions});
  return out;
}

struct RateEstimate {
  SubsetVector mean;            ///< bits/use by mask
  SubsetVector standard_error;  ///< of the mean
  std::uint64_t samples = 0;
  std::uint64_t region_violations = 0;  ///< candidate points outside the capacity region
};

/**
 * Average service rate of the static policy, estimated over `samples`
 * independent fading states. Each sample contributes the psi-weighted average
 * of its candidate points, which is an unbiased estimate of the mixture rate.
 */
inline RateEstimate monte_carlo_avg_rate(const StaticPolicySpec& spec, const ChannelParams& channel,
                                         std::uint64_t samples, std::uint64_t seed) {
  if (samples < 1) throw std::invalid_argument("monte_carlo_avg_rate: samples must be >= 1");
  const int K = channel.num_users;
  const FadingChannel fading(channel, seed);
  const std::size_t slots = subset_slots(K);
  RateEstimate est;
  est.samples = samples;
  est.mean.assign(slots, 0.0);
  SubsetVector sum_sq(slots, 0.0);
  for (std::uint64_t i = 0; i < samples; ++i) {
    const ChannelState h = fading.sample(i);
    const auto points = candidate_points(h, channel.power, spec.point_weights);
    const auto psi = spec.mixture(h);
    if (psi.size() != points.size()) throw std::invalid_argument("monte_carlo_avg_rate: mixture must have K+1 entries");
    SubsetVector x(slots, 0.0);
    for (std::size_t l = 0; l < points.size(); ++l) {
      if (!region_contains(h, channel.power, points[l].rates, points[l].power_fractions)) ++est.region_violations;
      for (std::size_t I = 1; I < slots; ++I) x[I] += psi[l] * points[l].rates[I];
    }
    for (std::size_t I = 1; I < slots; ++I) {
      est.mean[I] += x[I];
      sum_sq[I] += x[I] * x[I];
    }
  }
  const double n = static_cast<double>(samples);
  est.standard_error.assign(slots, 0.0);
  for (std::size_t I = 1; I < slots; ++I) {
    est.mean[I] /= n;
    if (samples > 1) {
      const double var = std::max(0.0, (sum_sq[I] - n * est.mean[I] * est.mean[I]) / (n - 1.0));
      est.standard_error[I] = std::sqrt(var / n);
    }
  }
  return est;
}

struct FeasibilityReport {
  std::vector<double> combine_slack;  ///< sum_{J ni k} sigma_J - a_k, files/slot
  SubsetVector transmit_slack;        ///< T_slot mu_I - sum_{J >= I} b(J,I) F sigma_J, bits/slot

  bool feasible() const {
    for (double s : combine_slack)
      if (s < 0.0) return false;
    for (std::size_t I = 1; I < transmit_slack.size(); ++I)
      if (transmit_slack[I] < 0.0) return false;
    return true;
  }

  double min_slack_bits() const {
    double m = INFINITY;
    for (std::size_t I = 1; I < transmit_slack.size(); ++I) m = std::min(m, transmit_slack[I]);
    return m;
  }
};

inline FeasibilityReport check_feasibility(const StaticPolicySpec& spec, std::span<const double> avg_rates,
                                           const CacheParams& cache, int slot_length) {
  const int K = spec.num_users();
  const std::size_t slots = subset_slots(K);
  if (spec.combinations.size() != slots || avg_rates.size() != slots)
    throw std::invalid_argument("check_feasibility: per-subset vectors must have 2^K entries");
  FeasibilityReport r;
  r.combine_slack.assign(K, 0.0);
  for (int k = 0; k < K; ++k) r.combine_slack[k] = -spec.admissions[k];
  for (Mask J = 1; J < slots; ++J)
    for_each_member(J, [&](int k) { r.combine_slack[k] += spec.combinations[J]; });

  const double F = static_cast<double>(cache.file_size);
  r.transmit_slack.assign(slots, 0.0);
  for (Mask I = 1; I < slots; ++I) r.transmit_slack[I] = slot_length * avg_rates[I];
  for (Mask J = 1; J < slots; ++J) {
    if (spec.combinations[J] == 0.0) continue;
    for_each_nonempty_submask(J, [&](Mask I) {
      r.transmit_slack[I] -= codeword_load(cache.normalized_memory, popcount(J), popcount(I)) * F *
                             spec.combinations[J];
    });
  }
  return r;
}

/**
 * Fluid queues under the static policy: S in files, Q in bits. Returns the
 * total backlog sum S + sum Q / F after every slot.
 */
inline std::vector<double> simulate_static(const StaticPolicySpec& spec, const ChannelParams& channel,
                                           const CacheParams& cache, std::uint64_t slots, std::uint64_t seed) {
  const int K = channel.num_users;
  const std::size_t n_sub = subset_slots(K);
  const FadingChannel fading(channel, seed);
  CounterRng pick(seed, Stream::kPolicyMixture);
  const double F = static_cast<double>(cache.file_size);
  const double m = cache.normalized_memory;

  SubsetVector arrivals(n_sub, 0.0);
  for (Mask J = 1; J < n_sub; ++J) {
    if (spec.combinations[J] == 0.0) continue;
    for_each_nonempty_submask(J, [&](Mask I) {
      arrivals[I] += codeword_load(m, popcount(J), popcount(I)) * F * spec.combinations[J];
    });
  }
  std::vector<double> drain(K, 0.0);
  for (Mask J = 1; J < n_sub; ++J) for_each_member(J, [&](int k) { drain[k] += spec.combinations[J]; });

  std::vector<double> S(K, 0.0);
  SubsetVector Q(n_sub, 0.0);
  std::vector<double> backlog;
  backlog.reserve(slots);
  for (std::uint64_t t = 0; t < slots; ++t) {
    const ChannelState h = fading.sample(t);
    const auto points = candidate_points(h, channel.power, spec.point_weights);
    const auto psi = spec.mixture(h);
    double u = pick.uniform();
    std::size_t l = 0;
    while (l + 1 < psi.size() && u >= psi[l]) u -= psi[l++];
    double total = 0.0;
    for (int k = 0; k < K; ++k) {
      S[k] = std::max(0.0, S[k] - drain[k]) + spec.admissions[k];
      total += S[k];
    }
    for (Mask I = 1; I < n_sub; ++I) {
      Q[I] = std::max(0.0, Q[I] - channel.slot_length * points[l].rates[I]) + arrivals[I];
      total += Q[I] / F;
    }
    backlog.push_back(total);
  }
  return backlog;
}

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

/// Least-squares line through (i, y_i).
inline LinearFit fit_line(std::span<const double> y) {
  const double n = static_cast<double>(y.size());
  if (y.size() < 2) return {};
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double x = static_cast<double>(i);
    sx += x;
    sy += y[i];
    sxx += x * x;
    sxy += x * y[i];
    syy += y[i] * y[i];
  }
  LinearFit f;
  const double vx = n * sxx - sx * sx;
  const double vy = n * syy - sy * sy;
  f.slope = (n * sxy - sx * sy) / vx;
  f.intercept = (sy - f.slope * sx) / n;
  f.r_squared = vy > 0.0 ? (n * sxy - sx * sy) * (n * sxy - sx * sy) / (vx * vy) : 0.0;
  return f;
}

}  // namespace afcc
