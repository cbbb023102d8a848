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
 * @file bc_capacity.hpp
 * @brief Degraded Gaussian broadcast channel with one independent message per
 *        nonempty user subset: region membership, weight reduction and the
 *        exact weighted-sum-rate power allocation.
 *
 * With users ordered by decreasing gain, user k decodes every message whose
 * weakest member is k on its own superposition layer. Layer k occupies the
 * power interval [s_{k-1}, s_k] with s_k = P * (alpha_1 + ... + alpha_k), and
 * carries
 *
 *     C_k = log2((1 + h_k s_k) / (1 + h_k s_{k-1}))
 *         = integral over the layer of dz / (ln 2 * (1/h_k + z)).
 *
 * Maximizing a weighted sum of subset rates therefore reduces to giving each
 * layer the largest weight among the subsets it may carry, and then assigning
 * every power level z in [0, P] to the layer with the largest marginal
 * utility w_k / (1/h_k + z). Two such hyperbolas cross at most once, so an
 * exact sweep over pairwise crossings yields the optimal split.
 *
 * All rates are in bits per channel use.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include "afcc/channel.hpp"
#include "afcc/subset.hpp"

namespace afcc {

/// Per-subset values indexed by mask; index 0 unused.
using SubsetVector = std::vector<double>;

/// Users sorted by gain, strongest first; ties broken by lower user id.
inline std::vector<int> gain_order(std::span<const double> gains) {
  std::vector<int> order(gains.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return gains[a] > gains[b]; });
  return order;
}

inline std::vector<int> gain_order(const ChannelState& h) { return gain_order(h.gains); }

/// Capacity of the layer spanning cumulative power [below, below + own].
inline double layer_rate(double gain, double below, double own) {
  return std::log2((1.0 + gain * (below + own)) / (1.0 + gain * below));
}

/**
 * True iff `rates` lies in the capacity region for power split `power_fractions`.
 *
 * `power_fractions` is indexed by position in gain_order(h). Each cumulative
 * layer inequality is checked with absolute slack `tol`.
 */
inline bool region_contains(const ChannelState& h, double power, std::span<const double> rates,
                            std::span<const double> power_fractions, double tol = 1e-9) {
  const int K = h.num_users();
  if (rates.size() != subset_slots(K) || static_cast<int>(power_fractions.size()) != K) return false;
  double alpha_sum = 0.0;
  for (double a : power_fractions) {
    if (a < -tol) return false;
    alpha_sum += a;
  }
  if (alpha_sum > 1.0 + tol) return false;
  for (std::size_t mask = 1; mask < rates.size(); ++mask)
    if (rates[mask] < -tol) return false;

  const auto order = gain_order(h);
  Mask top = 0;
  double below = 0.0;
  for (int p = 0; p < K; ++p) {
    const int user = order[p];
    const double own = std::max(0.0, power_fractions[p]) * power;
    const double bound = layer_rate(h.gains[user], below, own);
    below += own;
    const Mask self = Mask{1} << user;
    double load = rates[self];
    for_each_nonempty_submask(top, [&](Mask sub) { load += rates[sub | self]; });
    top |= self;
    if (load > bound + tol) return false;
  }
  return true;
}

/// Per-layer weights: the best weight each gain-ordered position may carry.
struct ReducedWeights {
  std::vector<double> weight;          ///< indexed by gain-order position
  std::vector<SubsetIndex> best_subset;  ///< achieving subset per position
};

/**
 * For each position p of `order`, the maximum of theta over subsets that
 * contain order[p] and are contained in the first p+1 users of `order`.
 * Ties go to the smallest subset, then the smallest mask.
 */
inline ReducedWeights reduce_weights(std::span<const double> theta, std::span<const int> order) {
  const int K = static_cast<int>(order.size());
  if (theta.size() != subset_slots(K)) throw std::invalid_argument("reduce_weights: theta size != 2^K");
  ReducedWeights out;
  out.weight.resize(K);
  out.best_subset.resize(K);
  Mask top = 0;
  for (int p = 0; p < K; ++p) {
    const Mask self = Mask{1} << order[p];
    Mask best = self;
    double best_w = theta[self];
    auto consider = [&](Mask cand) {
      const double w = theta[cand];
      if (w > best_w) {
        best = cand;
        best_w = w;
      } else if (w == best_w) {
        const int cs = popcount(cand), bs = popcount(best);
        if (cs < bs || (cs == bs && cand < best)) best = cand;
      }
    };
    for_each_nonempty_submask(top, [&](Mask sub) { consider(sub | self); });
    top |= self;
    out.weight[p] = best_w;
    out.best_subset[p] = SubsetIndex(best);
  }
  return out;
}

struct PowerSplit {
  std::vector<double> fractions;  ///< alpha per layer; sums to 1 unless idle
  double lagrange_multiplier = 0.0;
};

/**
 * Maximizes sum_k w_k * C_k over the power simplex.
 *
 * `gains` must be strictly positive and sorted non-increasing; `weights` are
 * the matching per-layer weights. All-zero weights give the idle split.
 */
inline PowerSplit solve_power_allocation(std::span<const double> gains, double power,
                                         std::span<const double> weights) {
  const std::size_t n = gains.size();
  if (weights.size() != n) throw std::invalid_argument("solve_power_allocation: size mismatch");
  if (!(power > 0.0)) throw std::invalid_argument("solve_power_allocation: power must be positive");
  for (std::size_t i = 0; i < n; ++i) {
    if (!(gains[i] > 0.0)) throw std::invalid_argument("solve_power_allocation: gains must be positive");
    if (i > 0 && gains[i] > gains[i - 1])
      throw std::invalid_argument("solve_power_allocation: gains must be sorted in decreasing order");
    if (weights[i] < 0.0) throw std::invalid_argument("solve_power_allocation: negative weight");
  }
  PowerSplit out;
  out.fractions.assign(n, 0.0);
  if (n == 0 || std::all_of(weights.begin(), weights.end(), [](double w) { return w == 0.0; }))
    return out;

  std::vector<double> offset(n);
  for (std::size_t i = 0; i < n; ++i) offset[i] = 1.0 / gains[i];

  std::vector<double> cuts{0.0, power};
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (weights[i] == weights[j]) continue;
      const double z = (weights[i] * offset[j] - weights[j] * offset[i]) / (weights[j] - weights[i]);
      if (z > 0.0 && z < power) cuts.push_back(z);
    }
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  auto leader = [&](double z) {
    std::size_t best = 0;
    double best_u = weights[0] / (offset[0] + z);
    for (std::size_t i = 1; i < n; ++i) {
      const double u = weights[i] / (offset[i] + z);
      if (u > best_u) {
        best = i;
        best_u = u;
      }
    }
    return best;
  };
  for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
    const double width = cuts[c + 1] - cuts[c];
    if (width <= 0.0) continue;
    out.fractions[leader(0.5 * (cuts[c] + cuts[c + 1]))] += width / power;
  }

  for (std::size_t i = 0; i < n; ++i)
    out.lagrange_multiplier = std::max(out.lagrange_multiplier, weights[i] / (offset[i] + power));
  return out;
}

/// Weighted layered objective sum_k w_k C_k for sorted gains and a power split.
inline double layered_objective(std::span<const double> gains, double power,
                                std::span<const double> weights, std::span<const double> fractions) {
  double below = 0.0, total = 0.0;
  for (std::size_t k = 0; k < gains.size(); ++k) {
    const double own = fractions[k] * power;
    if (weights[k] != 0.0) total += weights[k] * layer_rate(gains[k], below, own);
    below += own;
  }
  return total;
}

struct RateAllocation {
  std::vector<int> ordering;             ///< users by decreasing gain
  std::vector<double> power_fractions;   ///< per position in `ordering`
  std::vector<double> layer_rates;       ///< per position, bits/use
  std::vector<SubsetIndex> layer_target; ///< subset each layer's rate is given to
  SubsetVector subset_rates;             ///< mu_J by mask, bits/use
  double objective = 0.0;
  double lagrange_multiplier = 0.0;

  static RateAllocation idle(int num_users) {
    RateAllocation r;
    r.ordering.resize(num_users);
    std::iota(r.ordering.begin(), r.ordering.end(), 0);
    r.power_fractions.assign(num_users, 0.0);
    r.layer_rates.assign(num_users, 0.0);
    r.layer_target.resize(num_users);
    r.subset_rates.assign(subset_slots(num_users), 0.0);
    return r;
  }

  double total_rate() const { return std::accumulate(subset_rates.begin(), subset_rates.end(), 0.0); }
};

/**
 * argmax over the capacity region of sum_J theta_J r_J.
 *
 * Users with zero gain get no power and no rate; subsets containing them can
 * only receive rate through layers of positive-gain users, which never carry
 * such subsets.
 */
inline RateAllocation max_weighted_rate(const ChannelState& h, double power, std::span<const double> theta) {
  const int K = h.num_users();
  if (theta.size() != subset_slots(K)) throw std::invalid_argument("max_weighted_rate: theta size != 2^K");
  RateAllocation out = RateAllocation::idle(K);
  out.ordering = gain_order(h);
  const auto reduced = reduce_weights(theta, out.ordering);
  out.layer_target = reduced.best_subset;

  int positive = 0;
  while (positive < K && h.gains[out.ordering[positive]] > 0.0) ++positive;
  if (positive == 0) return out;

  std::vector<double> gains(positive);
  for (int p = 0; p < positive; ++p) gains[p] = h.gains[out.ordering[p]];
  const std::span<const double> weights(reduced.weight.data(), positive);
  const PowerSplit split = solve_power_allocation(gains, power, weights);
  out.lagrange_multiplier = split.lagrange_multiplier;

  double below = 0.0;
  for (int p = 0; p < positive; ++p) {
    const double own = split.fractions[p] * power;
    out.power_fractions[p] = split.fractions[p];
    if (own > 0.0) {
      const double rate = layer_rate(gains[p], below, own);
      out.layer_rates[p] = rate;
      out.subset_rates[reduced.best_subset[p].mask()] += rate;
      out.objective += weights[p] * rate;
    }
    below += own;
  }
  return out;
}

}  // namespace afcc
