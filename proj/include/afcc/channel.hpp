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
 * @file channel.hpp
 * @brief I.i.d. block-fading Gaussian broadcast channel and the library's
 *        counter-based random streams.
 *
 * Every random draw is a pure function of (seed, stream, lane, counter), so
 * a run is reproducible regardless of the order in which users or slots are
 * evaluated, and independent runs never share generator state.
 */
#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace afcc {

namespace detail {

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t hash_key(std::uint64_t seed, std::uint64_t stream, std::uint64_t lane,
                                 std::uint64_t counter) {
  return mix64(mix64(mix64(mix64(seed) ^ stream) ^ lane) ^ counter);
}

}  // namespace detail

/// Well-known stream ids, so that different consumers of one run seed never overlap.
enum class Stream : std::uint64_t {
  kFading = 1,
  kPolicyMixture = 2,
  kPlacementOracle = 3,
  kTest = 4,
};

/// Counter-based source of uniforms in [0,1); satisfies UniformRandomBitGenerator.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  CounterRng(std::uint64_t seed, Stream stream, std::uint64_t lane = 0)
      : seed_(seed), stream_(static_cast<std::uint64_t>(stream)), lane_(lane) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() { return detail::hash_key(seed_, stream_, lane_, counter_++); }

  /// Uniform on [0,1) with 53 random bits.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  /// Random access without advancing the counter.
  double uniform_at(std::uint64_t counter) const {
    return static_cast<double>(detail::hash_key(seed_, stream_, lane_, counter) >> 11) * 0x1.0p-53;
  }

  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t lane_;
  std::uint64_t counter_ = 0;
};

/// Unit-mean exponential by inversion, -ln(1-u).
inline double unit_exponential(double u) { return -std::log1p(-u); }

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

struct ChannelParams {
  int num_users = 1;
  std::vector<double> pathloss;  ///< amplitude scale beta_k; mean power gain is beta_k^2
  double power = 1.0;            ///< linear transmit power constraint
  int slot_length = 1;           ///< channel uses per slot

  void validate() const {
    if (num_users < 1) throw std::invalid_argument("ChannelParams: num_users must be >= 1");
    if (static_cast<int>(pathloss.size()) != num_users)
      throw std::invalid_argument("ChannelParams: pathloss needs exactly num_users entries");
    for (double b : pathloss)
      if (!(b > 0.0) || !std::isfinite(b))
        throw std::invalid_argument("ChannelParams: every pathloss must be positive and finite");
    if (!(power > 0.0) || !std::isfinite(power))
      throw std::invalid_argument("ChannelParams: power must be positive");
    if (slot_length < 1) throw std::invalid_argument("ChannelParams: slot_length must be >= 1");
  }

  /// First ceil(K/2) users strong (beta = strong), remainder weak.
  static ChannelParams two_class(int num_users, double power, int slot_length,
                                 double strong = 1.0, double weak = 0.2) {
    ChannelParams p;
    p.num_users = num_users;
    p.power = power;
    p.slot_length = slot_length;
    const int num_strong = (num_users + 1) / 2;
    for (int k = 0; k < num_users; ++k) p.pathloss.push_back(k < num_strong ? strong : weak);
    p.validate();
    return p;
  }
};

struct ChannelState {
  std::vector<double> gains;  ///< power gains h_k >= 0
  std::uint64_t slot = 0;

  int num_users() const { return static_cast<int>(gains.size()); }
};

/// Fading process with h_k(t) = beta_k^2 * Exp(1), i.i.d. over users and slots.
class FadingChannel {
 public:
  FadingChannel(ChannelParams params, std::uint64_t seed) : params_(std::move(params)), seed_(seed) {
    params_.validate();
  }

  const ChannelParams& params() const { return params_; }
  std::uint64_t seed() const { return seed_; }

  ChannelState sample(std::uint64_t slot) const {
    ChannelState state;
    state.slot = slot;
    state.gains.resize(params_.num_users);
    for (int k = 0; k < params_.num_users; ++k) {
      const CounterRng lane(seed_, Stream::kFading, static_cast<std::uint64_t>(k));
      const double beta = params_.pathloss[k];
      state.gains[k] = beta * beta * unit_exponential(lane.uniform_at(slot));
    }
    return state;
  }

  /// Sequential convenience; equivalent to sample(0), sample(1), ...
  ChannelState next() { return sample(next_slot_++); }

 private:
  ChannelParams params_;
  std::uint64_t seed_;
  std::uint64_t next_slot_ = 0;
};

}  // namespace afcc
