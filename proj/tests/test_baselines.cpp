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

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "afcc/baselines.hpp"
#include "afcc/caching.hpp"
#include "afcc/channel.hpp"

namespace afcc {
namespace {

TEST(Opportunistic, ServesExactlyOneUserPerSlot) {
  const FadingChannel ch(ChannelParams::two_class(4, 10.0, 100), 1);
  OpportunisticScheduler s(4, 400.0, 100);
  std::vector<double> bits(4, 0.0);
  std::vector<long> done(4, 0);
  for (int t = 0; t < 20000; ++t) {
    const auto out = s.step(ch.sample(t), 10.0, 1.0);
    ASSERT_GE(out.served_user, 0);
    ASSERT_LT(out.served_user, 4);
    bits[out.served_user] += out.bits;
    for (int k = 0; k < 4; ++k) done[k] += out.completed[k];
  }
  for (int k = 0; k < 4; ++k) {
    // Delivered bits equal whole files plus the in-flight residual.
    EXPECT_NEAR(bits[k], done[k] * 400.0 + (400.0 - s.residual(k)), 1e-6);
  }
}

TEST(Opportunistic, MaxRateWhenAlphaZero) {
  OpportunisticScheduler s(3, 1000.0, 10);
  const auto out = s.step({{0.5, 3.0, 1.0}, 0}, 10.0, 0.0);
  EXPECT_EQ(out.served_user, 1);
  EXPECT_NEAR(out.bits, 10.0 * std::log2(31.0), 1e-12);
}

TEST(Opportunistic, InitialAverageIsFloor) {
  OpportunisticScheduler s(2, 1000.0, 10);
  EXPECT_EQ(s.average_rate(0), OpportunisticScheduler::kInitialRate);
  s.step({{1.0, 1.0}, 0}, 10.0, 1.0);
  EXPECT_GT(s.average_rate(0), OpportunisticScheduler::kInitialRate);
  EXPECT_EQ(s.average_rate(1), OpportunisticScheduler::kInitialRate);
}

TEST(Opportunistic, ProportionalFairEqualizesSymmetricUsers) {
  const FadingChannel ch({2, {1.0, 1.0}, 10.0, 100}, 4);
  OpportunisticScheduler s(2, 400.0, 100);
  std::vector<long> served(2, 0);
  for (int t = 0; t < 50000; ++t) ++served[s.step(ch.sample(t), 10.0, 1.0).served_user];
  EXPECT_NEAR(static_cast<double>(served[0]) / 50000.0, 0.5, 0.02);
}

TEST(Opportunistic, Deterministic) {
  const FadingChannel ch(ChannelParams::two_class(3, 10.0, 100), 8);
  OpportunisticScheduler a(3, 400.0, 100), b(3, 400.0, 100);
  for (int t = 0; t < 1000; ++t) EXPECT_EQ(a.step(ch.sample(t), 10.0, 1.0).served_user, b.step(ch.sample(t), 10.0, 1.0).served_user);
}

TEST(Tdma, RoundBitsMatchTotalLoad) {
  for (int K = 1; K <= 8; ++K) {
    const CacheParams c{0.6, 1000, K};
    const TdmaCodedCaching t(c, 100);
    EXPECT_NEAR(static_cast<double>(t.round_bits()), total_load(0.6, K) * 1000.0, 0.05 * total_load(0.6, K) * 1000.0);
  }
}

TEST(Tdma, CountsWholeRounds) {
  const CacheParams c{0.6, 1000, 3};
  const FadingChannel ch(ChannelParams::two_class(3, 10.0, 100), 2);
  TdmaCodedCaching t(c, 100);
  double bits = 0.0;
  long rounds = 0;
  for (int s = 0; s < 5000; ++s) {
    const auto out = t.step(ch.sample(s), 10.0);
    bits += out.bits;
    rounds += out.rounds_completed;
  }
  double pending = 0.0;
  for (const auto& cw : t.pending()) pending += cw.residual_bits;
  const double in_flight = t.pending().empty() ? 0.0 : static_cast<double>(t.round_bits()) - pending;
  EXPECT_NEAR(bits, rounds * static_cast<double>(t.round_bits()) + in_flight, 1e-6);
  EXPECT_GT(rounds, 0);
}

TEST(Tdma, StallsOnDeadChannel) {
  const CacheParams c{0.6, 1000, 2};
  TdmaCodedCaching t(c, 100);
  // The first codeword goes to user 1; user 2's codeword then waits for a usable channel.
  const auto out = t.step({{1.0, 0.0}, 0}, 10.0);
  EXPECT_EQ(out.bits, 160.0);
  ASSERT_FALSE(t.pending().empty());
  EXPECT_EQ(t.pending().front().target, 0b10u);
  EXPECT_EQ(t.step({{1.0, 0.0}, 1}, 10.0).bits, 0.0);
}

}  // namespace
}  // namespace afcc
