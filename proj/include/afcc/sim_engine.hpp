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
 * @file sim_engine.hpp
 * @brief Slot loop, per-file delivery tracking and run metrics.
 */
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <deque>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "afcc/baselines.hpp"
#include "afcc/caching.hpp"
#include "afcc/channel.hpp"
#include "afcc/policy_lyapunov.hpp"

namespace afcc {

enum class PolicyKind { kLyapunov, kUnicastOpportunistic, kTdmaCodedCaching };

inline std::string_view to_string(PolicyKind k) {
  switch (k) {
    case PolicyKind::kLyapunov: return "lyapunov";
    case PolicyKind::kUnicastOpportunistic: return "unicast-opp";
    case PolicyKind::kTdmaCodedCaching: return "tdma-cc";
  }
  return "unknown";
}

inline PolicyKind parse_policy_kind(std::string_view name) {
  if (name == "lyapunov") return PolicyKind::kLyapunov;
  if (name == "unicast-opp") return PolicyKind::kUnicastOpportunistic;
  if (name == "tdma-cc") return PolicyKind::kTdmaCodedCaching;
  throw std::invalid_argument("unknown policy '" + std::string(name) +
                              "' (expected lyapunov, unicast-opp or tdma-cc)");
}

struct SimConfig {
  ChannelParams channel;
  CacheParams cache;
  PolicyParams policy;
  PolicyKind kind = PolicyKind::kLyapunov;
  std::uint64_t slots = 1000;
  std::uint64_t seed = 1;
  double warmup_fraction = 0.1;
  std::uint64_t window = 1000;

  void validate() const {
    channel.validate();
    cache.validate();
    policy.validate();
    if (cache.num_users != channel.num_users)
      throw std::invalid_argument("SimConfig: cache.num_users must equal channel.num_users");
    if (slots < 1) throw std::invalid_argument("SimConfig: slots must be >= 1");
    if (!(warmup_fraction >= 0.0 && warmup_fraction < 1.0))
      throw std::invalid_argument("SimConfig: warmup_fraction must lie in [0,1)");
    if (window < 1) throw std::invalid_argument("SimConfig: window must be >= 1");
  }

  std::uint64_t warmup_slots() const {
    return static_cast<std::uint64_t>(std::floor(warmup_fraction * static_cast<double>(slots)));
  }
};

/// Sums over the slots of one trace window; queue sums use start-of-slot state.
struct WindowRecord {
  std::uint64_t start_slot = 0;
  std::uint64_t length = 0;
  std::vector<double> admitted;   ///< files, per user
  std::vector<double> delivered;  ///< files, per user
  double sum_S = 0.0;
  double sum_Q_files = 0.0;
  double sum_U = 0.0;

  std::uint64_t end_slot() const { return start_slot + length; }
};

struct RunSummary {
  PolicyKind kind = PolicyKind::kLyapunov;
  int num_users = 0;
  double V = 0.0;
  double alpha = 0.0;
  double d = 0.0;
  std::uint64_t seed = 0;
  std::uint64_t slots = 0;
  std::uint64_t measured_slots = 0;
  std::vector<double> admitted_rate;   ///< files/slot
  std::vector<double> delivered_rate;  ///< files/slot
  std::vector<double> total_admitted;  ///< whole run, files
  std::vector<double> total_delivered;
  double sum_delivered_rate = 0.0;
  double sum_utility = 0.0;
  double mean_S = 0.0;
  double mean_Q_files = 0.0;
  double mean_U = 0.0;
  double mean_total_queue = 0.0;  ///< S + Q/F, files
};

struct RunDiagnostics {
  std::uint64_t files_delivered = 0;
  std::uint64_t conservation_violations = 0;  ///< delivered files whose drained bits != round((1-m)F)
  std::uint64_t counter_mismatches = 0;       ///< slots where Q counters disagreed with tracked segments
};

struct RunResult {
  RunSummary summary;
  std::vector<WindowRecord> windows;
  RunDiagnostics diagnostics;
};

/**
 * Physical side of the Lyapunov policy: which files sit in each user queue,
 * which XOR segments sit in each codeword queue, and when each file's last
 * segment drains.
 */
class DeliveryTracker {
 public:
  struct FileRecord {
    int owner = 0;
    FileTag tag;
    std::uint64_t admitted_slot = 0;
    int segments_left = 0;
    std::int64_t bits_drained = 0;
  };

  struct Delivery {
    int owner;
    FileTag tag;
    std::uint64_t admitted_slot;
    std::uint64_t delivered_slot;
    std::int64_t bits;
  };

  DeliveryTracker(const CacheParams& cache, const SegmentSizeTable& sizes)
      : num_users_(cache.num_users), expected_bits_(useful_bits(cache)), sizes_(sizes),
        pending_(cache.num_users), queues_(subset_slots(cache.num_users)),
        queue_bits_(subset_slots(cache.num_users), 0) {}

  /// Brings user k's pending whole-file count up to `whole`.
  void materialize(int k, std::int64_t whole, std::uint64_t slot) {
    while (static_cast<std::int64_t>(pending_[k].size()) < whole) {
      const FileTag tag{next_tag_++};
      files_.emplace(tag.id, FileRecord{k, tag, slot, 0, 0});
      pending_[k].push_back(tag);
    }
  }

  /// Combines `count` head-of-line requests of every member of `group`.
  void combine(Mask group, int count, std::uint64_t slot) {
    const int j = popcount(group);
    for (int c = 0; c < count; ++c) {
      Group g;
      g.members = group;
      for_each_member(group, [&](int k) {
        if (pending_[k].empty()) throw std::logic_error("DeliveryTracker: combining a missing file");
        g.file_of[k] = pending_[k].front().id;
        pending_[k].pop_front();
      });
      const std::uint64_t gid = next_group_++;
      for_each_nonempty_submask(group, [&](Mask I) {
        const std::int64_t bits = sizes_.bits(j, popcount(I));
        if (bits <= 0) return;
        queues_[I].push_back({bits, bits, gid});
        queue_bits_[I] += bits;
        ++g.segments_left;
        for_each_member(I, [&](int k) { ++files_.at(g.file_of[k]).segments_left; });
      });
      if (g.segments_left > 0) {
        groups_.emplace(gid, g);
      }
      // Files with nothing to receive (m = 1) are complete at combination.
      for_each_member(group, [&](int k) {
        auto it = files_.find(g.file_of[k]);
        if (it->second.segments_left == 0) finish(it, slot);
      });
    }
  }

  /// Drains up to `bits` from queue I in FIFO order.
  void serve(Mask I, std::int64_t bits, std::uint64_t slot) {
    auto& q = queues_[I];
    while (bits > 0 && !q.empty()) {
      QueuedSegment& head = q.front();
      const std::int64_t take = std::min(bits, head.remaining);
      head.remaining -= take;
      queue_bits_[I] -= take;
      bits -= take;
      if (head.remaining > 0) break;
      auto git = groups_.find(head.group);
      Group& g = git->second;
      for_each_member(I, [&](int k) {
        auto fit = files_.find(g.file_of[k]);
        fit->second.bits_drained += head.size;
        if (--fit->second.segments_left == 0) finish(fit, slot);
      });
      if (--g.segments_left == 0) groups_.erase(git);
      q.pop_front();
    }
  }

  std::vector<Delivery> take_deliveries() { return std::exchange(deliveries_, {}); }

  std::int64_t queue_bits(Mask I) const { return queue_bits_[I]; }
  std::size_t pending_files(int k) const { return pending_[k].size(); }
  std::size_t files_in_flight() const { return files_.size(); }
  std::uint64_t conservation_violations() const { return violations_; }

 private:
  struct Group {
    Mask members = 0;
    int segments_left = 0;
    std::array<std::uint64_t, kMaxUsers> file_of{};
  };
  struct QueuedSegment {
    std::int64_t size;
    std::int64_t remaining;
    std::uint64_t group;
  };

  void finish(std::unordered_map<std::uint64_t, FileRecord>::iterator it, std::uint64_t slot) {
    const FileRecord& f = it->second;
    if (f.bits_drained != expected_bits_) ++violations_;
    deliveries_.push_back({f.owner, f.tag, f.admitted_slot, slot, f.bits_drained});
    files_.erase(it);
  }

  int num_users_;
  std::int64_t expected_bits_;
  SegmentSizeTable sizes_;
  std::uint64_t next_tag_ = 0;
  std::uint64_t next_group_ = 0;
  std::uint64_t violations_ = 0;
  std::vector<std::deque<FileTag>> pending_;
  std::vector<std::deque<QueuedSegment>> queues_;
  std::vector<std::int64_t> queue_bits_;
  std::unordered_map<std::uint64_t, FileRecord> files_;
  std::unordered_map<std::uint64_t, Group> groups_;
  std::vector<Delivery> deliveries_;
};

/**
 * Aggregates trace windows into a summary.
 *
 * Windows that start before `warmup_slots` are excluded from the rate and
 * queue averages; if that leaves nothing, every window is used. Whole-run
 * totals always cover every window.
 */
inline RunSummary summarize(const std::vector<WindowRecord>& windows, std::uint64_t warmup_slots,
                            const PolicyParams& policy) {
  if (windows.empty()) throw std::invalid_argument("summarize: empty trace");
  const std::size_t K = windows.front().admitted.size();
  RunSummary s;
  s.num_users = static_cast<int>(K);
  s.V = policy.V;
  s.alpha = policy.alpha;
  s.d = policy.d;
  s.admitted_rate.assign(K, 0.0);
  s.delivered_rate.assign(K, 0.0);
  s.total_admitted.assign(K, 0.0);
  s.total_delivered.assign(K, 0.0);

  const bool any_after = std::any_of(windows.begin(), windows.end(),
                                     [&](const WindowRecord& w) { return w.start_slot >= warmup_slots; });
  for (const auto& w : windows) {
    s.slots += w.length;
    for (std::size_t k = 0; k < K; ++k) {
      s.total_admitted[k] += w.admitted[k];
      s.total_delivered[k] += w.delivered[k];
    }
    if (any_after && w.start_slot < warmup_slots) continue;
    s.measured_slots += w.length;
    for (std::size_t k = 0; k < K; ++k) {
      s.admitted_rate[k] += w.admitted[k];
      s.delivered_rate[k] += w.delivered[k];
    }
    s.mean_S += w.sum_S;
    s.mean_Q_files += w.sum_Q_files;
    s.mean_U += w.sum_U;
  }
  const double n = static_cast<double>(s.measured_slots);
  for (std::size_t k = 0; k < K; ++k) {
    s.admitted_rate[k] /= n;
    s.delivered_rate[k] /= n;
    s.sum_delivered_rate += s.delivered_rate[k];
    s.sum_utility += utility(s.delivered_rate[k], policy.alpha, policy.d);
  }
  s.mean_S /= n;
  s.mean_Q_files /= n;
  s.mean_U /= n;
  s.mean_total_queue = s.mean_S + s.mean_Q_files;
  return s;
}

/// Called once per Lyapunov slot with the pre-update state, decision and post-update state.
using SlotObserver =
    std::function<void(std::uint64_t slot, const QueueState& before, const SlotDecision& decision,
                       const QueueState& after)>;

struct RunOptions {
  SlotObserver observer;                                         ///< Lyapunov only
  std::function<void(const DeliveryTracker::Delivery&)> on_delivery;  ///< Lyapunov only
  bool check_counters = false;  ///< compare Q counters with tracked segment bits every slot
};

namespace detail {

class WindowAccumulator {
 public:
  WindowAccumulator(int num_users, std::uint64_t window) : num_users_(num_users), window_(window) {}

  WindowRecord& at(std::uint64_t slot) {
    if (windows_.empty() || windows_.back().length == window_) {
      WindowRecord w;
      w.start_slot = slot;
      w.admitted.assign(num_users_, 0.0);
      w.delivered.assign(num_users_, 0.0);
      windows_.push_back(std::move(w));
    }
    return windows_.back();
  }

  std::vector<WindowRecord> take() { return std::move(windows_); }

 private:
  int num_users_;
  std::uint64_t window_;
  std::vector<WindowRecord> windows_;
};

inline RunResult run_lyapunov(const SimConfig& cfg, const RunOptions& opt) {
  const int K = cfg.channel.num_users;
  const FadingChannel channel(cfg.channel, cfg.seed);
  const LyapunovController ctl(cfg.policy, cfg.cache, cfg.channel.power, cfg.channel.slot_length);
  DeliveryTracker tracker(cfg.cache, ctl.segment_sizes());
  WindowAccumulator acc(K, cfg.window);
  RunDiagnostics diag;
  const double inv_F = 1.0 / static_cast<double>(cfg.cache.file_size);

  QueueState q = QueueState::empty(K);
  for (std::uint64_t t = 0; t < cfg.slots; ++t) {
    WindowRecord& w = acc.at(t);
    w.sum_S += q.total_S();
    w.sum_Q_files += static_cast<double>(q.total_Q_bits()) * inv_F;
    w.sum_U += q.total_U();

    const ChannelState h = channel.sample(t);
    SlotDecision d = ctl.decide(q, h);
    for (Mask I = 1; I < d.service_bits.size(); ++I)
      if (d.service_bits[I] > 0) tracker.serve(I, d.service_bits[I], t);
    for (Mask J : d.combination_order) tracker.combine(J, d.effective[J], t);
    QueueState next = ctl.apply(q, d);
    for (int k = 0; k < K; ++k) tracker.materialize(k, LyapunovController::whole_files(next.S[k]), t);

    for (const auto& del : tracker.take_deliveries()) {
      w.delivered[del.owner] += 1.0;
      ++diag.files_delivered;
      if (opt.on_delivery) opt.on_delivery(del);
    }
    for (int k = 0; k < K; ++k) w.admitted[k] += d.admissions[k];
    ++w.length;

    if (opt.check_counters) {
      for (Mask I = 1; I < next.Q.size(); ++I)
        if (tracker.queue_bits(I) != next.Q[I]) {
          ++diag.counter_mismatches;
          break;
        }
    }
    if (opt.observer) opt.observer(t, q, d, next);
    q = std::move(next);
  }
  diag.conservation_violations = tracker.conservation_violations();
  RunResult r;
  r.windows = acc.take();
  r.diagnostics = diag;
  return r;
}

inline RunResult run_unicast(const SimConfig& cfg) {
  const int K = cfg.channel.num_users;
  const FadingChannel channel(cfg.channel, cfg.seed);
  const double file_bits = static_cast<double>(useful_bits(cfg.cache));
  OpportunisticScheduler sched(K, file_bits, cfg.channel.slot_length);
  WindowAccumulator acc(K, cfg.window);
  RunDiagnostics diag;
  const double inv_F = 1.0 / static_cast<double>(cfg.cache.file_size);
  for (std::uint64_t t = 0; t < cfg.slots; ++t) {
    WindowRecord& w = acc.at(t);
    double in_flight = 0.0;
    for (int k = 0; k < K; ++k) in_flight += sched.residual(k);
    w.sum_Q_files += in_flight * inv_F;
    const auto out = sched.step(channel.sample(t), cfg.channel.power, cfg.policy.alpha);
    for (int k = 0; k < K; ++k) {
      w.admitted[k] += out.started[k];
      w.delivered[k] += out.completed[k];
      diag.files_delivered += static_cast<std::uint64_t>(out.completed[k]);
    }
    ++w.length;
  }
  RunResult r;
  r.windows = acc.take();
  r.diagnostics = diag;
  return r;
}

inline RunResult run_tdma(const SimConfig& cfg) {
  const int K = cfg.channel.num_users;
  const FadingChannel channel(cfg.channel, cfg.seed);
  TdmaCodedCaching tdma(cfg.cache, cfg.channel.slot_length);
  WindowAccumulator acc(K, cfg.window);
  RunDiagnostics diag;
  const double inv_F = 1.0 / static_cast<double>(cfg.cache.file_size);
  for (std::uint64_t t = 0; t < cfg.slots; ++t) {
    WindowRecord& w = acc.at(t);
    double pending = 0.0;
    for (const auto& c : tdma.pending()) pending += c.residual_bits;
    w.sum_Q_files += pending * inv_F;
    const auto out = tdma.step(channel.sample(t), cfg.channel.power);
    for (int k = 0; k < K; ++k) {
      w.admitted[k] += out.rounds_started;
      w.delivered[k] += out.rounds_completed;
    }
    diag.files_delivered += static_cast<std::uint64_t>(out.rounds_completed) * K;
    ++w.length;
  }
  RunResult r;
  r.windows = acc.take();
  r.diagnostics = diag;
  return r;
}

}  // namespace detail

inline RunResult run(const SimConfig& cfg, const RunOptions& opt = {}) {
  cfg.validate();
  RunResult r;
  switch (cfg.kind) {
    case PolicyKind::kLyapunov: r = detail::run_lyapunov(cfg, opt); break;
    case PolicyKind::kUnicastOpportunistic: r = detail::run_unicast(cfg); break;
    case PolicyKind::kTdmaCodedCaching: r = detail::run_tdma(cfg); break;
  }
  r.summary = summarize(r.windows, cfg.warmup_slots(), cfg.policy);
  r.summary.kind = cfg.kind;
  r.summary.seed = cfg.seed;
  return r;
}

}  // namespace afcc
