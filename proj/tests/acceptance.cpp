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

// Acceptance gate: runs each primary criterion at its stated tolerance and
// prints one PASS/FAIL line per criterion. Exit status is nonzero if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "afcc/afcc.hpp"
#include "oracles.hpp"

namespace {

using namespace afcc;

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

SimConfig reference_setup(int K, PolicyKind kind, double alpha, std::uint64_t seed, std::uint64_t slots) {
  SimConfig c;
  c.channel = ChannelParams::two_class(K, db_to_linear(10.0), 100);
  c.cache = {0.6, 1000, K};
  c.policy.alpha = alpha;
  c.policy.d = 0.01;
  c.policy.sigma_max = 1;
  // Shipped Lyapunov parameters per fairness level (configs/fig4_*.json).
  if (alpha == 0.0) {
    c.policy.V = 1.0;
    c.policy.gamma_max = 1.0;
  } else {
    c.policy.V = 0.1;
    c.policy.gamma_max = 0.5;
  }
  c.kind = kind;
  c.slots = slots;
  c.seed = seed;
  return c;
}

// ---------------------------------------------------------------------------
Outcome load_formulas() {
  Outcome o;
  const double m = 1.0 / 3.0;
  const double coded = total_load(m, 30);
  const double uncoded = uncoded_load(m, 30);
  const double closed = (1.0 / m) * (1.0 - m) * (1.0 - std::pow(1.0 - m, 30));
  const double gain = uncoded / coded;
  o.pass = coded >= 1.999 && coded <= 2.0 && std::abs(uncoded - 20.0) <= 1e-9 && gain >= 9.99 &&
           std::abs(coded - closed) <= 1e-9;
  o.detail = fmt("T_tot=%.9f uncoded=%.9f gain=%.5f |T_tot-closed|=%.1e", coded, uncoded, gain,
                 std::abs(coded - closed));
  return o;
}

// ---------------------------------------------------------------------------
// Table I: K=3, user 1 requests W8 and user 2 requests W1 (combined, J={1,2});
// user 1 also requests W4 served uncoded (J={1}).
std::map<Mask, std::set<std::pair<int, Mask>>> table_one_by_cache_sets() {
  std::map<Mask, std::set<std::pair<int, Mask>>> q;  // queue -> {(file, cache set)}
  struct Req {
    int user;
    int file;
    Mask group;
  };
  for (const Req r : {Req{0, 8, 0b011}, Req{1, 1, 0b011}, Req{0, 4, 0b001}})
    for (Mask S = 0; S < 8; ++S) {
      if ((S >> r.user) & 1u) continue;  // cached at the requester
      q[(S & r.group) | (Mask{1} << r.user)].insert({r.file, S});
    }
  return q;
}

Outcome placement_oracle() {
  Outcome o;
  double worst = 0.0;
  std::string worst_at;
  std::uint64_t seed = 100;
  for (int K : {2, 3, 4})
    for (double m : {0.3, 0.5, 0.6}) {
      const auto est = oracle::simulate_placement(K, m, 100000, 20, seed++);
      for (const auto& [key, value] : est.load) {
        const auto [J, I] = key;
        const double b = codeword_load(m, SubsetIndex(J), SubsetIndex(I));
        const double rel = std::abs(value - b) / b;
        if (rel > worst) {
          worst = rel;
          worst_at = fmt("K=%d m=%.1f J=%s I=%s", K, m, SubsetIndex(J).to_string().c_str(),
                         SubsetIndex(I).to_string().c_str());
        }
      }
    }
  o.pass = worst <= 0.02;

  // Table I rows, written out by (file, cache set).
  const std::map<Mask, std::set<std::pair<int, Mask>>> expected{
      {0b001, {{8, 0b000}, {8, 0b100}, {4, 0b000}, {4, 0b010}, {4, 0b100}, {4, 0b110}}},
      {0b010, {{1, 0b000}, {1, 0b100}}},
      {0b011, {{1, 0b001}, {1, 0b101}, {8, 0b010}, {8, 0b110}}}};
  const bool rows_ok = table_one_by_cache_sets() == expected;

  // The library routes the same two combinations to the same three queues.
  const CacheParams cache{0.6, 1000, 3};
  std::set<Mask> lib_queues;
  const std::vector<FileTag> pair{{8}, {1}}, single{{4}};
  for (const auto& s : enumerate_segments(SubsetIndex::of({0, 1}), pair, cache))
    if (s.bits > 0) lib_queues.insert(s.target.mask());
  for (const auto& s : enumerate_segments(SubsetIndex::of({0}), single, cache))
    if (s.bits > 0) lib_queues.insert(s.target.mask());
  const bool queues_ok = lib_queues == std::set<Mask>{0b001, 0b010, 0b011};

  o.pass = o.pass && rows_ok && queues_ok;
  o.detail = fmt("worst rel err %.4f at %s; Table I rows %s; segment queues %s", worst, worst_at.c_str(),
                 rows_ok ? "match" : "DIFFER", queues_ok ? "{1},{2},{1,2}" : "DIFFER");
  return o;
}

// ---------------------------------------------------------------------------
Outcome power_optimality() {
  Outcome o;
  std::mt19937_64 gen(2024);
  std::uniform_real_distribution<double> logh(std::log(0.01), std::log(10.0)), u(0.0, 1.0);
  const double P = db_to_linear(10.0);
  int instances = 0, below = 0, outside = 0;
  double worst = -1.0;
  for (int K : {2, 3, 4})
    for (int trial = 0; trial < 200; ++trial) {
      ChannelState h{std::vector<double>(K), 0};
      for (auto& g : h.gains) g = std::exp(logh(gen));
      std::vector<double> theta(subset_slots(K), 0.0);
      for (std::size_t I = 1; I < theta.size(); ++I) theta[I] = u(gen);
      const auto alloc = max_weighted_rate(h, P, theta);
      if (!region_contains(h, P, alloc.subset_rates, alloc.power_fractions)) ++outside;
      double got = 0.0;
      for (std::size_t I = 1; I < theta.size(); ++I) got += theta[I] * alloc.subset_rates[I];

      std::vector<int> order(K);
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return h.gains[a] > h.gains[b]; });
      std::vector<double> g(K), w(K);
      const auto reduced = oracle::reduce_brute(theta, order);
      for (int p = 0; p < K; ++p) {
        g[p] = h.gains[order[p]];
        w[p] = reduced[p].first;
      }
      const double grid = oracle::grid_power_search(g, P, w).first;
      const double rel = (grid - got) / grid;
      worst = std::max(worst, rel);
      if (got < grid * (1.0 - 1e-3)) ++below;
      ++instances;
    }
  o.pass = below == 0 && outside == 0;
  o.detail = fmt("%d instances; %d below grid-0.1%%; %d outside region; max (grid-solver)/grid = %.2e", instances,
                 below, outside, worst);
  return o;
}

// ---------------------------------------------------------------------------
Outcome controller_properties() {
  Outcome o;
  std::uint64_t negative = 0, phantom = 0, bad_delivery = 0, deliveries = 0, over_delivered = 0;
  std::uint64_t violations = 0, mismatches = 0;
  for (double alpha : {0.0, 1.0}) {
    const SimConfig cfg = reference_setup(4, PolicyKind::kLyapunov, alpha, 11, 100000);
    const std::int64_t expected = useful_bits(cfg.cache);
    RunOptions opt;
    opt.check_counters = true;
    opt.on_delivery = [&](const DeliveryTracker::Delivery& d) {
      ++deliveries;
      if (d.bits != expected) ++bad_delivery;
    };
    opt.observer = [&](std::uint64_t, const QueueState& before, const SlotDecision& d, const QueueState& after) {
      for (double x : after.S) negative += x < 0.0;
      for (double x : after.U) negative += x < 0.0;
      for (auto x : after.Q) negative += x < 0;
      for (Mask J = 1; J < d.routing.sigma.size(); ++J) {
        double demand = 0.0;
        for_each_member(J, [&](int k) { demand += before.S[k]; });
        if (demand == 0.0 && (d.routing.sigma[J] != 0 || d.effective[J] != 0)) ++phantom;
      }
    };
    const auto r = run(cfg, opt);
    violations += r.diagnostics.conservation_violations;
    mismatches += r.diagnostics.counter_mismatches;
    std::vector<double> adm(4, 0.0), del(4, 0.0);
    for (const auto& w : r.windows)
      for (int k = 0; k < 4; ++k) {
        adm[k] += w.admitted[k];
        del[k] += w.delivered[k];
        if (del[k] > adm[k] + 1e-9) ++over_delivered;
      }
  }

  // Doubling every backlog leaves the schedule bit-identical.
  std::mt19937_64 gen(77);
  std::uniform_int_distribution<std::int64_t> bits(0, 1 << 20);
  const FadingChannel ch(ChannelParams::two_class(4, 10.0, 100), 5);
  int scale_diff = 0;
  for (int t = 0; t < 100; ++t) {
    QueueState q = QueueState::empty(4);
    for (std::size_t I = 1; I < q.Q.size(); ++I) q.Q[I] = bits(gen);
    QueueState q2 = q;
    for (auto& x : q2.Q) x *= 2;
    const auto h = ch.sample(t);
    const auto a = schedule_decide(q, h, 10.0), b = schedule_decide(q2, h, 10.0);
    if (a.subset_rates != b.subset_rates || a.power_fractions != b.power_fractions) ++scale_diff;
  }
  o.pass = negative == 0 && phantom == 0 && bad_delivery == 0 && violations == 0 && mismatches == 0 &&
           over_delivered == 0 && scale_diff == 0 && deliveries > 0;
  o.detail = fmt("2x1e5 slots: %llu deliveries, %llu wrong-size, %llu negative, %llu phantom sigma, "
                 "%llu counter mismatches, %llu delivered>admitted; scale-invariance diffs %d/100",
                 (unsigned long long)deliveries, (unsigned long long)(bad_delivery + violations),
                 (unsigned long long)negative, (unsigned long long)phantom, (unsigned long long)mismatches,
                 (unsigned long long)over_delivered, scale_diff);
  return o;
}

// ---------------------------------------------------------------------------
struct Band {
  double lo = INFINITY, hi = -INFINITY, sum = 0.0;
  int n = 0;
  void add(double x) {
    lo = std::min(lo, x);
    hi = std::max(hi, x);
    sum += x;
    ++n;
  }
  double mean() const { return sum / n; }
};

// Mean total backlog over the last 10% of windows divided by that over [50%, 60%).
double backlog_growth(const std::vector<WindowRecord>& w) {
  const std::size_t n = w.size();
  double a = 0, b = 0;
  std::size_t na = 0, nb = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double v = (w[i].sum_S + w[i].sum_Q_files) / static_cast<double>(w[i].length);
    if (i >= n / 2 && i < n * 6 / 10) {
      a += v;
      ++na;
    }
    if (i >= n * 9 / 10) {
      b += v;
      ++nb;
    }
  }
  return (b / nb) / (a / na);
}

struct OrderingRuns {
  std::vector<std::pair<std::string, RunSummary>> lyapunov;  // label, summary
  std::vector<double> growth;
};

Outcome fig4_ordering(OrderingRuns& keep) {
  Outcome o;
  std::string detail;
  for (int K : {4, 8})
    for (double alpha : {0.0, 1.0}) {
      std::map<PolicyKind, Band> band;
      for (PolicyKind kind : {PolicyKind::kLyapunov, PolicyKind::kUnicastOpportunistic, PolicyKind::kTdmaCodedCaching})
        for (std::uint64_t seed : {1, 2, 3}) {
          const auto r = run(reference_setup(K, kind, alpha, seed, 200000));
          band[kind].add(alpha == 0.0 ? r.summary.sum_delivered_rate : r.summary.sum_utility);
          if (kind == PolicyKind::kLyapunov) {
            keep.lyapunov.emplace_back(fmt("K=%d alpha=%g seed=%llu", K, alpha, (unsigned long long)seed), r.summary);
            keep.growth.push_back(backlog_growth(r.windows));
          }
        }
      const Band& l = band[PolicyKind::kLyapunov];
      const Band& u = band[PolicyKind::kUnicastOpportunistic];
      const Band& t = band[PolicyKind::kTdmaCodedCaching];
      bool ok;
      if (alpha == 0.0)
        ok = l.lo > u.hi && u.lo > t.hi;
      else
        ok = l.mean() > u.mean() && l.mean() > t.mean();
      o.pass = o.pass && ok;
      detail += fmt("%sK=%d a=%g lyap=%.3f[%.3f,%.3f] opp=%.3f[%.3f,%.3f] tdma=%.3f[%.3f,%.3f]%s",
                    detail.empty() ? "" : "; ", K, alpha, l.mean(), l.lo, l.hi, u.mean(), u.lo, u.hi, t.mean(), t.lo,
                    t.hi, ok ? "" : " <-");
    }
  o.detail = detail;
  return o;
}

// ---------------------------------------------------------------------------
Outcome v_tradeoff() {
  Outcome o;
  const std::vector<double> Vs{10.0, 100.0, 1000.0};
  std::vector<Band> util(3), queue(3);
  for (std::size_t i = 0; i < Vs.size(); ++i)
    for (std::uint64_t seed : {1, 2, 3}) {
      SimConfig c = reference_setup(4, PolicyKind::kLyapunov, 1.0, seed, 2000000);
      c.policy.V = Vs[i];
      const auto r = run(c);
      util[i].add(r.summary.sum_utility);
      queue[i].add(r.summary.mean_total_queue);
    }
  std::string detail;
  for (std::size_t i = 0; i < Vs.size(); ++i) {
    if (i > 0) {
      const bool up = util[i].mean() >= util[i - 1].mean() || util[i].hi >= util[i - 1].lo;
      const bool grows = queue[i].mean() > queue[i - 1].mean();
      o.pass = o.pass && up && grows;
    }
    detail += fmt("%sV=%g utility=%.3f[%.3f,%.3f] queue=%.0f", i ? "; " : "", Vs[i], util[i].mean(), util[i].lo,
                  util[i].hi, queue[i].mean());
  }
  o.detail = detail + " (K=4, alpha=1, 2e6 slots, 3 seeds)";
  return o;
}

// ---------------------------------------------------------------------------
Outcome coherence(const OrderingRuns& runs) {
  Outcome o;
  int stable = 0, failing = 0;
  double worst = 0.0;
  std::string worst_at, fails;
  for (std::size_t i = 0; i < runs.lyapunov.size(); ++i) {
    if (runs.growth[i] > 1.05) continue;  // backlog still trending up: not a stable run
    ++stable;
    const RunSummary& s = runs.lyapunov[i].second;
    double gap = 0.0;
    for (int k = 0; k < s.num_users; ++k)
      if (s.admitted_rate[k] > 0.0)
        gap = std::max(gap, std::abs(s.delivered_rate[k] - s.admitted_rate[k]) / s.admitted_rate[k]);
    if (gap > worst) {
      worst = gap;
      worst_at = runs.lyapunov[i].first;
    }
    if (gap > 0.02) {
      ++failing;
      fails += fmt("%s%s:%.3f", fails.empty() ? "" : ", ", runs.lyapunov[i].first.c_str(), gap);
    }
  }
  o.pass = stable > 0 && failing == 0;
  o.detail = fmt("%d stable lyapunov runs, %d over 2%%; worst |r-a|/a=%.4f at %s", stable, failing, worst,
                 worst_at.c_str());
  if (!fails.empty()) o.detail += " [" + fails + "]";
  return o;
}

// ---------------------------------------------------------------------------
Outcome feasibility_checker() {
  Outcome o;
  const ChannelParams ch{2, {1.0, 1.0}, db_to_linear(10.0), 100};
  const CacheParams cache{0.6, 1000, 2};
  auto spec = [](std::vector<double> psi) {
    StaticPolicySpec s;
    s.admissions = {0.25, 0.25};
    s.combinations = {0.0, 0.0, 0.0, 0.26};
    s.point_weights = {0.0, 0.0, 0.0, 1.0};
    s.mixture = StaticPolicySpec::constant_mixture(std::move(psi));
    return s;
  };
  const std::uint64_t slots = 100000;

  const auto good = spec({0.3, 0.3, 0.4});
  const auto mu_good = monte_carlo_avg_rate(good, ch, 100000, 21);
  const auto rep_good = check_feasibility(good, mu_good.mean, cache, 100);
  double margin_good = INFINITY;  // slack in units of its own Monte-Carlo error
  for (Mask I = 1; I < 4; ++I)
    margin_good = std::min(margin_good, rep_good.transmit_slack[I] / (100.0 * mu_good.standard_error[I]));
  const auto trace_good = simulate_static(good, ch, cache, slots, 21);
  const auto fit_good = fit_line(trace_good);
  const double peak = *std::max_element(trace_good.begin(), trace_good.end());
  const bool bounded = rep_good.feasible() && margin_good > 3.0 && peak < 100.0 && fit_good.slope * slots < 1.0;

  const auto bad = spec({0.45, 0.45, 0.1});
  const auto mu_bad = monte_carlo_avg_rate(bad, ch, 100000, 22);
  const auto rep_bad = check_feasibility(bad, mu_bad.mean, cache, 100);
  const auto fit_bad = fit_line(simulate_static(bad, ch, cache, slots, 22));
  const bool grows = !rep_bad.feasible() && rep_bad.transmit_slack[0b11] < 0.0 && fit_bad.slope > 0.0 &&
                     fit_bad.r_squared > 0.9;

  o.pass = bounded && grows;
  o.detail = fmt("feasible: min slack %.1f bits/slot (%.0f SE), peak backlog %.1f files, slope %.2e; "
                 "reduced mu_{1,2}: slack %.1f bits/slot, slope %.4f files/slot, R^2 %.4f",
                 rep_good.min_slack_bits(), margin_good, peak, fit_good.slope, rep_bad.transmit_slack[0b11],
                 fit_bad.slope, fit_bad.r_squared);
  return o;
}

}  // namespace

int main() {
  int failed = 0;
  auto report = [&](int id, const char* name, const std::function<Outcome()>& f) {
    const auto t0 = std::chrono::steady_clock::now();
    const Outcome o = f();
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s criterion %d (%s): %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str(), secs);
    std::fflush(stdout);
    failed += !o.pass;
  };
  OrderingRuns ordering;
  report(1, "load formulas", load_formulas);
  report(2, "placement oracle", placement_oracle);
  report(3, "power allocation optimality", power_optimality);
  report(4, "controller properties", controller_properties);
  report(5, "policy ordering", [&] { return fig4_ordering(ordering); });
  report(6, "utility/backlog tradeoff in V", v_tradeoff);
  report(7, "delivery/admission coherence", [&] { return coherence(ordering); });
  report(8, "feasibility checker", feasibility_checker);
  std::printf("%d of 8 criteria failed\n", failed);
  return failed == 0 ? 0 : 1;
}
