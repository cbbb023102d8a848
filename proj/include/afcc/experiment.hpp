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
 * @file experiment.hpp
 * @brief Runs every point of an experiment and writes summary.json,
 *        trace.csv and resolved_config.json.
 */
#pragma once

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "afcc/config.hpp"
#include "afcc/sim_engine.hpp"

namespace afcc {

inline constexpr const char* kTraceColumns[] = {
    "slot",    "policy",          "K",              "V",       "alpha",   "seed",
    "delivered_rates", "admitted_rates", "total_S", "total_Q_files", "total_U", "sum_utility"};

inline constexpr const char* kSummaryKeys[] = {
    "policy",         "K",              "V",          "alpha",          "d",
    "gamma_max",      "sigma_max",      "seed",       "slots",          "measured_slots",
    "admitted_rate",  "delivered_rate", "total_admitted", "total_delivered", "sum_delivered_rate",
    "sum_utility",    "mean_S",         "mean_Q_files", "mean_U",        "mean_total_queue",
    "files_delivered", "conservation_violations"};

struct ExperimentOptions {
  int workers = 1;
  bool verbose_trace = false;  ///< one trace row per slot
};

struct ExperimentResult {
  std::vector<SimConfig> points;
  std::vector<RunResult> runs;  ///< same order as points
};

inline nlohmann::ordered_json summary_to_json(const SimConfig& cfg, const RunResult& r) {
  const RunSummary& s = r.summary;
  nlohmann::ordered_json j;
  j["policy"] = std::string(to_string(s.kind));
  j["K"] = s.num_users;
  j["V"] = s.V;
  j["alpha"] = s.alpha;
  j["d"] = s.d;
  j["gamma_max"] = cfg.policy.gamma_max;
  j["sigma_max"] = cfg.policy.sigma_max;
  j["seed"] = s.seed;
  j["slots"] = s.slots;
  j["measured_slots"] = s.measured_slots;
  j["admitted_rate"] = s.admitted_rate;
  j["delivered_rate"] = s.delivered_rate;
  j["total_admitted"] = s.total_admitted;
  j["total_delivered"] = s.total_delivered;
  j["sum_delivered_rate"] = s.sum_delivered_rate;
  j["sum_utility"] = s.sum_utility;
  j["mean_S"] = s.mean_S;
  j["mean_Q_files"] = s.mean_Q_files;
  j["mean_U"] = s.mean_U;
  j["mean_total_queue"] = s.mean_total_queue;
  j["files_delivered"] = r.diagnostics.files_delivered;
  j["conservation_violations"] = r.diagnostics.conservation_violations;
  return j;
}

namespace detail {

inline std::string fmt_num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

inline std::string join_rates(const std::vector<double>& v, double length) {
  std::string out;
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (k) out += ';';
    out += fmt_num(v[k] / length);
  }
  return out;
}

}  // namespace detail

inline void write_trace_header(std::ostream& os) {
  bool first = true;
  for (const char* c : kTraceColumns) {
    os << (first ? "" : ",") << c;
    first = false;
  }
  os << '\n';
}

/// One row per window; rates and queue totals are window means, `slot` is the window's end.
inline void write_trace_rows(std::ostream& os, const SimConfig& cfg, const std::vector<WindowRecord>& windows) {
  using detail::fmt_num;
  for (const auto& w : windows) {
    const double n = static_cast<double>(w.length);
    double util = 0.0;
    for (double x : w.delivered) util += utility(x / n, cfg.policy.alpha, cfg.policy.d);
    os << w.end_slot() << ',' << to_string(cfg.kind) << ',' << cfg.channel.num_users << ','
       << fmt_num(cfg.policy.V) << ',' << fmt_num(cfg.policy.alpha) << ',' << cfg.seed << ','
       << detail::join_rates(w.delivered, n) << ',' << detail::join_rates(w.admitted, n) << ','
       << fmt_num(w.sum_S / n) << ',' << fmt_num(w.sum_Q_files / n) << ',' << fmt_num(w.sum_U / n) << ','
       << fmt_num(util) << '\n';
  }
}

/// Runs all sweep points on up to `workers` threads; results keep sweep order.
inline ExperimentResult run_points(const std::vector<SimConfig>& points, int workers) {
  ExperimentResult res;
  res.points = points;
  res.runs.resize(points.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto worker = [&] {
    for (std::size_t i = next++; i < points.size(); i = next++) {
      try {
        res.runs[i] = run(points[i]);
      } catch (...) {
        std::lock_guard lock(failure_mu);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const int n = std::max(1, std::min<int>(workers, static_cast<int>(points.size())));
  std::vector<std::thread> pool;
  for (int t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return res;
}

inline ExperimentResult run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& out_dir,
                                       const ExperimentOptions& opt = {}) {
  auto points = cfg.expand();
  if (opt.verbose_trace)
    for (auto& p : points) p.window = 1;
  ExperimentResult res = run_points(points, opt.workers);

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory '" + out_dir.string() + "': " + ec.message());
  auto open = [&](const char* name) {
    const auto path = out_dir / name;
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write '" + path.string() + "'");
    return os;
  };

  nlohmann::ordered_json summary;
  summary["runs"] = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < points.size(); ++i) summary["runs"].push_back(summary_to_json(points[i], res.runs[i]));
  {
    auto os = open("summary.json");
    os << summary.dump(2) << '\n';
  }
  {
    auto os = open("trace.csv");
    write_trace_header(os);
    for (std::size_t i = 0; i < points.size(); ++i) write_trace_rows(os, points[i], res.runs[i].windows);
  }
  {
    auto os = open("resolved_config.json");
    os << cfg.to_json().dump(2) << '\n';
  }
  return res;
}

}  // namespace afcc
