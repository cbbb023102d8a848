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
 * @file config.hpp
 * @brief JSON experiment configuration: parsing, validation and expansion
 *        of sweep axes into individual simulation runs.
 *
 * Schema (every key optional unless noted; unknown keys are rejected):
 *
 *     {
 *       "channel": {"num_users": 4, "pathloss": "two-class" | [b1, ...],
 *                   "power": 10.0 | "10dB", "slot_length": 100},
 *       "cache":   {"normalized_memory": 0.6, "file_size": 1000},
 *       "policy":  {"name": "lyapunov", "alpha": 1, "V": 100, "d": 0.01,
 *                   "gamma_max": 1, "sigma_max": 1},
 *       "run":     {"slots": 200000, "seed": 1, "warmup_fraction": 0.1, "window": 1000},
 *       "sweep":   {"policies": [...], "num_users": [...], "V": [...],
 *                   "alpha": [...], "seeds": [...]}
 *     }
 */
#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "afcc/sim_engine.hpp"

namespace afcc {

/// Configuration problem; the message names the offending field.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
  int num_users = 4;
  bool two_class = true;
  std::vector<double> pathloss;  ///< explicit beta list when not two-class
  double power = 10.0;           ///< linear
  int slot_length = 100;
  double normalized_memory = 0.6;
  std::int64_t file_size = 1000;
  PolicyKind policy = PolicyKind::kLyapunov;
  PolicyParams params;
  std::uint64_t slots = 200000;
  std::uint64_t seed = 1;
  double warmup_fraction = 0.1;
  std::uint64_t window = 1000;

  std::vector<PolicyKind> sweep_policies;
  std::vector<int> sweep_users;
  std::vector<double> sweep_V;
  std::vector<double> sweep_alpha;
  std::vector<std::uint64_t> sweep_seeds;

  /// One SimConfig per sweep point, ordered policy > K > alpha > V > seed.
  std::vector<SimConfig> expand() const;
  nlohmann::ordered_json to_json() const;
};

namespace detail {

inline void reject_unknown(const nlohmann::json& obj, const std::string& where,
                           std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ConfigError(where + ": expected an object");
  const std::set<std::string> keys(allowed.begin(), allowed.end());
  for (const auto& [key, _] : obj.items())
    if (!keys.count(key)) throw ConfigError(where + "." + key + ": unknown key");
}

template <typename T>
T get_as(const nlohmann::json& v, const std::string& field) {
  try {
    if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer() && !(v.is_number_float() && std::floor(v.get<double>()) == v.get<double>()))
        throw ConfigError(field + ": expected an integer");
      if constexpr (std::is_unsigned_v<T>)
        if (v.get<double>() < 0) throw ConfigError(field + ": must be nonnegative");
      return static_cast<T>(v.get<double>());
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) throw ConfigError(field + ": expected a number");
      return v.get<T>();
    } else {
      return v.get<T>();
    }
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(field + ": wrong type");
  }
}

template <typename T>
void read(const nlohmann::json& obj, const char* key, const std::string& where, T& out) {
  if (auto it = obj.find(key); it != obj.end()) out = get_as<T>(*it, where + "." + key);
}

template <typename T>
void read_list(const nlohmann::json& obj, const char* key, const std::string& where, std::vector<T>& out) {
  const auto it = obj.find(key);
  if (it == obj.end()) return;
  const std::string field = where + "." + key;
  if (!it->is_array() || it->empty()) throw ConfigError(field + ": expected a nonempty list");
  out.clear();
  for (std::size_t i = 0; i < it->size(); ++i) out.push_back(get_as<T>((*it)[i], field + "[" + std::to_string(i) + "]"));
}

}  // namespace detail

/// Power as a linear number or a string such as "10dB".
inline double parse_power(const nlohmann::json& v, const std::string& field = "channel.power") {
  if (v.is_number()) return v.get<double>();
  if (!v.is_string()) throw ConfigError(field + ": expected a number or a string like \"10dB\"");
  std::string s = v.get<std::string>();
  const auto pos = s.find("dB");
  if (pos == std::string::npos || pos + 2 != s.size()) throw ConfigError(field + ": expected a \"dB\" suffix");
  s.resize(pos);
  try {
    std::size_t used = 0;
    const double db = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument("trailing characters");
    return db_to_linear(db);
  } catch (const std::exception&) {
    throw ConfigError(field + ": cannot parse '" + v.get<std::string>() + "'");
  }
}

inline ExperimentConfig parse_config_json(const nlohmann::json& root) {
  using detail::read;
  using detail::read_list;
  ExperimentConfig c;
  detail::reject_unknown(root, "config", {"channel", "cache", "policy", "run", "sweep"});

  if (auto it = root.find("channel"); it != root.end()) {
    const auto& ch = *it;
    detail::reject_unknown(ch, "channel", {"num_users", "pathloss", "power", "slot_length"});
    read(ch, "num_users", "channel", c.num_users);
    if (auto p = ch.find("pathloss"); p != ch.end()) {
      if (p->is_string()) {
        if (p->get<std::string>() != "two-class") throw ConfigError("channel.pathloss: expected \"two-class\" or a list");
        c.two_class = true;
      } else {
        c.two_class = false;
        read_list(ch, "pathloss", "channel", c.pathloss);
        if (!ch.contains("num_users")) c.num_users = static_cast<int>(c.pathloss.size());
      }
    }
    if (auto p = ch.find("power"); p != ch.end()) c.power = parse_power(*p);
    read(ch, "slot_length", "channel", c.slot_length);
  }
  if (auto it = root.find("cache"); it != root.end()) {
    detail::reject_unknown(*it, "cache", {"normalized_memory", "file_size"});
    read(*it, "normalized_memory", "cache", c.normalized_memory);
    read(*it, "file_size", "cache", c.file_size);
  }
  if (auto it = root.find("policy"); it != root.end()) {
    const auto& po = *it;
    detail::reject_unknown(po, "policy", {"name", "alpha", "V", "d", "gamma_max", "sigma_max"});
    if (auto n = po.find("name"); n != po.end()) {
      try {
        c.policy = parse_policy_kind(detail::get_as<std::string>(*n, "policy.name"));
      } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("policy.name: ") + e.what());
      }
    }
    read(po, "alpha", "policy", c.params.alpha);
    read(po, "V", "policy", c.params.V);
    read(po, "d", "policy", c.params.d);
    read(po, "gamma_max", "policy", c.params.gamma_max);
    read(po, "sigma_max", "policy", c.params.sigma_max);
  }
  if (auto it = root.find("run"); it != root.end()) {
    detail::reject_unknown(*it, "run", {"slots", "seed", "warmup_fraction", "window"});
    read(*it, "slots", "run", c.slots);
    read(*it, "seed", "run", c.seed);
    read(*it, "warmup_fraction", "run", c.warmup_fraction);
    read(*it, "window", "run", c.window);
  }
  if (auto it = root.find("sweep"); it != root.end()) {
    const auto& sw = *it;
    detail::reject_unknown(sw, "sweep", {"policies", "num_users", "V", "alpha", "seeds"});
    std::vector<std::string> names;
    read_list(sw, "policies", "sweep", names);
    for (const auto& n : names) {
      try {
        c.sweep_policies.push_back(parse_policy_kind(n));
      } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("sweep.policies: ") + e.what());
      }
    }
    read_list(sw, "num_users", "sweep", c.sweep_users);
    read_list(sw, "V", "sweep", c.sweep_V);
    read_list(sw, "alpha", "sweep", c.sweep_alpha);
    read_list(sw, "seeds", "sweep", c.sweep_seeds);
  }

  // Validate every expanded point so errors surface before any run starts.
  if (!c.two_class && !c.sweep_users.empty())
    throw ConfigError("sweep.num_users: requires channel.pathloss = \"two-class\"");
  for (int K : c.sweep_users.empty() ? std::vector<int>{c.num_users} : c.sweep_users)
    if (K < 1 || K > kMaxUsers)
      throw ConfigError("channel.num_users: must lie in [1," + std::to_string(kMaxUsers) + "], got " +
                        std::to_string(K));
  try {
    for (const auto& s : c.expand()) s.validate();
  } catch (const std::invalid_argument& e) {
    // Library messages look like "CacheParams: file_size ..."; rename the prefix to the config section.
    static const std::pair<std::string_view, std::string_view> kSections[] = {
        {"ChannelParams: ", "channel."}, {"CacheParams: ", "cache."},
        {"PolicyParams: ", "policy."},   {"SimConfig: ", "run."}};
    std::string msg = e.what();
    for (const auto& [from, to] : kSections) {
      if (msg.starts_with(from)) {
        msg = std::string(to) + msg.substr(from.size());
        if (auto sp = msg.find(' '); sp != std::string::npos) msg.insert(sp, ":");
        break;
      }
    }
    throw ConfigError(msg);
  }
  return c;
}

inline ExperimentConfig parse_config_string(const std::string& text) {
  nlohmann::json root;
  try {
    root = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  return parse_config_json(root);
}

inline ExperimentConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_string(ss.str());
}

inline std::vector<SimConfig> ExperimentConfig::expand() const {
  const auto policies = sweep_policies.empty() ? std::vector<PolicyKind>{policy} : sweep_policies;
  const auto users = sweep_users.empty() ? std::vector<int>{num_users} : sweep_users;
  const auto alphas = sweep_alpha.empty() ? std::vector<double>{params.alpha} : sweep_alpha;
  const auto Vs = sweep_V.empty() ? std::vector<double>{params.V} : sweep_V;
  const auto seeds = sweep_seeds.empty() ? std::vector<std::uint64_t>{seed} : sweep_seeds;

  std::vector<SimConfig> out;
  for (PolicyKind kind : policies)
    for (int K : users)
      for (double a : alphas)
        for (double V : Vs)
          for (std::uint64_t s : seeds) {
            SimConfig sc;
            if (two_class) {
              sc.channel.num_users = K;
              sc.channel.power = power;
              sc.channel.slot_length = slot_length;
              const int strong = (K + 1) / 2;
              for (int k = 0; k < K; ++k) sc.channel.pathloss.push_back(k < strong ? 1.0 : 0.2);
            } else {
              sc.channel = {K, pathloss, power, slot_length};
            }
            sc.cache = {normalized_memory, file_size, K};
            sc.policy = params;
            sc.policy.alpha = a;
            sc.policy.V = V;
            sc.kind = kind;
            sc.slots = slots;
            sc.seed = s;
            sc.warmup_fraction = warmup_fraction;
            sc.window = window;
            out.push_back(std::move(sc));
          }
  return out;
}

inline nlohmann::ordered_json ExperimentConfig::to_json() const {
  nlohmann::ordered_json j;
  j["channel"]["num_users"] = num_users;
  if (two_class)
    j["channel"]["pathloss"] = "two-class";
  else
    j["channel"]["pathloss"] = pathloss;
  j["channel"]["power"] = power;
  j["channel"]["slot_length"] = slot_length;
  j["cache"]["normalized_memory"] = normalized_memory;
  j["cache"]["file_size"] = file_size;
  j["policy"]["name"] = std::string(to_string(policy));
  j["policy"]["alpha"] = params.alpha;
  j["policy"]["V"] = params.V;
  j["policy"]["d"] = params.d;
  j["policy"]["gamma_max"] = params.gamma_max;
  j["policy"]["sigma_max"] = params.sigma_max;
  j["run"]["slots"] = slots;
  j["run"]["seed"] = seed;
  j["run"]["warmup_fraction"] = warmup_fraction;
  j["run"]["window"] = window;
  auto& sw = j["sweep"];
  sw = nlohmann::ordered_json::object();
  if (!sweep_policies.empty()) {
    std::vector<std::string> names;
    for (auto p : sweep_policies) names.emplace_back(to_string(p));
    sw["policies"] = names;
  }
  if (!sweep_users.empty()) sw["num_users"] = sweep_users;
  if (!sweep_alpha.empty()) sw["alpha"] = sweep_alpha;
  if (!sweep_V.empty()) sw["V"] = sweep_V;
  if (!sweep_seeds.empty()) sw["seeds"] = sweep_seeds;
  return j;
}

}  // namespace afcc
