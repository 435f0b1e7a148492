#pragma once

#include <atomic>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "safeor/config.hpp"
#include "safeor/episode.hpp"
#include "safeor/harness/policies.hpp"
#include "safeor/harness/registry.hpp"

namespace safeor {

struct RunSpec {
  std::string env;
  json config;
  PolicySpec policy;
  int episodes = 1;
  int horizon = -1;  // negative: the env's own horizon
  std::string out;   // directory for traces and summary; empty to skip writing
  unsigned threads = 0;
};

struct Summary {
  std::string env;
  int episodes = 0;
  double reward_mean = 0.0;
  double reward_std = 0.0;
  double cost_mean = 0.0;
  double cost_std = 0.0;
  std::vector<double> returns;
  std::vector<double> costs;
  std::map<std::string, long long> violations;  // cost key -> steps with a positive value
};

struct RunResult {
  Summary summary;
  std::vector<EpisodeTrace> traces;
};

inline void mean_std(const std::vector<double>& xs, double& mean, double& sd) {
  mean = 0.0;
  sd = 0.0;
  if (xs.empty()) return;
  for (const double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  for (const double x : xs) sd += (x - mean) * (x - mean);
  sd = std::sqrt(sd / static_cast<double>(xs.size()));
}

inline Summary summarize(const std::string& env, const std::vector<EpisodeTrace>& traces) {
  Summary s;
  s.env = env;
  s.episodes = static_cast<int>(traces.size());
  for (const auto& tr : traces) {
    s.returns.push_back(episode_return(tr));
    s.costs.push_back(episode_cost(tr));
    for (const auto& step : tr) {
      for (const auto& [key, value] : step.outcome.info) {
        if (!is_cost_key(key)) continue;
        auto& n = s.violations[key];
        if (value > 0.0) ++n;
      }
    }
  }
  mean_std(s.returns, s.reward_mean, s.reward_std);
  mean_std(s.costs, s.cost_mean, s.cost_std);
  return s;
}

inline json to_json(const Summary& s) {
  return json{{"env", s.env},
              {"episodes", s.episodes},
              {"reward_mean", s.reward_mean},
              {"reward_std", s.reward_std},
              {"cost_mean", s.cost_mean},
              {"cost_std", s.cost_std},
              {"returns", s.returns},
              {"costs", s.costs},
              {"violations", s.violations}};
}

/// Runs every episode on its own env instance, in parallel, and returns the
/// traces in episode order.
inline RunResult run(const RunSpec& spec) {
  if (spec.episodes < 1) throw ConfigError("episodes", "must be at least 1");
  const auto proto = make_env(spec.env, spec.config);
  const int horizon = spec.horizon < 0 ? proto->horizon() : spec.horizon;
  if (horizon > proto->horizon()) throw ConfigError("horizon", "exceeds the environment horizon");

  const auto n = static_cast<std::size_t>(spec.episodes);
  std::vector<EpisodeTrace> traces(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < n; k = next++) {
      try {
        const auto env = proto->clone();
        traces[k] = run_episode(*env, make_policy(spec.policy, env->action_dim(), k), horizon);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };
  unsigned threads = spec.threads != 0 ? spec.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
  std::vector<std::thread> pool;
  for (unsigned i = 1; i < threads; ++i) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  RunResult result{summarize(std::string(proto->name()), traces), std::move(traces)};
  if (!spec.out.empty()) {
    std::filesystem::create_directories(spec.out);
    for (std::size_t k = 0; k < n; ++k) {
      std::ofstream f(std::filesystem::path(spec.out) / ("episode_" + std::to_string(k) + ".jsonl"));
      write_trace(f, result.traces[k]);
    }
    std::ofstream f(std::filesystem::path(spec.out) / "summary.json");
    f << to_json(result.summary).dump(2) << '\n';
  }
  return result;
}

struct ReplayCheck {
  EpisodeTrace reproduced;
  std::size_t mismatches = 0;
};

/// Re-runs the raw actions of `recorded` and compares rewards, costs and
/// observations exactly.
inline ReplayCheck replay_and_compare(Env& env, const EpisodeTrace& recorded) {
  ReplayCheck r;
  r.reproduced = run_episode(env, replay_policy(recorded), static_cast<int>(recorded.size()));
  for (std::size_t i = 0; i < recorded.size(); ++i) {
    if (i >= r.reproduced.size()) {
      ++r.mismatches;
      continue;
    }
    const auto& a = recorded[i].outcome;
    const auto& b = r.reproduced[i].outcome;
    if (a.reward != b.reward || a.cost != b.cost || a.observation != b.observation) ++r.mismatches;
  }
  return r;
}

}  // namespace safeor
