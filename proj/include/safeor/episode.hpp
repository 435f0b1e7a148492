#pragma once

#include <functional>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "safeor/core.hpp"
#include "safeor/errors.hpp"

namespace safeor {

struct TraceStep {
  int t = 0;
  std::vector<double> raw_action;
  StepOutcome outcome;
};

using EpisodeTrace = std::vector<TraceStep>;

/// Maps the current observation and step index to a raw action.
using Policy = std::function<std::vector<double>(std::span<const double> obs, int t)>;

/// Reset `env` and roll `policy` for up to `horizon` steps, stopping early at
/// termination. A horizon of 0 leaves the environment untouched.
inline EpisodeTrace run_episode(Env& env, const Policy& policy, int horizon) {
  EpisodeTrace trace;
  if (horizon <= 0) return trace;
  Observation obs = env.reset();
  trace.reserve(static_cast<std::size_t>(horizon));
  for (int k = 0; k < horizon; ++k) {
    const int t = env.time();
    std::vector<double> action = policy(obs, t);
    if (action.size() != env.action_dim()) {
      throw DimensionMismatch(env.action_dim(), action.size());
    }
    StepOutcome out = env.step(action);
    obs = out.observation;
    const bool finished = out.terminated;
    trace.push_back(TraceStep{t, std::move(action), std::move(out)});
    if (finished) break;
  }
  return trace;
}

inline double episode_return(const EpisodeTrace& trace) {
  double total = 0.0;
  for (const auto& s : trace) total += s.outcome.reward;
  return total;
}

inline double episode_cost(const EpisodeTrace& trace) {
  double total = 0.0;
  for (const auto& s : trace) total += s.outcome.cost;
  return total;
}

// JSON-Lines: one step per line with fields
// {t, raw_action, sanitized_action, observation, reward, cost, info}.

inline nlohmann::json to_json(const TraceStep& s) {
  nlohmann::json j;
  j["t"] = s.t;
  j["raw_action"] = s.raw_action;
  j["sanitized_action"] = s.outcome.sanitized_action;
  j["observation"] = s.outcome.observation;
  j["reward"] = s.outcome.reward;
  j["cost"] = s.outcome.cost;
  j["info"] = s.outcome.info;
  return j;
}

inline TraceStep trace_step_from_json(const nlohmann::json& j) {
  try {
    TraceStep s;
    s.t = j.at("t").get<int>();
    s.raw_action = j.at("raw_action").get<std::vector<double>>();
    s.outcome.sanitized_action = j.at("sanitized_action").get<std::vector<double>>();
    s.outcome.observation = j.at("observation").get<std::vector<double>>();
    s.outcome.reward = j.at("reward").get<double>();
    s.outcome.cost = j.at("cost").get<double>();
    s.outcome.info = j.at("info").get<Info>();
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("trace", std::string("malformed trace line: ") + e.what());
  }
}

inline void write_trace(std::ostream& os, const EpisodeTrace& trace) {
  for (const auto& s : trace) os << to_json(s).dump() << '\n';
}

inline std::string trace_to_string(const EpisodeTrace& trace) {
  std::string out;
  for (const auto& s : trace) {
    out += to_json(s).dump();
    out += '\n';
  }
  return out;
}

inline EpisodeTrace read_trace(std::istream& is) {
  EpisodeTrace trace;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    try {
      trace.push_back(trace_step_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::parse_error& e) {
      throw ConfigError("trace", std::string("malformed trace line: ") + e.what());
    }
  }
  return trace;
}

/// Policy that feeds back the raw actions of a recorded trace.
inline Policy replay_policy(const EpisodeTrace& trace) {
  std::vector<std::vector<double>> actions;
  actions.reserve(trace.size());
  for (const auto& s : trace) actions.push_back(s.raw_action);
  return [actions = std::move(actions)](std::span<const double>, int t) {
    if (t < 0 || static_cast<std::size_t>(t) >= actions.size()) {
      throw Error("replay trace has no action for step " + std::to_string(t));
    }
    return actions[static_cast<std::size_t>(t)];
  };
}

}  // namespace safeor
