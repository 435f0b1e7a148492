#pragma once

#include <cstdint>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "safeor/episode.hpp"
#include "safeor/errors.hpp"

namespace safeor {

/// Level j of an L-point grid on [-1, 1]; a single level is the midpoint.
inline double grid_level(int j, int levels) {
  if (levels <= 1) return 0.0;
  return -1.0 + 2.0 * static_cast<double>(j) / static_cast<double>(levels - 1);
}

inline Policy zero_policy(std::size_t dim) {
  return [dim](std::span<const double>, int) { return std::vector<double>(dim, 0.0); };
}

/// Uniform actions on [-1, 1]; the stream depends on (seed, episode) only.
inline Policy random_policy(std::size_t dim, std::uint64_t seed, std::uint64_t episode) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(episode), static_cast<std::uint32_t>(episode >> 32)};
  auto rng = std::make_shared<std::mt19937_64>(seq);
  return [dim, rng](std::span<const double>, int) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> a(dim);
    for (auto& x : a) x = u(*rng);
    return a;
  };
}

/// Sweeps every component through the grid together: step t plays level t mod L.
inline Policy grid_policy(std::size_t dim, int levels) {
  if (levels < 1) throw ConfigError("grid-levels", "must be at least 1");
  return [dim, levels](std::span<const double>, int t) {
    return std::vector<double>(dim, grid_level(t % levels, levels));
  };
}

inline EpisodeTrace load_trace_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("trace", "cannot open trace file '" + path + "'");
  return read_trace(in);
}

struct PolicySpec {
  std::string kind = "zero";  // zero | random | grid | replay
  std::uint64_t seed = 0;
  int levels = 2;
  std::string trace_path;
};

/// Parses "zero", "random", "random:<seed>", "grid", "grid:<levels>" or "replay:<path>".
inline PolicySpec parse_policy_spec(const std::string& text, std::uint64_t seed, int levels) {
  PolicySpec p;
  p.seed = seed;
  p.levels = levels;
  const auto colon = text.find(':');
  p.kind = text.substr(0, colon);
  const std::string arg = colon == std::string::npos ? "" : text.substr(colon + 1);
  try {
    if (p.kind == "random") {
      if (!arg.empty()) p.seed = std::stoull(arg);
    } else if (p.kind == "grid") {
      if (!arg.empty()) p.levels = std::stoi(arg);
      if (p.levels < 1) throw ConfigError("policy", "grid levels must be at least 1");
    } else if (p.kind == "replay") {
      if (arg.empty()) throw ConfigError("policy", "replay needs a trace path");
      p.trace_path = arg;
    } else if (p.kind != "zero" || !arg.empty()) {
      throw ConfigError("policy", "unknown policy '" + text + "'");
    }
  } catch (const std::logic_error&) {
    throw ConfigError("policy", "bad argument in '" + text + "'");
  }
  return p;
}

inline Policy make_policy(const PolicySpec& p, std::size_t dim, std::uint64_t episode) {
  if (p.kind == "random") return random_policy(dim, p.seed, episode);
  if (p.kind == "grid") return grid_policy(dim, p.levels);
  if (p.kind == "replay") return replay_policy(load_trace_file(p.trace_path));
  return zero_policy(dim);
}

}  // namespace safeor
