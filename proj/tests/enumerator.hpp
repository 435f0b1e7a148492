#pragma once

#include <limits>
#include <string>
#include <vector>

#include "safeor/safeor.hpp"

namespace safeor::testing {

struct Best {
  double ret = -std::numeric_limits<double>::infinity();
  double cost = std::numeric_limits<double>::infinity();
  std::vector<std::vector<double>> actions;
};

// Flat odometer over all sequences; each candidate replays from a fresh reset.
inline Best enumerate(const std::string& name, const json& config, int levels, int h) {
  auto env = make_env(name, config);
  const std::size_t dim = env->action_dim();
  const std::size_t digits = dim * static_cast<std::size_t>(h);
  std::vector<int> code(digits, 0);
  Best best;
  while (true) {
    env->reset();
    std::vector<std::vector<double>> seq(static_cast<std::size_t>(h), std::vector<double>(dim));
    double ret = 0.0, cost = 0.0;
    for (int t = 0; t < h; ++t) {
      for (std::size_t i = 0; i < dim; ++i) {
        const int j = code[static_cast<std::size_t>(t) * dim + i];
        seq[t][i] = levels == 1 ? 0.0 : -1.0 + 2.0 * j / (levels - 1);
      }
      const auto out = env->step(seq[t]);
      ret += out.reward;
      cost += out.cost;
    }
    if (cost < best.cost || (cost == best.cost && ret > best.ret)) best = {ret, cost, seq};
    std::size_t k = digits;
    while (k > 0 && ++code[k - 1] == levels) code[--k] = 0;
    if (k == 0) break;
  }
  return best;
}

}  // namespace safeor::testing
