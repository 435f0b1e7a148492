#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "safeor/core.hpp"
#include "safeor/errors.hpp"
#include "safeor/harness/policies.hpp"

namespace safeor {

inline constexpr double kOracleBudget = 1e7;

struct OracleResult {
  double best_return = 0.0;
  double best_cost = 0.0;
  std::vector<std::vector<double>> actions;
  double enumerated = 0.0;
};

/// Number of grid sequences of length `h` over a `dim`-dimensional action.
inline double oracle_count(int levels, std::size_t dim, int h) {
  return std::pow(static_cast<double>(levels), static_cast<double>(dim) * h);
}

/// Exhaustive search over grid actions. A sequence beats the incumbent when its
/// total cost is lower, or equal with a higher return; enumeration runs in
/// lexicographic order, so ties keep the first sequence.
inline OracleResult oracle_best(const Env& proto, int levels, int h, double budget = kOracleBudget) {
  if (levels < 1) throw ConfigError("grid-levels", "must be at least 1");
  if (h < 0 || h > proto.horizon()) throw ConfigError("horizon", "must lie in [0, env horizon]");
  const std::size_t dim = proto.action_dim();
  const double count = oracle_count(levels, dim, h);
  if (count > budget) throw BudgetExceeded(count, budget);

  OracleResult best;
  if (h == 0) return best;

  auto root = proto.clone();
  root->reset();
  best.best_return = -std::numeric_limits<double>::infinity();
  best.best_cost = std::numeric_limits<double>::infinity();

  std::vector<std::vector<double>> path;
  auto search = [&](auto&& self, const Env& env, double ret, double cost) -> void {
    if (static_cast<int>(path.size()) == h) {
      best.enumerated += 1.0;
      if (cost < best.best_cost || (cost == best.best_cost && ret > best.best_return)) {
        best.best_cost = cost;
        best.best_return = ret;
        best.actions = path;
      }
      return;
    }
    std::vector<int> odo(dim, 0);
    while (true) {
      std::vector<double> a(dim);
      for (std::size_t i = 0; i < dim; ++i) a[i] = grid_level(odo[i], levels);
      auto child = env.clone();
      const StepOutcome out = child->step(a);
      path.push_back(std::move(a));
      self(self, *child, ret + out.reward, cost + out.cost);
      path.pop_back();

      std::size_t i = dim;
      while (i > 0 && ++odo[i - 1] == levels) odo[--i] = 0;
      if (i == 0) break;
    }
  };
  search(search, *root, 0.0, 0.0);
  return best;
}

}  // namespace safeor
