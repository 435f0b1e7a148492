#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "safeor/errors.hpp"

namespace safeor {

using Observation = std::vector<double>;
using Info = std::map<std::string, double>;

/// Prefix shared by every info key that is a cost component. The step cost
/// is the sum of exactly these entries.
inline constexpr std::string_view kCostPrefix = "cost_";

inline bool is_cost_key(std::string_view key) { return key.starts_with(kCostPrefix); }

struct Bounds {
  double lo = 0.0;
  double hi = 0.0;

  bool contains(double x) const { return x >= lo && x <= hi; }
  double width() const { return hi - lo; }
};

/// Clamp a raw policy output to the [-1, 1] cube. Non-finite values are rejected.
inline double clamp_unit(double a_norm) {
  if (!std::isfinite(a_norm)) throw InvalidAction("non-finite action component");
  return std::clamp(a_norm, -1.0, 1.0);
}

/// Map a normalized component onto [b.lo, b.hi]; exact at both endpoints.
inline double affine_decode(double a_norm, Bounds b) {
  const double a = clamp_unit(a_norm);
  if (a == -1.0) return b.lo;
  if (a == 1.0) return b.hi;
  return (a + 1.0) / 2.0 * (b.hi - b.lo) + b.lo;
}

struct ClipResult {
  double value = 0.0;
  double penalty = 0.0;
};

/// Euclidean projection onto [b.lo, b.hi] with a linear penalty on the distance moved.
inline ClipResult clip_with_penalty(double x, Bounds b, double phi) {
  if (x < b.lo) return {b.lo, phi * (b.lo - x)};
  if (x > b.hi) return {b.hi, phi * (x - b.hi)};
  return {x, 0.0};
}

/// Fixed-length view into a series; reads past the end are 0.
struct ForecastWindow {
  std::vector<double> series;
  std::size_t offset = 0;
  std::size_t length = 0;

  std::vector<double> window(std::size_t t) const {
    if (t + offset > series.size()) {
      throw std::out_of_range("forecast window start " + std::to_string(t) +
                              " is past the series horizon");
    }
    std::vector<double> out(length, 0.0);
    for (std::size_t i = 0; i < length; ++i) {
      const std::size_t idx = t + offset + i;
      if (idx < series.size()) out[i] = series[idx];
    }
    return out;
  }

  void append_to(std::vector<double>& obs, std::size_t t) const {
    const auto w = window(t);
    obs.insert(obs.end(), w.begin(), w.end());
  }
};

struct StepOutcome {
  Observation observation;
  double reward = 0.0;
  double cost = 0.0;
  bool terminated = false;
  bool truncated = false;
  Info info;
  std::vector<double> sanitized_action;
};

inline double sum_cost_components(const Info& info) {
  double total = 0.0;
  for (const auto& [key, value] : info) {
    if (is_cost_key(key)) total += value;
  }
  return total;
}

/// Step/reset contract shared by every environment.
///
/// Subclasses implement `do_reset` and `advance`; the base handles the
/// episode clock, action-dimension checks, cube clamping and the cost total.
/// Episodes end at t == horizon() and are never truncated.
class Env {
 public:
  virtual ~Env() = default;

  virtual std::string_view name() const = 0;
  virtual std::size_t action_dim() const = 0;
  virtual std::size_t observation_dim() const = 0;
  virtual int horizon() const = 0;
  virtual std::unique_ptr<Env> clone() const = 0;

  int time() const { return t_; }
  bool done() const { return t_ >= horizon(); }

  Observation reset() {
    t_ = 0;
    return do_reset();
  }

  StepOutcome step(std::span<const double> action) {
    if (done()) throw EpisodeFinished();
    if (action.size() != action_dim()) throw DimensionMismatch(action_dim(), action.size());
    std::vector<double> clamped(action.size());
    std::transform(action.begin(), action.end(), clamped.begin(), clamp_unit);

    StepOutcome out = advance(clamped);
    ++t_;
    out.cost = sum_cost_components(out.info);
    out.terminated = t_ == horizon();
    out.truncated = false;
    return out;
  }

 protected:
  Env() = default;
  Env(const Env&) = default;
  Env& operator=(const Env&) = default;

  virtual Observation do_reset() = 0;
  /// `action` is already clamped to [-1, 1] and has action_dim() entries.
  /// Called with time() equal to the index of the step being taken.
  virtual StepOutcome advance(std::span<const double> action) = 0;

 private:
  int t_ = 0;
};

}  // namespace safeor
