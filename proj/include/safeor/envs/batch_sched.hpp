#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "safeor/config.hpp"
#include "safeor/core.hpp"

namespace safeor::batch_sched {

enum class ResourceClass { Reactant, Intermediate, Product, Equipment };

enum class Mode {
  Rtn,  ///< one action per task; the task occupies all of its equipment
  Stn,  ///< one action per (task, equipment) pair over every equipment unit
};

struct Resource {
  std::string name;
  ResourceClass cls = ResourceClass::Reactant;
  double init = 0.0;
  Bounds bounds;
  double price = 0.0;  // products
  double cost = 0.0;   // reactants
};

struct Task {
  std::string name;
  int duration = 1;
  std::vector<double> stoich;            // per resource; equipment entries unused
  std::vector<std::size_t> equipment;    // K_i, resource indices
  std::vector<std::size_t> utilities;    // U_i
  Bounds batch;                          // RTN batch bounds
  std::vector<Bounds> unit_batch;        // STN bounds, parallel to `equipment`
};

struct Config {
  Mode mode = Mode::Rtn;
  int horizon = 1;
  double lambda_sanit = 1.0;
  double epsilon = 1e-3;
  std::vector<Resource> resources;
  std::vector<Task> tasks;
  std::vector<std::string> utility_names;
  std::vector<std::vector<double>> demand;           // per resource (products only non-empty)
  std::vector<std::vector<double>> utility_prices;   // per utility

  static Config from_json(const json& doc) { return parse(Field(doc, "")); }

  static Config parse(const Field& root) {
    Config c;
    const std::string mode = root.str_or("mode", "rtn");
    if (mode == "rtn") {
      c.mode = Mode::Rtn;
    } else if (mode == "stn") {
      c.mode = Mode::Stn;
    } else {
      root["mode"].fail("expected \"rtn\" or \"stn\"");
    }
    c.horizon = static_cast<int>(root["horizon"].integer(1, 1'000'000));
    c.lambda_sanit = root["lambda_sanit"].nonneg();
    if (root.has("epsilon")) c.epsilon = root["epsilon"].nonneg();

    std::vector<std::string> names;
    for (const Field& f : root["resources"].items()) {
      Resource r;
      r.name = f["name"].str();
      if (std::find(names.begin(), names.end(), r.name) != names.end()) {
        f["name"].fail("duplicate resource name");
      }
      const std::string cls = f["class"].str();
      if (cls == "reactant") {
        r.cls = ResourceClass::Reactant;
      } else if (cls == "intermediate") {
        r.cls = ResourceClass::Intermediate;
      } else if (cls == "product") {
        r.cls = ResourceClass::Product;
      } else if (cls == "equipment") {
        r.cls = ResourceClass::Equipment;
      } else {
        f["class"].fail("expected reactant, intermediate, product or equipment");
      }
      r.init = f["init"].number();
      r.bounds = Bounds{f["min"].number(), f["max"].number()};
      if (r.bounds.lo > r.bounds.hi) f["max"].fail("max below min");
      if (r.init < r.bounds.lo || r.init > r.bounds.hi) f["init"].fail("initial inventory outside [min, max]");
      r.price = f.number_or("price", 0.0);
      r.cost = f.number_or("cost", 0.0);
      names.push_back(r.name);
      c.resources.push_back(r);
    }

    if (root.has("utility_prices")) {
      const Field up = root["utility_prices"];
      for (const auto& key : up.keys()) {
        c.utility_names.push_back(key);
        c.utility_prices.push_back(up[key].numbers());
      }
    }

    for (const Field& f : root["tasks"].items()) {
      Task task;
      task.name = f["name"].str();
      task.duration = static_cast<int>(f["duration"].integer(1, 1'000'000));
      task.stoich.assign(c.resources.size(), 0.0);
      const Field st = f["stoich"];
      for (const auto& key : st.keys()) {
        const std::size_t r = index_of(names, key, st[key]);
        if (c.resources[r].cls == ResourceClass::Equipment) {
          st[key].fail("equipment is listed under \"equipment\", not stoichiometry");
        }
        const double nu = st[key].number();
        if (nu > 0.0 && c.resources[r].cls == ResourceClass::Reactant) {
          st[key].fail("reactants cannot be produced");
        }
        task.stoich[r] = nu;
      }
      if (f.has("equipment")) {
        for (const Field& e : f["equipment"].items()) {
          const std::size_t r = index_of(names, e.str(), e);
          if (c.resources[r].cls != ResourceClass::Equipment) e.fail("not an equipment resource");
          task.equipment.push_back(r);
        }
      }
      if (f.has("utilities")) {
        for (const Field& u : f["utilities"].items()) {
          task.utilities.push_back(index_of(c.utility_names, u.str(), u));
        }
      }
      const bool has_batch = f.has("vmin") || f.has("vmax");
      if (has_batch) {
        task.batch = Bounds{f["vmin"].nonneg(), f["vmax"].nonneg()};
        if (task.batch.lo > task.batch.hi) f["vmax"].fail("vmax below vmin");
      }
      for (std::size_t k = 0; k < task.equipment.size(); ++k) {
        const std::string& unit = c.resources[task.equipment[k]].name;
        if (f.has("unit_batch") && f["unit_batch"].has(unit)) {
          const Field ub = f["unit_batch"][unit];
          task.unit_batch.push_back(ub.bounds());
          if (task.unit_batch.back().lo < 0.0) ub.fail("batch bounds must be nonnegative");
        } else if (has_batch) {
          task.unit_batch.push_back(task.batch);
        } else {
          f.fail("no batch bounds for unit '" + unit + "'");
        }
      }
      if (!has_batch) {
        if (c.mode == Mode::Rtn) f.fail("missing vmin/vmax");
      }
      c.tasks.push_back(std::move(task));
    }
    if (c.tasks.empty()) root["tasks"].fail("at least one task is required");

    c.demand.assign(c.resources.size(), {});
    if (root.has("demand")) {
      const Field d = root["demand"];
      for (const auto& key : d.keys()) {
        const std::size_t r = index_of(names, key, d[key]);
        if (c.resources[r].cls != ResourceClass::Product) d[key].fail("demand is only defined for products");
        c.demand[r] = d[key].numbers();
      }
    }
    return c;
  }
};

/// One decision variable: a task dispatched on a set of equipment.
struct Slot {
  std::size_t task = 0;
  std::vector<std::size_t> equipment;
  Bounds batch;
  bool eligible = true;
};

inline std::vector<Slot> build_slots(const Config& c) {
  std::vector<Slot> slots;
  if (c.mode == Mode::Rtn) {
    for (std::size_t i = 0; i < c.tasks.size(); ++i) {
      slots.push_back(Slot{i, c.tasks[i].equipment, c.tasks[i].batch, true});
    }
    return slots;
  }
  std::vector<std::size_t> units;
  for (std::size_t r = 0; r < c.resources.size(); ++r) {
    if (c.resources[r].cls == ResourceClass::Equipment) units.push_back(r);
  }
  for (std::size_t i = 0; i < c.tasks.size(); ++i) {
    const Task& task = c.tasks[i];
    for (const std::size_t e : units) {
      const auto it = std::find(task.equipment.begin(), task.equipment.end(), e);
      if (it == task.equipment.end()) {
        slots.push_back(Slot{i, {e}, Bounds{0.0, 0.0}, false});
      } else {
        const auto k = static_cast<std::size_t>(it - task.equipment.begin());
        slots.push_back(Slot{i, {e}, task.unit_batch[k], true});
      }
    }
  }
  return slots;
}

struct Sanitized {
  std::vector<double> scaled;
  std::vector<double> batch;
  double deviation = 0.0;
  double equipment_violations = 0.0;
};

/// RTNEnv / STNEnv.
///
/// Observation: inventory (|R|), pending buffer (tau_max rows x pendable
/// resources, row-major), then per product a demand window of length T
/// starting at the current step.
class BatchSchedEnv final : public Env {
 public:
  explicit BatchSchedEnv(Config config)
      : cfg_(std::make_shared<const Config>(std::move(config))), slots_(build_slots(*cfg_)) {
    for (const auto& task : cfg_->tasks) tau_max_ = std::max(tau_max_, task.duration);
    for (std::size_t r = 0; r < cfg_->resources.size(); ++r) {
      const auto cls = cfg_->resources[r].cls;
      if (cls != ResourceClass::Reactant) pend_.push_back(r);
      if (cls == ResourceClass::Product) products_.push_back(r);
    }
    do_reset();
  }

  std::string_view name() const override {
    return cfg_->mode == Mode::Rtn ? "RTNEnv" : "STNEnv";
  }
  std::size_t action_dim() const override { return slots_.size(); }
  std::size_t observation_dim() const override {
    return cfg_->resources.size() + static_cast<std::size_t>(tau_max_) * pend_.size() +
           products_.size() * static_cast<std::size_t>(cfg_->horizon);
  }
  int horizon() const override { return cfg_->horizon; }
  std::unique_ptr<Env> clone() const override { return std::make_unique<BatchSchedEnv>(*this); }

  const Config& config() const { return *cfg_; }
  const std::vector<Slot>& slots() const { return slots_; }
  const std::vector<double>& inventory() const { return x_; }
  /// pending()[row][k] is the quantity of resource pendable()[k] due in `row` steps.
  const std::vector<std::vector<double>>& pending() const { return pending_; }
  const std::vector<std::size_t>& pendable() const { return pend_; }

  /// Decode a clamped action and apply the headroom, batch-bound and
  /// equipment-availability rules against the current inventory.
  Sanitized decode_and_sanitize(std::span<const double> a_norm) const {
    if (a_norm.size() != slots_.size()) throw DimensionMismatch(slots_.size(), a_norm.size());
    const Config& c = *cfg_;
    Sanitized s;
    s.scaled.resize(slots_.size());
    s.batch.resize(slots_.size());
    std::vector<double> avail = x_;
    for (std::size_t k = 0; k < slots_.size(); ++k) {
      const Slot& slot = slots_[k];
      const double a = clamp_unit(a_norm[k]);
      const double scaled = std::abs(a) <= c.epsilon ? 0.0 : affine_decode(a, slot.batch);
      s.scaled[k] = scaled;

      double batch = 0.0;
      if (scaled > 0.0 && slot.eligible) {
        const double headroom = material_headroom(slot.task);
        batch = headroom < slot.batch.lo ? 0.0 : std::min(scaled, headroom);
      }
      if (batch > 0.0) {
        const bool unit_missing = std::any_of(slot.equipment.begin(), slot.equipment.end(),
                                              [&](std::size_t e) { return avail[e] <= 0.0; });
        if (unit_missing) {
          batch = 0.0;
        } else {
          for (const std::size_t e : slot.equipment) {
            if (avail[e] < 1.0) s.equipment_violations += 1.0;
            avail[e] -= 1.0;
          }
        }
      }
      s.batch[k] = batch;
      s.deviation += std::abs(batch - scaled);
    }
    return s;
  }

 protected:
  Observation do_reset() override {
    const Config& c = *cfg_;
    x_.resize(c.resources.size());
    for (std::size_t r = 0; r < c.resources.size(); ++r) x_[r] = c.resources[r].init;
    pending_.assign(static_cast<std::size_t>(tau_max_), std::vector<double>(pend_.size(), 0.0));
    return observe(0);
  }

  StepOutcome advance(std::span<const double> action) override {
    const Config& c = *cfg_;
    const auto t = static_cast<std::size_t>(time());
    const Sanitized s = decode_and_sanitize(action);

    // Inputs are consumed at dispatch; outputs and equipment returns go to
    // the pending row that matures after the task's duration.
    for (std::size_t k = 0; k < slots_.size(); ++k) {
      const double batch = s.batch[k];
      if (batch <= 0.0) continue;
      const Slot& slot = slots_[k];
      const Task& task = c.tasks[slot.task];
      const auto row = static_cast<std::size_t>(task.duration - 1);
      for (std::size_t r = 0; r < c.resources.size(); ++r) {
        const double nu = task.stoich[r];
        if (nu < 0.0) x_[r] += nu * batch;
      }
      for (std::size_t col = 0; col < pend_.size(); ++col) {
        const double nu = task.stoich[pend_[col]];
        if (nu > 0.0) pending_[row][col] += nu * batch;
      }
      for (const std::size_t e : slot.equipment) {
        x_[e] -= 1.0;
        pending_[row][pend_col(e)] += 1.0;
      }
    }

    for (std::size_t col = 0; col < pend_.size(); ++col) x_[pend_[col]] += pending_[0][col];
    std::rotate(pending_.begin(), pending_.begin() + 1, pending_.end());
    std::fill(pending_.back().begin(), pending_.back().end(), 0.0);

    double lb_count = 0.0;
    double ub_count = 0.0;
    double order = 0.0;
    for (std::size_t r = 0; r < c.resources.size(); ++r) {
      const Resource& res = c.resources[r];
      const bool material = res.cls == ResourceClass::Intermediate || res.cls == ResourceClass::Product;
      if (material && x_[r] < res.bounds.lo) lb_count += 1.0;
      if (x_[r] > res.bounds.hi) ub_count += 1.0;
      if (res.cls == ResourceClass::Reactant) order += std::max(-x_[r], 0.0) * res.cost;
      x_[r] = std::clamp(x_[r], res.bounds.lo, res.bounds.hi);
    }

    double revenue = 0.0;
    double unmet = 0.0;
    for (const std::size_t p : products_) {
      const Resource& res = c.resources[p];
      const double d = series_at(c.demand[p], t);
      const double available = x_[p] - res.bounds.lo;
      const double sold = std::min(available, d);
      revenue += sold * res.price;
      unmet += 1.5 * std::max(d - available, 0.0) * res.price;
      x_[p] -= std::max(sold, 0.0);
    }

    double util = 0.0;
    for (std::size_t k = 0; k < slots_.size(); ++k) {
      if (s.batch[k] <= 0.0) continue;
      for (const std::size_t u : c.tasks[slots_[k].task].utilities) {
        util += s.batch[k] * series_at(c.utility_prices[u], t);
      }
    }

    StepOutcome out;
    out.reward = revenue - util - unmet - order;
    out.info = {
        {"cost_lb", lb_count},
        {"cost_ub", ub_count},
        {"cost_eq", s.equipment_violations},
        {"cost_sanit", c.lambda_sanit * s.deviation},
        {"sanit_deviation", s.deviation},
        {"revenue", revenue},
        {"unmet", unmet},
        {"order", order},
        {"util", util},
    };
    out.sanitized_action = s.batch;
    out.observation = observe(t + 1);
    return out;
  }

 private:
  static double series_at(const std::vector<double>& series, std::size_t t) {
    return t < series.size() ? series[t] : 0.0;
  }

  double material_headroom(std::size_t task_index) const {
    const Config& c = *cfg_;
    const Task& task = c.tasks[task_index];
    double b = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < c.resources.size(); ++r) {
      const double nu = task.stoich[r];
      if (nu >= 0.0) continue;
      b = std::min(b, std::max(0.0, x_[r] - c.resources[r].bounds.lo) / std::abs(nu));
    }
    return b;
  }

  std::size_t pend_col(std::size_t resource) const {
    return static_cast<std::size_t>(std::find(pend_.begin(), pend_.end(), resource) - pend_.begin());
  }

  Observation observe(std::size_t t) const {
    const Config& c = *cfg_;
    Observation obs;
    obs.reserve(observation_dim());
    obs.insert(obs.end(), x_.begin(), x_.end());
    for (const auto& row : pending_) obs.insert(obs.end(), row.begin(), row.end());
    for (const std::size_t p : products_) {
      ForecastWindow fw{c.demand[p], 0, static_cast<std::size_t>(c.horizon)};
      std::vector<double> w(fw.length, 0.0);
      for (std::size_t i = 0; i < fw.length; ++i) {
        if (t + i < fw.series.size()) w[i] = fw.series[t + i];
      }
      obs.insert(obs.end(), w.begin(), w.end());
    }
    return obs;
  }

  std::shared_ptr<const Config> cfg_;
  std::vector<Slot> slots_;
  int tau_max_ = 1;
  std::vector<std::size_t> pend_;
  std::vector<std::size_t> products_;
  std::vector<double> x_;
  std::vector<std::vector<double>> pending_;
};

}  // namespace safeor::batch_sched
