#pragma once

#include <cmath>
#include <memory>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "safeor/config.hpp"
#include "safeor/core.hpp"

namespace safeor::gtep {

struct GenType {
  std::string name;
  double capacity = 0.0;
  double install_cost = 0.0;
  std::vector<long long> max_count;  // per region
};

struct Line {
  std::size_t from = 0;
  std::size_t to = 0;
  double capacity = 0.0;
  double install_cost = 0.0;
};

struct Config {
  int horizon = 1;
  std::vector<std::string> regions;
  std::vector<GenType> gen_types;
  std::vector<Line> lines;
  std::vector<std::vector<double>> demand;         // per region
  std::vector<std::vector<long long>> initial;     // [type][region]
  double lambda0 = 0.0;
  double lambda2 = 0.0;
  double eps = 1e-6;
  int window = 1;
  bool with_lines = true;

  static Config from_json(const json& doc) { return parse(Field(doc, "")); }

  static Config parse(const Field& root) {
    Config c;
    c.horizon = static_cast<int>(root["horizon"].integer(1, 1'000'000));
    for (const Field& f : root["regions"].items()) c.regions.push_back(f.str());
    if (c.regions.empty()) root["regions"].fail("at least one region is required");
    const std::size_t nr = c.regions.size();

    for (const Field& f : root["gen_types"].items()) {
      GenType g;
      g.name = f["name"].str();
      g.capacity = f["capacity"].nonneg();
      g.install_cost = f["install_cost"].nonneg();
      const Field m = f["max"];
      if (m.raw().is_array()) {
        if (m.size() != nr) m.fail("expected one entry per region");
        for (std::size_t r = 0; r < nr; ++r) g.max_count.push_back(m[r].integer(0, 1'000'000));
      } else {
        g.max_count.assign(nr, 0);
        for (const auto& key : m.keys()) {
          g.max_count[index_of(c.regions, key, m[key])] = m[key].integer(0, 1'000'000);
        }
      }
      c.gen_types.push_back(std::move(g));
    }
    if (c.gen_types.empty()) root["gen_types"].fail("at least one generator type is required");

    c.with_lines = root.boolean_or("with_lines", true);
    if (c.with_lines && root.has("lines")) {
      std::set<std::pair<std::size_t, std::size_t>> seen;
      for (const Field& f : root["lines"].items()) {
        Line l;
        l.from = index_of(c.regions, f["from"].str(), f["from"]);
        l.to = index_of(c.regions, f["to"].str(), f["to"]);
        if (l.from == l.to) f["to"].fail("line endpoints must differ");
        if (!seen.insert(std::minmax(l.from, l.to)).second) {
          f.fail("each region pair may appear only once");
        }
        l.capacity = f["capacity"].nonneg();
        l.install_cost = f["install_cost"].nonneg();
        c.lines.push_back(l);
      }
    }

    c.demand.assign(nr, {});
    const Field d = root["demand"];
    for (const auto& key : d.keys()) c.demand[index_of(c.regions, key, d[key])] = d[key].numbers();
    for (std::size_t r = 0; r < nr; ++r) {
      if (c.demand[r].size() < static_cast<std::size_t>(c.horizon)) {
        d.fail("demand for region '" + c.regions[r] + "' is shorter than the horizon");
      }
    }

    c.initial.assign(c.gen_types.size(), std::vector<long long>(nr, 0));
    if (root.has("initial")) {
      const Field init = root["initial"];
      for (std::size_t i = 0; i < c.gen_types.size(); ++i) {
        if (!init.has(c.gen_types[i].name)) continue;
        const Field row = init[c.gen_types[i].name];
        if (row.size() != nr) row.fail("expected one entry per region");
        for (std::size_t r = 0; r < nr; ++r) {
          c.initial[i][r] = row[r].integer(0, c.gen_types[i].max_count[r]);
        }
      }
    }

    c.lambda0 = root["lambda0"].nonneg();
    c.lambda2 = root["lambda2"].nonneg();
    if (root.has("eps")) {
      c.eps = root["eps"].number();
      if (c.eps <= 0.0) root["eps"].fail("must be positive");
    }
    c.window = static_cast<int>(root["window"].integer(1, 1'000'000));
    return c;
  }
};

struct Sanitized {
  std::vector<long long> n_add;       // [type * regions + region]
  std::vector<long long> n_prebound;
  std::vector<double> excess;
  std::vector<double> flow;
};

/// GTEPEnv, with or without transmission lines.
///
/// Action: generator additions (type-major over regions) then line flows.
/// Observation: counts n (type-major), line status (with lines only), per
/// region a demand window of length k from the step about to be taken, then t.
class GtepEnv final : public Env {
 public:
  explicit GtepEnv(Config config) : cfg_(std::make_shared<const Config>(std::move(config))) { do_reset(); }

  std::string_view name() const override {
    return cfg_->with_lines ? "GTEPEnv" : "GTEPEnv-nolines";
  }
  std::size_t action_dim() const override { return n_slots() + cfg_->lines.size(); }
  std::size_t observation_dim() const override {
    return n_slots() + cfg_->lines.size() +
           cfg_->regions.size() * static_cast<std::size_t>(cfg_->window) + 1;
  }
  int horizon() const override { return cfg_->horizon; }
  std::unique_ptr<Env> clone() const override { return std::make_unique<GtepEnv>(*this); }

  const Config& config() const { return *cfg_; }
  long long count(std::size_t type, std::size_t region) const {
    return n_[type * cfg_->regions.size() + region];
  }
  bool line_installed(std::size_t l) const { return nt_[l] != 0; }

  /// Rounding, flow threshold and max-count repair against the current counts.
  Sanitized sanitize(std::span<const double> n_add_raw, std::span<const double> p_raw) const {
    const Config& c = *cfg_;
    const std::size_t nr = c.regions.size();
    Sanitized s;
    for (std::size_t k = 0; k < n_slots(); ++k) {
      const long long m = c.gen_types[k / nr].max_count[k % nr];
      const auto pre = static_cast<long long>(std::round(n_add_raw[k]));
      const long long over = n_[k] + pre - m;
      s.n_prebound.push_back(pre);
      s.n_add.push_back(over > 0 ? m - n_[k] : pre);
      s.excess.push_back(over > 0 ? static_cast<double>(over) : 0.0);
    }
    for (const double p : p_raw) s.flow.push_back(std::abs(p) <= c.eps ? 0.0 : p);
    return s;
  }

 protected:
  Observation do_reset() override {
    const Config& c = *cfg_;
    n_.clear();
    for (const auto& row : c.initial) n_.insert(n_.end(), row.begin(), row.end());
    nt_.assign(c.lines.size(), 0);
    return observe(0);
  }

  StepOutcome advance(std::span<const double> action) override {
    const Config& c = *cfg_;
    const auto t = static_cast<std::size_t>(time());
    const std::size_t nr = c.regions.size();
    const std::size_t slots = n_slots();

    std::vector<double> n_raw(slots);
    for (std::size_t k = 0; k < slots; ++k) {
      const double m = static_cast<double>(c.gen_types[k / nr].max_count[k % nr]);
      n_raw[k] = affine_decode(action[k], Bounds{0.0, m});
    }
    std::vector<double> p_raw(c.lines.size());
    for (std::size_t l = 0; l < c.lines.size(); ++l) {
      const double cap = c.lines[l].capacity;
      p_raw[l] = affine_decode(action[slots + l], Bounds{-cap, cap});
    }
    const Sanitized s = sanitize(n_raw, p_raw);

    double bound_cost = 0.0;
    double gen_reward = 0.0;
    for (std::size_t k = 0; k < slots; ++k) {
      if (s.excess[k] > 0.0) bound_cost += c.lambda0 + c.lambda2 * s.excess[k] * s.excess[k];
      n_[k] += s.n_add[k];
      gen_reward -= static_cast<double>(s.n_add[k]) * c.gen_types[k / nr].install_cost;
    }

    double line_reward = 0.0;
    double new_lines = 0.0;
    std::vector<double> avail(nr, 0.0);
    for (std::size_t l = 0; l < c.lines.size(); ++l) {
      if (nt_[l] == 0 && std::abs(s.flow[l]) > 0.0) {
        nt_[l] = 1;
        line_reward -= c.lines[l].install_cost;
        new_lines += 1.0;
      }
      avail[c.lines[l].from] -= s.flow[l];
      avail[c.lines[l].to] += s.flow[l];
    }

    double demand_cost = 0.0;
    for (std::size_t r = 0; r < nr; ++r) {
      for (std::size_t i = 0; i < c.gen_types.size(); ++i) {
        avail[r] += static_cast<double>(n_[i * nr + r]) * c.gen_types[i].capacity;
      }
      const double gap = c.demand[r][t] - avail[r];
      if (gap > 0.0) demand_cost += c.lambda0 + c.lambda2 * gap * gap;
    }

    StepOutcome out;
    out.reward = gen_reward + line_reward;
    out.info = {
        {"cost_bound_gen", bound_cost},
        {"cost_demand", demand_cost},
        {"new_lines", new_lines},
    };
    out.sanitized_action.reserve(action_dim());
    for (const long long a : s.n_add) out.sanitized_action.push_back(static_cast<double>(a));
    out.sanitized_action.insert(out.sanitized_action.end(), s.flow.begin(), s.flow.end());
    out.observation = observe(t + 1);
    return out;
  }

 private:
  std::size_t n_slots() const { return cfg_->gen_types.size() * cfg_->regions.size(); }

  Observation observe(std::size_t t) const {
    const Config& c = *cfg_;
    Observation obs;
    obs.reserve(observation_dim());
    for (const long long n : n_) obs.push_back(static_cast<double>(n));
    for (const int b : nt_) obs.push_back(b);
    for (const auto& series : c.demand) {
      ForecastWindow{series, 0, static_cast<std::size_t>(c.window)}.append_to(obs, t);
    }
    obs.push_back(static_cast<double>(t));
    return obs;
  }

  std::shared_ptr<const Config> cfg_;
  std::vector<long long> n_;
  std::vector<int> nt_;
};

}  // namespace safeor::gtep
