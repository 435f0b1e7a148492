#pragma once

#include <algorithm>
#include <memory>
#include <string>
#include <vector>

#include "safeor/config.hpp"
#include "safeor/core.hpp"

namespace safeor::unit_commitment {

enum class Variant { V0, V1 };

struct Generator {
  std::string name;
  std::size_t bus = 0;
  double a = 0.0, b = 0.0, c = 0.0;
  double startup_cost = 0.0;
  double shutdown_cost = 0.0;
  int up_time = 1;
  int down_time = 1;
  double ramp_up = 0.0, ramp_down = 0.0;
  double startup_rate = 0.0, shutdown_rate = 0.0;
  Bounds power;
  std::vector<int> u_history;  // most recent first
  double p0 = 0.0;

  std::size_t history_length() const {
    return static_cast<std::size_t>(std::max(up_time, down_time)) + 1;
  }
};

struct Line {
  std::size_t from = 0;
  std::size_t to = 0;
  double susceptance = 0.0;
  Bounds flow;
};

struct Config {
  Variant variant = Variant::V0;
  int horizon = 1;
  double penalty = 1.0;
  double c_ls = 0.0;
  double c_r = 0.0;
  double reserve = 0.0;
  int window = 1;
  std::vector<std::string> bus_names;
  std::vector<Bounds> theta;  // per bus
  std::vector<Generator> generators;
  std::vector<Line> lines;
  std::vector<std::vector<double>> demand;  // per bus

  static Config from_json(const json& doc) { return parse(Field(doc, "")); }

  static Config parse(const Field& root) {
    Config c;
    const std::string variant = root.str_or("variant", "v0");
    if (variant == "v0") {
      c.variant = Variant::V0;
    } else if (variant == "v1") {
      c.variant = Variant::V1;
    } else {
      root["variant"].fail("expected \"v0\" or \"v1\"");
    }
    c.horizon = static_cast<int>(root["horizon"].integer(1, 1'000'000));
    c.penalty = root["penalty"].nonneg();
    c.c_ls = root["C_LS"].nonneg();
    c.c_r = root["C_R"].nonneg();
    c.reserve = root["reserve"].nonneg();
    c.window = static_cast<int>(root["window"].integer(1, 1'000'000));

    if (c.variant == Variant::V1 || root.has("buses")) {
      for (const Field& f : root["buses"].items()) {
        c.bus_names.push_back(f["name"].str());
        c.theta.push_back(f.has("theta") ? f["theta"].bounds() : Bounds{0.0, 0.0});
      }
      if (c.bus_names.empty()) root["buses"].fail("at least one bus is required");
    } else {
      c.bus_names = {"bus"};
      c.theta = {Bounds{0.0, 0.0}};
    }
    if (c.variant == Variant::V0) {
      if (c.bus_names.size() != 1) root["buses"].fail("v0 is a single-bus system");
      if (root.has("lines") && root["lines"].size() != 0) root["lines"].fail("v0 has no lines");
    }

    for (const Field& f : root["generators"].items()) {
      Generator g;
      g.name = f["name"].str();
      if (c.variant == Variant::V1) g.bus = index_of(c.bus_names, f["bus"].str(), f["bus"]);
      g.a = f["a"].number();
      g.b = f["b"].number();
      g.c = f["c"].number();
      g.startup_cost = f["startup_cost"].nonneg();
      g.shutdown_cost = f["shutdown_cost"].nonneg();
      g.up_time = static_cast<int>(f["UT"].integer(1, 10'000));
      g.down_time = static_cast<int>(f["DT"].integer(1, 10'000));
      g.ramp_up = f["RU"].nonneg();
      g.ramp_down = f["RD"].nonneg();
      g.startup_rate = f["SU"].nonneg();
      g.shutdown_rate = f["SD"].nonneg();
      g.power = Bounds{f["pmin"].nonneg(), f["pmax"].nonneg()};
      if (g.power.lo > g.power.hi) f["pmax"].fail("pmax below pmin");

      const std::size_t len = g.history_length();
      g.u_history.assign(len, 0);
      if (f.has("u_history")) {
        const Field h = f["u_history"];
        if (h.size() == 0) h.fail("history must not be empty");
        for (std::size_t k = 0; k < len; ++k) {
          const std::size_t src = std::min(k, h.size() - 1);
          g.u_history[k] = static_cast<int>(h[src].integer(0, 1));
        }
      }
      g.p0 = f.number_or("p0", 0.0);
      if (g.p0 < 0.0 || g.p0 > g.power.hi) f["p0"].fail("initial output outside [0, pmax]");
      if (g.u_history[0] == 0 && g.p0 != 0.0) f["p0"].fail("an offline unit must start at 0");
      c.generators.push_back(std::move(g));
    }
    if (c.generators.empty()) root["generators"].fail("at least one generator is required");

    if (c.variant == Variant::V1 && root.has("lines")) {
      for (const Field& f : root["lines"].items()) {
        Line l;
        l.from = index_of(c.bus_names, f["from"].str(), f["from"]);
        l.to = index_of(c.bus_names, f["to"].str(), f["to"]);
        if (l.from == l.to) f["to"].fail("line endpoints must differ");
        l.susceptance = f["B"].number();
        l.flow = Bounds{f["fmin"].number(), f["fmax"].number()};
        if (l.flow.lo > l.flow.hi) f["fmax"].fail("fmax below fmin");
        c.lines.push_back(l);
      }
    }

    c.demand.assign(c.bus_names.size(), {});
    const Field d = root["demand"];
    if (d.raw().is_array()) {
      if (c.bus_names.size() != 1) d.fail("a bare demand series needs a single-bus system");
      c.demand[0] = d.numbers();
    } else {
      for (const auto& key : d.keys()) {
        c.demand[index_of(c.bus_names, key, d[key])] = d[key].numbers();
      }
    }
    for (std::size_t n = 0; n < c.demand.size(); ++n) {
      if (c.demand[n].size() < static_cast<std::size_t>(c.horizon)) {
        d.fail("demand for bus '" + c.bus_names[n] + "' is shorter than the horizon");
      }
    }
    return c;
  }
};

struct CommitmentRepair {
  int u = 0;
  bool violated = false;
};

struct PowerRepair {
  double p = 0.0;
  double excess = 0.0;
};

/// UCEnv-v0 / UCEnv-v1.
///
/// Action: u (G, thresholded at 0), p (G) over [pmin, pmax], and for v1 the
/// angles of buses 2..N. Observation: each generator's status history (most
/// recent first), p (G), bus angles (v1 only), then per bus a demand window
/// of length W starting at the step about to be taken.
class UnitCommitmentEnv final : public Env {
 public:
  explicit UnitCommitmentEnv(Config config) : cfg_(std::make_shared<const Config>(std::move(config))) {
    do_reset();
  }

  std::string_view name() const override {
    return cfg_->variant == Variant::V0 ? "UCEnv-v0" : "UCEnv-v1";
  }
  std::size_t action_dim() const override {
    const std::size_t g = cfg_->generators.size();
    return 2 * g + (is_v1() ? cfg_->bus_names.size() - 1 : 0);
  }
  std::size_t observation_dim() const override {
    std::size_t n = 0;
    for (const auto& g : cfg_->generators) n += g.history_length();
    n += cfg_->generators.size();
    if (is_v1()) n += cfg_->bus_names.size();
    return n + cfg_->bus_names.size() * static_cast<std::size_t>(cfg_->window);
  }
  int horizon() const override { return cfg_->horizon; }
  std::unique_ptr<Env> clone() const override { return std::make_unique<UnitCommitmentEnv>(*this); }

  const Config& config() const { return *cfg_; }
  const std::vector<int>& u_history(std::size_t g) const { return hist_[g]; }
  double power(std::size_t g) const { return p_[g]; }

  /// Minimum up/down-time repair of a requested status for generator `g`.
  CommitmentRepair repair_commitment(std::size_t g, int u_next) const {
    const Generator& gen = cfg_->generators[g];
    const auto& h = hist_[g];
    const int u_now = h[0];
    int v_sum = std::max(0, u_next - u_now);
    int w_sum = -std::min(0, u_next - u_now);
    for (int k = 0; k + 1 < gen.up_time; ++k) v_sum += std::max(0, h[k] - h[k + 1]);
    for (int k = 0; k + 1 < gen.down_time; ++k) w_sum += -std::min(0, h[k] - h[k + 1]);
    if (v_sum > u_next) return {1, true};
    if (w_sum > 1 - u_next) return {0, true};
    return {u_next, false};
  }

  /// Ramp repair of a requested output given the repaired status `u_rep`.
  PowerRepair repair_power(std::size_t g, int u_rep, double p_next) const {
    const Generator& gen = cfg_->generators[g];
    const int u_now = hist_[g][0];
    const double p_now = p_[g];
    const int v = std::max(0, u_rep - u_now);
    const int w = -std::min(0, u_rep - u_now);
    const double up = gen.ramp_up * u_now + gen.startup_rate * v;
    const double down = gen.ramp_down * u_rep + gen.shutdown_rate * w;
    PowerRepair r{p_next, 0.0};
    if (p_next - p_now > up) {
      r.p = p_now + up;
      r.excess = p_next - r.p;
    } else if (p_now - p_next > down) {
      r.p = p_now - down;
      r.excess = r.p - p_next;
    }
    r.p *= u_rep;
    return r;
  }

 protected:
  Observation do_reset() override {
    const Config& c = *cfg_;
    hist_.clear();
    p_.clear();
    for (const auto& g : c.generators) {
      hist_.push_back(g.u_history);
      p_.push_back(g.p0);
    }
    theta_.assign(c.bus_names.size(), 0.0);
    return observe(0);
  }

  StepOutcome advance(std::span<const double> action) override {
    const Config& c = *cfg_;
    const auto t = static_cast<std::size_t>(time());
    const std::size_t ng = c.generators.size();

    double utdt = 0.0;
    double ramp = 0.0;
    double gen_cost = 0.0;
    double start_cost = 0.0;
    double stop_cost = 0.0;
    double reserve_total = 0.0;
    std::vector<double> injection(c.bus_names.size(), 0.0);
    std::vector<double> sanitized(action_dim(), 0.0);

    std::vector<int> u_new(ng);
    std::vector<double> p_new(ng);
    for (std::size_t g = 0; g < ng; ++g) {
      const Generator& gen = c.generators[g];
      const int u_req = action[g] > 0.0 ? 1 : 0;
      const double p_req = affine_decode(action[ng + g], gen.power);
      const int u_now = hist_[g][0];

      CommitmentRepair cr = repair_commitment(g, u_req);
      // A running unit above its shutdown rate cannot reach zero this step.
      if (cr.u == 0 && u_now == 1 && p_[g] > gen.shutdown_rate) cr = {1, true};
      if (cr.violated) utdt += c.penalty;

      const PowerRepair pr = repair_power(g, cr.u, p_req);
      ramp += c.penalty * pr.excess;

      const int v = std::max(0, cr.u - u_now);
      const int w = -std::min(0, cr.u - u_now);
      u_new[g] = cr.u;
      p_new[g] = pr.p;
      if (cr.u == 1) gen_cost += gen.a * pr.p * pr.p + gen.b * pr.p + gen.c;
      start_cost += gen.startup_cost * v;
      stop_cost += gen.shutdown_cost * w;
      reserve_total += std::max(
          std::min(gen.power.hi * cr.u - pr.p, gen.ramp_up * u_now + gen.startup_rate * v), 0.0);
      injection[gen.bus] += pr.p;
      sanitized[g] = cr.u;
      sanitized[ng + g] = pr.p;
    }

    theta_.assign(c.bus_names.size(), 0.0);
    if (is_v1()) {
      for (std::size_t n = 1; n < c.bus_names.size(); ++n) {
        theta_[n] = affine_decode(action[2 * ng + n - 1], c.theta[n]);
        sanitized[2 * ng + n - 1] = theta_[n];
      }
    }

    double cap = 0.0;
    for (const Line& l : c.lines) {
      const double f = l.susceptance * (theta_[l.from] - theta_[l.to]);
      const double fr = std::clamp(f, l.flow.lo, l.flow.hi);
      cap += c.penalty * std::max({f - l.flow.hi, l.flow.lo - f, 0.0});
      injection[l.from] -= fr;
      injection[l.to] += fr;
    }

    double shed = 0.0;
    for (std::size_t n = 0; n < c.bus_names.size(); ++n) {
      shed += std::max(c.demand[n][t] - injection[n], 0.0);
    }
    const double shortfall = std::max(c.reserve - reserve_total, 0.0);

    for (std::size_t g = 0; g < ng; ++g) {
      auto& h = hist_[g];
      std::rotate(h.rbegin(), h.rbegin() + 1, h.rend());
      h[0] = u_new[g];
      p_[g] = p_new[g];
    }

    StepOutcome out;
    out.reward = -gen_cost - start_cost - stop_cost - c.c_ls * shed - c.c_r * shortfall;
    out.info = {
        {"cost_utdt", utdt},
        {"cost_ramp", ramp},
        {"cost_cap", cap},
        {"shed", shed},
        {"reserve_shortfall", shortfall},
    };
    out.sanitized_action = std::move(sanitized);
    out.observation = observe(t + 1);
    return out;
  }

 private:
  bool is_v1() const { return cfg_->variant == Variant::V1; }

  Observation observe(std::size_t t) const {
    const Config& c = *cfg_;
    Observation obs;
    obs.reserve(observation_dim());
    for (const auto& h : hist_) obs.insert(obs.end(), h.begin(), h.end());
    obs.insert(obs.end(), p_.begin(), p_.end());
    if (is_v1()) obs.insert(obs.end(), theta_.begin(), theta_.end());
    for (const auto& series : c.demand) {
      ForecastWindow{series, 0, static_cast<std::size_t>(c.window)}.append_to(obs, t);
    }
    return obs;
  }

  std::shared_ptr<const Config> cfg_;
  std::vector<std::vector<int>> hist_;
  std::vector<double> p_;
  std::vector<double> theta_;
};

}  // namespace safeor::unit_commitment
