#pragma once

#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "safeor/config.hpp"
#include "safeor/core.hpp"

namespace safeor::sched_maint {

struct Compressor {
  std::string name;
  double capacity = 0.0;
  double spen = 0.0;
  int mttf = 1;
  int mttr = 1;
  int mnrd = 1;
  int tlcm0 = 0;
  int tslm0 = 0;
  int cdm0 = 0;
};

struct Penalties {
  double md = 0.0;
  double mf = 0.0;
  double em = 0.0;
  double rp = 0.0;
  double d = 0.0;
};

struct Config {
  int horizon = 1;
  int forecast = 1;
  double alpha_ext = 0.0;
  double q_ext = 0.0;
  std::vector<Compressor> compressors;
  std::vector<double> demand;
  std::vector<double> electricity;
  Penalties penalties;
  bool em_absolute = false;
  bool demand_includes_purchase = false;

  static Config from_json(const json& doc) { return parse(Field(doc, "")); }

  static Config parse(const Field& root) {
    Config c;
    c.horizon = static_cast<int>(root["horizon"].integer(1, 1'000'000));
    c.forecast = static_cast<int>(root["forecast"].integer(1, 1'000'000));
    c.alpha_ext = root["alpha_ext"].nonneg();
    c.q_ext = root["q_ext"].nonneg();
    for (const Field& f : root["compressors"].items()) {
      Compressor k;
      k.name = f["name"].str();
      k.capacity = f["capacity"].nonneg();
      k.spen = f["spen"].nonneg();
      k.mttf = static_cast<int>(f["mttf"].integer(1, 1'000'000));
      k.mttr = static_cast<int>(f["mttr"].integer(1, 1'000'000));
      k.mnrd = static_cast<int>(f["mnrd"].integer(1, k.mttf));
      k.tslm0 = static_cast<int>(f.has("tslm0") ? f["tslm0"].integer(0, 1'000'000) : 0);
      k.tlcm0 = static_cast<int>(f.has("tlcm0") ? f["tlcm0"].integer(0, k.mttr - 1) : 0);
      k.cdm0 = static_cast<int>(f.has("cdm0") ? f["cdm0"].integer(0, 1) : (k.tslm0 >= k.mnrd ? 1 : 0));
      if (k.tlcm0 > 0 && k.cdm0 == 1) f["cdm0"].fail("a compressor under maintenance cannot be eligible");
      c.compressors.push_back(k);
    }
    if (c.compressors.empty()) root["compressors"].fail("at least one compressor is required");

    const auto need = static_cast<std::size_t>(c.horizon + c.forecast);
    c.demand = root["demand"].numbers();
    if (c.demand.size() < need) root["demand"].fail("series must cover horizon + forecast");
    c.electricity = root["electricity"].numbers();
    if (c.electricity.size() < need) root["electricity"].fail("series must cover horizon + forecast");

    const Field p = root["penalties"];
    c.penalties = Penalties{p["md"].nonneg(), p["mf"].nonneg(), p["em"].nonneg(), p["rp"].nonneg(),
                            p["d"].nonneg()};
    c.em_absolute = root.boolean_or("em_absolute", false);
    c.demand_includes_purchase = root.boolean_or("demand_includes_purchase", false);
    return c;
  }
};

struct State {
  int tslm = 0;
  int tlcm = 0;
  int cdm = 0;
};

struct Decision {
  int maintain = 0;
  double production = 0.0;  // fraction of capacity
};

struct CostBreakdown {
  double mi = 0.0, mf = 0.0, em = 0.0, ramp = 0.0, demand = 0.0;
};

/// Per-compressor costs of a raw (unsanitized) decision.
inline CostBreakdown assess_compressor(const Compressor& k, const State& s, const Decision& a,
                                       const Penalties& p, bool em_absolute) {
  CostBreakdown c;
  const bool m = a.maintain == 1;
  if ((!m && s.tlcm > 0) || (m && s.tlcm == 0 && s.tslm == 0) || (m && s.tlcm < 0)) {
    c.mi = p.md * std::exp(std::abs(static_cast<double>(s.tlcm)));
  }
  if (!m && s.tslm > k.mttf) c.mf = p.mf * (s.tslm - k.mttf);
  if (!m && s.tslm == k.mttf) c.mf = p.mf;
  if (m && s.cdm == 0 && s.tlcm == 0) {
    const double em = p.em * s.tslm;
    c.em = em_absolute ? em : -em;
  }
  if (m && a.production != 0.0) c.ramp = p.rp * a.production * k.capacity;
  return c;
}

/// Forced maintenance, production halt, ineligible-maintenance cancel and
/// in-progress continuation, applied in that order.
inline Decision sanitize_decision(const Compressor& k, const State& s, Decision a) {
  if (s.tslm >= k.mttf && a.maintain != 1) a = {1, 0.0};
  if (a.maintain == 1 && a.production > 0.0) a.production = 0.0;
  if (s.cdm == 0 && s.tlcm == 0 && a.maintain == 1) a.maintain = 0;
  if (s.tlcm > 0 && a.maintain != 1) a = {1, 0.0};
  return a;
}

inline State transition(const Compressor& k, const State& s, const Decision& a) {
  State n;
  n.tslm = a.maintain == 1 ? 0 : s.tslm + 1;
  if (a.maintain == 1) {
    n.tlcm = s.cdm == 1 ? k.mttr - 1 : s.tlcm - 1;
  } else {
    n.tlcm = s.tlcm;
  }
  n.cdm = n.tslm >= k.mnrd ? 1 : 0;
  return n;
}

/// SchedMaintEnv.
///
/// Action: maintenance flags (n, decoded to [0, 1] and rounded at 0.5),
/// production fractions (n), purchase fraction. Observation: demand window
/// (S), price window (S), both starting at the current day, then tslm, tlcm
/// and cdm per compressor.
class SchedMaintEnv final : public Env {
 public:
  explicit SchedMaintEnv(Config config) : cfg_(std::make_shared<const Config>(std::move(config))) { do_reset(); }

  std::string_view name() const override { return "SchedMaintEnv"; }
  std::size_t action_dim() const override { return 2 * cfg_->compressors.size() + 1; }
  std::size_t observation_dim() const override {
    return 2 * static_cast<std::size_t>(cfg_->forecast) + 3 * cfg_->compressors.size();
  }
  int horizon() const override { return cfg_->horizon; }
  std::unique_ptr<Env> clone() const override { return std::make_unique<SchedMaintEnv>(*this); }

  const Config& config() const { return *cfg_; }
  const std::vector<State>& states() const { return state_; }

 protected:
  Observation do_reset() override {
    state_.clear();
    for (const auto& k : cfg_->compressors) state_.push_back(State{k.tslm0, k.tlcm0, k.cdm0});
    return observe(0);
  }

  StepOutcome advance(std::span<const double> action) override {
    const Config& c = *cfg_;
    const auto t = static_cast<std::size_t>(time());
    const std::size_t n = c.compressors.size();
    const Bounds unit{0.0, 1.0};

    CostBreakdown total;
    double supplied = 0.0;
    double production_cost = 0.0;
    std::vector<double> sanitized(action_dim(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const Compressor& k = c.compressors[i];
      const Decision raw{affine_decode(action[i], unit) >= 0.5 ? 1 : 0, affine_decode(action[n + i], unit)};
      const CostBreakdown cb = assess_compressor(k, state_[i], raw, c.penalties, c.em_absolute);
      total.mi += cb.mi;
      total.mf += cb.mf;
      total.em += cb.em;
      total.ramp += cb.ramp;
      supplied += raw.production * k.capacity;

      const Decision a = sanitize_decision(k, state_[i], raw);
      production_cost += k.spen * a.production * k.capacity * c.electricity[t];
      state_[i] = transition(k, state_[i], a);
      sanitized[i] = a.maintain;
      sanitized[n + i] = a.production;
    }
    const double purchase = affine_decode(action[2 * n], unit);
    sanitized[2 * n] = purchase;
    if (c.demand_includes_purchase) supplied += purchase * c.q_ext;
    total.demand = c.penalties.d * std::abs(c.demand[t] - supplied);

    StepOutcome out;
    out.reward = -(production_cost + purchase * c.q_ext * c.alpha_ext);
    out.info = {
        {"cost_mi", total.mi},
        {"cost_mf", total.mf},
        {"cost_em", total.em},
        {"cost_ramp", total.ramp},
        {"cost_demand", total.demand},
    };
    out.sanitized_action = std::move(sanitized);
    out.observation = observe(t + 1);
    return out;
  }

 private:
  Observation observe(std::size_t t) const {
    const Config& c = *cfg_;
    const auto s = static_cast<std::size_t>(c.forecast);
    Observation obs;
    obs.reserve(observation_dim());
    ForecastWindow{c.demand, 0, s}.append_to(obs, t);
    ForecastWindow{c.electricity, 0, s}.append_to(obs, t);
    for (const auto& st : state_) obs.push_back(st.tslm);
    for (const auto& st : state_) obs.push_back(st.tlcm);
    for (const auto& st : state_) obs.push_back(st.cdm);
    return obs;
  }

  std::shared_ptr<const Config> cfg_;
  std::vector<State> state_;
};

}  // namespace safeor::sched_maint
