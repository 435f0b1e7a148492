#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "safeor/config.hpp"
#include "safeor/core.hpp"

namespace safeor::grid_storage {

struct Generator {
  std::string name;
  std::size_t bus = 0;
  Bounds power;
  std::vector<double> cost;  // C_{g,j}, j = 0..degree-1
};

struct Line {
  std::string name;
  std::size_t from = 0;
  std::size_t to = 0;
  double susceptance = 0.0;
  double fmax = 0.0;
  Bounds angle;  // bounds on theta_from - theta_to
};

struct Battery {
  double emin = 0.0;
  double emax = 0.0;
  double e0 = 0.0;
  Bounds charge;
  Bounds discharge;
};

struct Penalties {
  double balance = 0.0;
  double power = 0.0;
  double charge = 0.0;
  double discharge = 0.0;
  double slack = 0.0;
  double shed = 0.0;
  double soc = 0.0;
  double theta = 0.0;
  double theta_act = 0.0;
  double flow_ratio = 0.0;
};

struct Config {
  int horizon = 1;
  int window = 1;
  double eta = 1.0;
  double gamma = 1.0;
  double theta_max = 0.0;
  double s_max = 0.0;
  double k_slack = 0.0;
  double k_ls = 0.0;
  std::vector<std::string> buses;
  std::vector<Generator> generators;
  std::vector<Line> lines;
  std::vector<Battery> batteries;            // per bus; absent batteries are all-zero
  std::vector<std::vector<int>> deenergized;  // per step, per line: 1 if out
  std::vector<std::vector<double>> demand;    // per bus
  Penalties penalties;

  double max_demand() const {
    double m = 0.0;
    for (const auto& series : demand) {
      for (std::size_t t = 0; t < series.size() && t < static_cast<std::size_t>(horizon); ++t) {
        m = std::max(m, series[t]);
      }
    }
    return m;
  }

  static Config from_json(const json& doc) { return parse(Field(doc, "")); }

  static Config parse(const Field& root) {
    Config c;
    c.horizon = static_cast<int>(root["horizon"].integer(1, 1'000'000));
    c.window = static_cast<int>(root["window"].integer(1, 1'000'000));
    c.eta = root["eta"].number(0.0, 1.0);
    c.gamma = root["gamma"].number(0.0, 1.0);
    if (c.eta <= 0.0) root["eta"].fail("must be positive");
    if (c.gamma <= 0.0) root["gamma"].fail("must be positive");
    c.theta_max = root["theta_max"].nonneg();
    c.s_max = root["s_max"].nonneg();
    c.k_slack = root["K_slack"].nonneg();
    c.k_ls = root["K_ls"].nonneg();

    for (const Field& f : root["buses"].items()) c.buses.push_back(f.str());
    if (c.buses.empty()) root["buses"].fail("at least one bus is required");
    const std::size_t nb = c.buses.size();

    for (const Field& f : root["generators"].items()) {
      Generator g;
      g.name = f["name"].str();
      g.bus = index_of(c.buses, f["bus"].str(), f["bus"]);
      g.power = Bounds{f["pmin"].number(), f["pmax"].number()};
      if (g.power.lo > g.power.hi) f["pmax"].fail("pmax below pmin");
      g.cost = f["cost"].numbers();
      c.generators.push_back(std::move(g));
    }

    std::vector<std::string> line_names;
    if (root.has("lines")) {
      for (const Field& f : root["lines"].items()) {
        Line l;
        l.name = f["name"].str();
        l.from = index_of(c.buses, f["from"].str(), f["from"]);
        l.to = index_of(c.buses, f["to"].str(), f["to"]);
        if (l.from == l.to) f["to"].fail("line endpoints must differ");
        l.susceptance = f["B"].number();
        l.fmax = f["fmax"].number();
        if (l.fmax <= 0.0) f["fmax"].fail("must be positive");
        l.angle = f["angle"].bounds();
        if (l.angle.lo >= l.angle.hi) f["angle"].fail("empty angle-difference range");
        line_names.push_back(l.name);
        c.lines.push_back(std::move(l));
      }
    }

    c.batteries.assign(nb, Battery{});
    if (root.has("batteries")) {
      std::set<std::size_t> seen;
      for (const Field& f : root["batteries"].items()) {
        const std::size_t n = index_of(c.buses, f["bus"].str(), f["bus"]);
        if (!seen.insert(n).second) f["bus"].fail("one battery per bus");
        Battery b;
        b.emin = f["emin"].nonneg();
        b.emax = f["emax"].nonneg();
        if (b.emin > b.emax) f["emax"].fail("emax below emin");
        b.e0 = f["e0"].number(b.emin, b.emax);
        b.charge = f["charge"].bounds();
        b.discharge = f["discharge"].bounds();
        c.batteries[n] = b;
      }
    }

    c.deenergized.assign(static_cast<std::size_t>(c.horizon), std::vector<int>(c.lines.size(), 0));
    if (root.has("deenergized")) {
      const Field de = root["deenergized"];
      for (const auto& key : de.keys()) {
        std::size_t step = 0;
        try {
          std::size_t used = 0;
          step = std::stoul(key, &used);
          if (used != key.size()) throw std::invalid_argument(key);
        } catch (const std::exception&) {
          de[key].fail("keys must be step indices");
        }
        if (step >= c.deenergized.size()) de[key].fail("step beyond the horizon");
        for (const Field& l : de[key].items()) c.deenergized[step][index_of(line_names, l.str(), l)] = 1;
      }
    }

    c.demand.assign(nb, {});
    const Field d = root["demand"];
    for (const auto& key : d.keys()) c.demand[index_of(c.buses, key, d[key])] = d[key].numbers();
    for (std::size_t n = 0; n < nb; ++n) {
      if (c.demand[n].size() < static_cast<std::size_t>(c.horizon)) {
        d.fail("demand for bus '" + c.buses[n] + "' is shorter than the horizon");
      }
    }

    if (root.has("penalties")) {
      const Field p = root["penalties"];
      const auto get = [&](const char* key) { return p.has(key) ? p[key].nonneg() : 0.0; };
      c.penalties = Penalties{get("balance"), get("power"), get("charge"), get("discharge"), get("slack"),
                              get("shed"),    get("soc"),   get("theta"),  get("theta_act"), get("flow_ratio")};
    }
    return c;
  }
};

/// Physical action after clipping, with the accrued action-bound penalty.
struct Decoded {
  std::vector<double> p, charge, discharge, shed, theta;  // theta has N entries, theta[0] = 0
  double penalty = 0.0;
};

/// GridStorageEnv.
///
/// Action: generator outputs (G), battery charge (N), discharge (N), load
/// shedding (N), angles of buses 2..N. Observation: SOC (N), normalized angle
/// differences (L), flows (L), slack (N), per bus a demand window of length k
/// from the step about to be taken, then normalized time.
class GridStorageEnv final : public Env {
 public:
  explicit GridStorageEnv(Config config)
      : cfg_(std::make_shared<const Config>(std::move(config))), d_max_(cfg_->max_demand()) {
    do_reset();
  }

  std::string_view name() const override { return "GridStorageEnv"; }
  std::size_t action_dim() const override {
    const std::size_t n = cfg_->buses.size();
    return cfg_->generators.size() + 3 * n + (n - 1);
  }
  std::size_t observation_dim() const override {
    const std::size_t n = cfg_->buses.size();
    const std::size_t l = cfg_->lines.size();
    return 2 * n + 2 * l + n * static_cast<std::size_t>(cfg_->window) + 1;
  }
  int horizon() const override { return cfg_->horizon; }
  std::unique_ptr<Env> clone() const override { return std::make_unique<GridStorageEnv>(*this); }

  const Config& config() const { return *cfg_; }
  double max_demand() const { return d_max_; }
  const std::vector<double>& energy() const { return energy_; }
  /// Flows, angles and residuals computed by the most recent step.
  const std::vector<double>& last_flows() const { return flows_; }
  const std::vector<double>& last_theta() const { return theta_; }
  const std::vector<double>& last_residual() const { return residual_; }

  /// Clip a physical (pre-clip) action block-wise to its bounds.
  Decoded clip_physical(std::span<const double> pre) const {
    if (pre.size() != action_dim()) throw DimensionMismatch(action_dim(), pre.size());
    const Config& c = *cfg_;
    const Penalties& ph = c.penalties;
    const std::size_t nb = c.buses.size();
    Decoded d;
    std::size_t k = 0;
    const auto take = [&](Bounds b, double phi) {
      const ClipResult r = clip_with_penalty(pre[k++], b, phi);
      d.penalty += r.penalty;
      return r.value;
    };
    for (const auto& g : c.generators) d.p.push_back(take(g.power, ph.power));
    for (std::size_t n = 0; n < nb; ++n) d.charge.push_back(take(c.batteries[n].charge, ph.charge));
    for (std::size_t n = 0; n < nb; ++n) d.discharge.push_back(take(c.batteries[n].discharge, ph.discharge));
    for (std::size_t n = 0; n < nb; ++n) d.shed.push_back(take(Bounds{0.0, d_max_}, ph.shed));
    d.theta.push_back(0.0);
    for (std::size_t n = 1; n < nb; ++n) d.theta.push_back(take(Bounds{-c.theta_max, c.theta_max}, ph.theta_act));
    return d;
  }

  std::vector<double> action_lower() const { return block_bounds(true); }
  std::vector<double> action_upper() const { return block_bounds(false); }

 protected:
  Observation do_reset() override {
    const Config& c = *cfg_;
    energy_.clear();
    for (const auto& b : c.batteries) energy_.push_back(b.e0);
    theta_.assign(c.buses.size(), 0.0);
    flows_.assign(c.lines.size(), 0.0);
    residual_.assign(c.buses.size(), 0.0);
    slack_.assign(c.buses.size(), 0.0);
    slack_obs_.assign(c.buses.size(), 0.0);
    soc_obs_ = soc_values();
    theta_obs_ = angle_values();
    flow_obs_ = flows_;
    return observe(0);
  }

  StepOutcome advance(std::span<const double> action) override {
    const Config& c = *cfg_;
    const Penalties& ph = c.penalties;
    const auto t = static_cast<std::size_t>(time());
    const std::size_t nb = c.buses.size();

    const auto lo = action_lower();
    const auto hi = action_upper();
    std::vector<double> pre(action.size());
    for (std::size_t i = 0; i < action.size(); ++i) pre[i] = affine_decode(action[i], Bounds{lo[i], hi[i]});
    const Decoded d = clip_physical(pre);
    theta_ = d.theta;

    for (std::size_t n = 0; n < nb; ++n) {
      energy_[n] = c.gamma * energy_[n] + c.eta * d.charge[n] - d.discharge[n] / c.eta;
    }

    std::vector<double> net_out(nb, 0.0);
    for (std::size_t l = 0; l < c.lines.size(); ++l) {
      const Line& ln = c.lines[l];
      flows_[l] = c.deenergized[t][l] != 0 ? 0.0 : ln.susceptance * (theta_[ln.from] - theta_[ln.to]);
      net_out[ln.from] += flows_[l];
      net_out[ln.to] -= flows_[l];
    }

    std::vector<double> gen(nb, 0.0);
    double gen_cost = 0.0;
    for (std::size_t g = 0; g < c.generators.size(); ++g) {
      gen[c.generators[g].bus] += d.p[g];
      double term = 1.0;
      for (const double coef : c.generators[g].cost) {
        gen_cost += coef * term;
        term *= d.p[g];
      }
    }

    double slack_total = 0.0;
    double shed_total = 0.0;
    double balance = 0.0;
    for (std::size_t n = 0; n < nb; ++n) {
      const double dem = c.demand[n][t];
      slack_[n] = std::max(0.0, dem - d.shed[n] - gen[n] + d.charge[n] - d.discharge[n] + net_out[n]);
      const double injection = gen[n] + slack_[n] - dem + d.shed[n] - d.charge[n] + d.discharge[n];
      residual_[n] = injection - net_out[n];
      balance += std::abs(residual_[n]);
      slack_total += slack_[n];
      shed_total += d.shed[n];
    }

    double soc_cost = 0.0, theta_cost = 0.0, flow_cost = 0.0, slack_cost = 0.0;
    soc_obs_.assign(nb, 0.0);
    for (std::size_t n = 0; n < nb; ++n) {
      const Battery& b = c.batteries[n];
      if (b.emax <= 0.0) {
        energy_[n] = 0.0;
        continue;
      }
      const ClipResult r = clip_with_penalty(energy_[n] / b.emax, Bounds{b.emin / b.emax, 1.0}, ph.soc);
      soc_cost += r.penalty;
      soc_obs_[n] = r.value;
      energy_[n] = std::clamp(energy_[n], b.emin, b.emax);
    }
    theta_obs_ = angle_values();
    for (double& x : theta_obs_) {
      const ClipResult r = clip_with_penalty(x, Bounds{-1.0, 1.0}, ph.theta);
      theta_cost += r.penalty;
      x = r.value;
    }
    flow_obs_.assign(c.lines.size(), 0.0);
    for (std::size_t l = 0; l < c.lines.size(); ++l) {
      const double fmax = c.lines[l].fmax;
      const ClipResult r = clip_with_penalty(flows_[l] / fmax, Bounds{-1.0, 1.0}, ph.flow_ratio);
      flow_cost += r.penalty;
      flow_obs_[l] = std::clamp(flows_[l], -fmax, fmax);
    }
    slack_obs_.assign(nb, 0.0);
    for (std::size_t n = 0; n < nb; ++n) {
      const ClipResult r = clip_with_penalty(slack_[n], Bounds{0.0, c.s_max}, ph.slack);
      slack_cost += r.penalty;
      slack_obs_[n] = r.value;
    }

    StepOutcome out;
    out.reward = -gen_cost - c.k_slack * slack_total - c.k_ls * shed_total;
    out.info = {
        {"cost_action", d.penalty},
        {"cost_soc", soc_cost},
        {"cost_theta", theta_cost},
        {"cost_flow_ratio", flow_cost},
        {"cost_slack", slack_cost},
        {"cost_balance", ph.balance * balance},
        {"slack", slack_total},
        {"shed", shed_total},
    };
    out.sanitized_action.reserve(action_dim());
    for (const auto* part : {&d.p, &d.charge, &d.discharge, &d.shed}) {
      out.sanitized_action.insert(out.sanitized_action.end(), part->begin(), part->end());
    }
    out.sanitized_action.insert(out.sanitized_action.end(), d.theta.begin() + 1, d.theta.end());
    out.observation = observe(t + 1);
    return out;
  }

 private:
  std::vector<double> block_bounds(bool lower) const {
    const Config& c = *cfg_;
    std::vector<double> v;
    const auto pick = [&](Bounds b) { v.push_back(lower ? b.lo : b.hi); };
    for (const auto& g : c.generators) pick(g.power);
    for (const auto& b : c.batteries) pick(b.charge);
    for (const auto& b : c.batteries) pick(b.discharge);
    for (std::size_t n = 0; n < c.buses.size(); ++n) pick(Bounds{0.0, d_max_});
    for (std::size_t n = 1; n < c.buses.size(); ++n) pick(Bounds{-c.theta_max, c.theta_max});
    return v;
  }

  std::vector<double> soc_values() const {
    std::vector<double> v;
    for (std::size_t n = 0; n < energy_.size(); ++n) {
      const double emax = cfg_->batteries[n].emax;
      v.push_back(emax > 0.0 ? energy_[n] / emax : 0.0);
    }
    return v;
  }

  std::vector<double> angle_values() const {
    std::vector<double> v;
    for (const auto& l : cfg_->lines) {
      const double diff = theta_[l.from] - theta_[l.to];
      v.push_back((2.0 * diff - (l.angle.lo + l.angle.hi)) / (l.angle.hi - l.angle.lo));
    }
    return v;
  }

  Observation observe(std::size_t t) const {
    const Config& c = *cfg_;
    Observation obs;
    obs.reserve(observation_dim());
    obs.insert(obs.end(), soc_obs_.begin(), soc_obs_.end());
    obs.insert(obs.end(), theta_obs_.begin(), theta_obs_.end());
    obs.insert(obs.end(), flow_obs_.begin(), flow_obs_.end());
    obs.insert(obs.end(), slack_obs_.begin(), slack_obs_.end());
    for (const auto& series : c.demand) {
      ForecastWindow{series, 0, static_cast<std::size_t>(c.window)}.append_to(obs, t);
    }
    obs.push_back(c.horizon > 1 ? static_cast<double>(t) / (c.horizon - 1) : 0.0);
    return obs;
  }

  std::shared_ptr<const Config> cfg_;
  double d_max_ = 0.0;
  std::vector<double> energy_;
  std::vector<double> theta_, flows_, residual_, slack_;
  std::vector<double> soc_obs_, theta_obs_, flow_obs_, slack_obs_;
};

}  // namespace safeor::grid_storage
