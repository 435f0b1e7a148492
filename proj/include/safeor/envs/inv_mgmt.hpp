#pragma once

#include <algorithm>
#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "safeor/config.hpp"
#include "safeor/core.hpp"

namespace safeor::inv_mgmt {

enum class NodeKind { Market, Retailer, Distributor, Producer, Supplier };

struct Node {
  std::string name;
  NodeKind kind = NodeKind::Distributor;
  double init = 0.0;
  double hold_cost = 0.0;
  double oper_cost = 0.0;  // producers
  double yield = 1.0;      // producers
  double max = 0.0;        // observation upper bound
};

struct Route {
  std::size_t from = 0;
  std::size_t to = 0;
  double capacity = 0.0;
  double cost = 0.0;
  int lead_time = 1;
  double hold_cost = 0.0;
};

struct DemandLink {
  std::size_t retailer = 0;
  std::size_t market = 0;
  double mu = 0.0;
  double sigma = 0.0;
  double price = 0.0;
  double penalty = 0.0;
  std::vector<double> series;
};

struct Penalties {
  double action = 0.0;
  double on_hand = 0.0;
  double pipeline = 0.0;
  double sales = 0.0;
  double backlog = 0.0;
};

enum class DemandMode { Deterministic, Gaussian };

struct Config {
  int horizon = 1;
  double eps = 1e-6;
  int window = 1;
  DemandMode mode = DemandMode::Deterministic;
  std::uint64_t seed = 0;
  std::vector<Node> nodes;
  std::vector<Route> routes;
  std::vector<DemandLink> links;
  Penalties penalties;
  double sales_max = 1e9;
  double backlog_max = 1e9;

  static Config from_json(const json& doc) { return parse(Field(doc, "")); }

  static Config parse(const Field& root) {
    Config c;
    c.horizon = static_cast<int>(root["horizon"].integer(1, 1'000'000));
    if (root.has("eps")) c.eps = root["eps"].nonneg();
    c.window = static_cast<int>(root["window"].integer(1, 1'000'000));
    const std::string mode = root.str_or("demand_mode", "deterministic");
    if (mode == "deterministic") {
      c.mode = DemandMode::Deterministic;
    } else if (mode == "gaussian") {
      c.mode = DemandMode::Gaussian;
      c.seed = static_cast<std::uint64_t>(root["seed"].integer(0, INT64_MAX));
    } else {
      root["demand_mode"].fail("expected deterministic or gaussian");
    }

    double on_hand_max = 1e9;
    if (root.has("obs_max")) {
      const Field om = root["obs_max"];
      if (om.has("on_hand")) on_hand_max = om["on_hand"].nonneg();
      if (om.has("sales")) c.sales_max = om["sales"].nonneg();
      if (om.has("backlog")) c.backlog_max = om["backlog"].nonneg();
    }

    std::vector<std::string> names;
    for (const Field& f : root["nodes"].items()) {
      Node n;
      n.name = f["name"].str();
      const std::string kind = f["kind"].str();
      if (kind == "market") {
        n.kind = NodeKind::Market;
      } else if (kind == "retailer") {
        n.kind = NodeKind::Retailer;
      } else if (kind == "distributor") {
        n.kind = NodeKind::Distributor;
      } else if (kind == "producer") {
        n.kind = NodeKind::Producer;
      } else if (kind == "supplier") {
        n.kind = NodeKind::Supplier;
      } else {
        f["kind"].fail("expected market, retailer, distributor, producer or supplier");
      }
      n.max = f.has("max") ? f["max"].nonneg() : on_hand_max;
      n.init = f.has("init") ? f["init"].number(0.0, n.max) : 0.0;
      n.hold_cost = f.number_or("hold_cost", 0.0);
      if (n.kind == NodeKind::Producer) {
        n.oper_cost = f.number_or("oper_cost", 0.0);
        n.yield = f.number_or("yield", 1.0);
        if (n.yield <= 0.0) f["yield"].fail("yield must be positive");
      }
      names.push_back(n.name);
      c.nodes.push_back(n);
    }

    for (const Field& f : root["routes"].items()) {
      Route r;
      r.from = index_of(names, f["from"].str(), f["from"]);
      r.to = index_of(names, f["to"].str(), f["to"]);
      r.capacity = f["capacity"].nonneg();
      r.cost = f.number_or("cost", 0.0);
      r.lead_time = static_cast<int>(f["lead_time"].integer(1, 10'000));
      r.hold_cost = f.number_or("hold_cost", 0.0);
      c.routes.push_back(r);
    }
    if (c.routes.empty()) root["routes"].fail("at least one route is required");

    for (const Field& f : root["demand_links"].items()) {
      DemandLink d;
      d.retailer = index_of(names, f["retailer"].str(), f["retailer"]);
      d.market = index_of(names, f["market"].str(), f["market"]);
      if (c.nodes[d.retailer].kind != NodeKind::Retailer) f["retailer"].fail("not a retailer node");
      if (c.nodes[d.market].kind != NodeKind::Market) f["market"].fail("not a market node");
      d.mu = f["mu"].nonneg();
      d.sigma = f.has("sigma") ? f["sigma"].nonneg() : 0.0;
      d.price = f.number_or("price", 0.0);
      d.penalty = f.number_or("penalty", 0.0);
      if (f.has("series")) {
        d.series = f["series"].numbers();
        if (d.series.size() < static_cast<std::size_t>(c.horizon)) {
          f["series"].fail("shorter than the horizon");
        }
        for (const double v : d.series) {
          if (v < 0.0) f["series"].fail("demand must be nonnegative");
        }
      }
      c.links.push_back(std::move(d));
    }

    if (root.has("penalties")) {
      const Field p = root["penalties"];
      c.penalties.action = p.has("action") ? p["action"].nonneg() : 0.0;
      c.penalties.on_hand = p.has("on_hand") ? p["on_hand"].nonneg() : 0.0;
      c.penalties.pipeline = p.has("pipeline") ? p["pipeline"].nonneg() : 0.0;
      c.penalties.sales = p.has("sales") ? p["sales"].nonneg() : 0.0;
      c.penalties.backlog = p.has("backlog") ? p["backlog"].nonneg() : 0.0;
    }
    return c;
  }
};

struct Order {
  double q = 0.0;
  double penalty = 0.0;
};

/// Small-order cutoff followed by clipping to [0, cap] with a linear penalty.
inline Order decode_order(double q_pre, double cap, double eps, double phi_action) {
  const double q_cut = q_pre <= eps ? 0.0 : q_pre;
  const ClipResult r = clip_with_penalty(q_cut, Bounds{0.0, cap}, phi_action);
  return {r.value, r.penalty};
}

/// InvMgmtEnv.
///
/// Action: one order per route. Observation: on-hand per node, pipeline slots
/// per route (slot 1 first), sales and backlog per demand link, per link a
/// demand window of length k starting at the current period, then t.
class InvMgmtEnv final : public Env {
 public:
  explicit InvMgmtEnv(Config config) : cfg_(std::make_shared<const Config>(std::move(config))) {
    for (const auto& r : cfg_->routes) slots_ += static_cast<std::size_t>(r.lead_time);
    do_reset();
  }

  std::string_view name() const override { return "InvMgmtEnv"; }
  std::size_t action_dim() const override { return cfg_->routes.size(); }
  std::size_t observation_dim() const override {
    const Config& c = *cfg_;
    return c.nodes.size() + slots_ + 2 * c.links.size() + c.links.size() * static_cast<std::size_t>(c.window) + 1;
  }
  int horizon() const override { return cfg_->horizon; }
  std::unique_ptr<Env> clone() const override { return std::make_unique<InvMgmtEnv>(*this); }

  const Config& config() const { return *cfg_; }
  const std::vector<double>& on_hand() const { return inv_; }
  /// pipeline()[route][slot], slot 0 arrives next.
  const std::vector<std::vector<double>>& pipeline() const { return pipe_; }
  const std::vector<double>& sales() const { return sales_; }
  const std::vector<double>& backlog() const { return backlog_; }
  /// Realized demand of every link for the current episode, per period.
  const std::vector<std::vector<double>>& realized_demand() const { return demand_; }

 protected:
  Observation do_reset() override {
    const Config& c = *cfg_;
    inv_.clear();
    for (const auto& n : c.nodes) inv_.push_back(n.init);
    pipe_.clear();
    for (const auto& r : c.routes) pipe_.emplace_back(static_cast<std::size_t>(r.lead_time), 0.0);
    sales_.assign(c.links.size(), 0.0);
    backlog_.assign(c.links.size(), 0.0);

    const auto horizon = static_cast<std::size_t>(c.horizon);
    demand_.assign(c.links.size(), std::vector<double>(horizon, 0.0));
    forecast_.assign(c.links.size(), std::vector<double>(horizon, 0.0));
    std::mt19937_64 rng(c.seed);
    for (std::size_t k = 0; k < c.links.size(); ++k) {
      const DemandLink& d = c.links[k];
      std::normal_distribution<double> dist(d.mu, d.sigma);
      for (std::size_t t = 0; t < horizon; ++t) {
        if (c.mode == DemandMode::Gaussian) {
          demand_[k][t] = d.sigma > 0.0 ? std::max(0.0, dist(rng)) : d.mu;
          forecast_[k][t] = d.mu;
        } else {
          demand_[k][t] = d.series.empty() ? d.mu : d.series[t];
          forecast_[k][t] = demand_[k][t];
        }
      }
    }
    return observe(0);
  }

  StepOutcome advance(std::span<const double> action) override {
    const Config& c = *cfg_;
    const auto t = static_cast<std::size_t>(time());
    const Penalties& ph = c.penalties;

    std::vector<double> q(c.routes.size());
    double action_cost = 0.0;
    for (std::size_t l = 0; l < c.routes.size(); ++l) {
      const double cap = c.routes[l].capacity;
      const Order o = decode_order((action[l] + 1.0) / 2.0 * cap, cap, c.eps, ph.action);
      q[l] = o.q;
      action_cost += o.penalty;
    }

    for (std::size_t l = 0; l < c.routes.size(); ++l) {
      auto& slots = pipe_[l];
      const double arrival = slots.front();
      std::rotate(slots.begin(), slots.begin() + 1, slots.end());
      slots.back() = q[l];
      inv_[c.routes[l].to] += arrival;
    }

    double revenue = 0.0;
    double backlog_pen = 0.0;
    for (std::size_t k = 0; k < c.links.size(); ++k) {
      const DemandLink& d = c.links[k];
      const double want = demand_[k][t] + backlog_[k];
      const double sold = std::min(want, inv_[d.retailer]);
      inv_[d.retailer] -= sold;
      sales_[k] = sold;
      backlog_[k] = want - sold;
      revenue += sold * d.price;
      backlog_pen += backlog_[k] * d.penalty;
    }

    double proc = 0.0, hold = 0.0, oper = 0.0;
    for (std::size_t l = 0; l < c.routes.size(); ++l) {
      const Route& r = c.routes[l];
      proc += q[l] * r.cost;
      double in_transit = 0.0;
      for (const double x : pipe_[l]) in_transit += x;
      hold += in_transit * r.hold_cost;
      const Node& origin = c.nodes[r.from];
      if (origin.kind == NodeKind::Producer) oper += origin.oper_cost / origin.yield * q[l];
    }
    for (std::size_t n = 0; n < c.nodes.size(); ++n) hold += inv_[n] * c.nodes[n].hold_cost;

    double on_hand_cost = 0.0, pipeline_cost = 0.0, sales_cost = 0.0, backlog_cost = 0.0;
    const auto clip = [](double& x, Bounds b, double phi, double& acc) {
      const ClipResult r = clip_with_penalty(x, b, phi);
      x = r.value;
      acc += r.penalty;
    };
    for (std::size_t n = 0; n < c.nodes.size(); ++n) clip(inv_[n], Bounds{0.0, c.nodes[n].max}, ph.on_hand, on_hand_cost);
    for (std::size_t l = 0; l < c.routes.size(); ++l) {
      for (double& x : pipe_[l]) clip(x, Bounds{0.0, c.routes[l].capacity}, ph.pipeline, pipeline_cost);
    }
    for (double& s : sales_) clip(s, Bounds{0.0, c.sales_max}, ph.sales, sales_cost);
    for (double& b : backlog_) clip(b, Bounds{0.0, c.backlog_max}, ph.backlog, backlog_cost);

    StepOutcome out;
    out.reward = revenue - proc - hold - oper - backlog_pen;
    out.info = {
        {"cost_action", action_cost},
        {"cost_on_hand", on_hand_cost},
        {"cost_pipeline", pipeline_cost},
        {"cost_sales", sales_cost},
        {"cost_backlog", backlog_cost},
    };
    out.sanitized_action = std::move(q);
    out.observation = observe(t + 1);
    return out;
  }

 private:
  Observation observe(std::size_t t) const {
    const Config& c = *cfg_;
    Observation obs;
    obs.reserve(observation_dim());
    obs.insert(obs.end(), inv_.begin(), inv_.end());
    for (const auto& slots : pipe_) obs.insert(obs.end(), slots.begin(), slots.end());
    obs.insert(obs.end(), sales_.begin(), sales_.end());
    obs.insert(obs.end(), backlog_.begin(), backlog_.end());
    for (const auto& series : forecast_) {
      ForecastWindow{series, 0, static_cast<std::size_t>(c.window)}.append_to(obs, t);
    }
    obs.push_back(static_cast<double>(t));
    return obs;
  }

  std::shared_ptr<const Config> cfg_;
  std::size_t slots_ = 0;
  std::vector<double> inv_;
  std::vector<std::vector<double>> pipe_;
  std::vector<double> sales_, backlog_;
  std::vector<std::vector<double>> demand_, forecast_;
};

}  // namespace safeor::inv_mgmt
