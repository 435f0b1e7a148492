#pragma once

#include <algorithm>
#include <memory>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "safeor/config.hpp"
#include "safeor/core.hpp"

namespace safeor::blending {

enum class Strategy { Prop, Disable, None };

inline Strategy parse_strategy(const std::string& s, const Field& where) {
  if (s == "prop") return Strategy::Prop;
  if (s == "disable") return Strategy::Disable;
  if (s == "none") return Strategy::None;
  where.fail("expected prop, disable or none");
}

inline const char* strategy_name(Strategy s) {
  switch (s) {
    case Strategy::Prop: return "prop";
    case Strategy::Disable: return "disable";
    case Strategy::None: return "none";
  }
  return "";
}

struct Source {
  std::string name;
  std::vector<double> sigma;  // per property
  Bounds bounds;
  double init = 0.0;
  std::vector<double> availability;
  double price = 0.0;
};

struct Blender {
  std::string name;
  Bounds bounds;
  double init = 0.0;
  std::vector<double> properties;
};

struct Demand {
  std::string name;
  std::vector<Bounds> spec;  // per property
  Bounds bounds;
  double init = 0.0;
  std::vector<double> caps;
  double price = 0.0;
};

struct Arc {
  std::size_t from = 0;
  std::size_t to = 0;
};

struct Config {
  Strategy strategy = Strategy::Prop;
  int horizon = 1;
  double fmax = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  double eps = 1e-6;
  int window = 1;
  double l0_bound = 0.0;
  double l_bound = 0.0;
  double l0_inout = 0.0;
  double l0_spec = 0.0;
  std::vector<std::string> properties;
  std::vector<Source> sources;
  std::vector<Blender> blenders;
  std::vector<Demand> demands;
  std::vector<Arc> sj, jj, jp;

  static Config from_json(const json& doc) { return parse(Field(doc, "")); }

  static Config parse(const Field& root) {
    Config c;
    if (root.has("strategy")) c.strategy = parse_strategy(root["strategy"].str(), root["strategy"]);
    c.horizon = static_cast<int>(root["horizon"].integer(1, 1'000'000));
    c.fmax = root["fmax"].nonneg();
    c.alpha = root["alpha"].nonneg();
    c.beta = root["beta"].nonneg();
    if (root.has("eps")) c.eps = root["eps"].nonneg();
    c.window = static_cast<int>(root["window"].integer(1, 1'000'000));
    const Field lam = root["lambdas"];
    c.l0_bound = lam["l0_bound"].nonneg();
    c.l_bound = lam["l_bound"].nonneg();
    c.l0_inout = lam["l0_inout"].nonneg();
    c.l0_spec = lam["l0_spec"].nonneg();

    for (const Field& f : root["properties"].items()) c.properties.push_back(f.str());
    const std::size_t nq = c.properties.size();
    const auto check_len = [&](const Field& f, std::size_t len, const char* what) {
      if (f.size() < len) f.fail(std::string(what) + " is shorter than the horizon");
    };

    std::vector<std::string> s_names, j_names, p_names;
    for (const Field& f : root["sources"].items()) {
      Source s;
      s.name = f["name"].str();
      s.sigma = f["sigma"].numbers();
      if (s.sigma.size() != nq) f["sigma"].fail("expected one value per property");
      s.bounds = f["bounds"].bounds();
      s.init = f["init"].number(s.bounds.lo, s.bounds.hi);
      check_len(f["availability"], static_cast<std::size_t>(c.horizon), "availability");
      s.availability = f["availability"].numbers();
      for (const double v : s.availability) {
        if (v < 0.0) f["availability"].fail("must be nonnegative");
      }
      s.price = f["price"].nonneg();
      s_names.push_back(s.name);
      c.sources.push_back(std::move(s));
    }
    for (const Field& f : root["blenders"].items()) {
      Blender b;
      b.name = f["name"].str();
      b.bounds = f["bounds"].bounds();
      b.init = f["init"].number(b.bounds.lo, b.bounds.hi);
      b.properties = f.has("properties") ? f["properties"].numbers() : std::vector<double>(nq, 0.0);
      if (b.properties.size() != nq) f["properties"].fail("expected one value per property");
      if (b.init <= c.eps) std::fill(b.properties.begin(), b.properties.end(), 0.0);
      j_names.push_back(b.name);
      c.blenders.push_back(std::move(b));
    }
    for (const Field& f : root["demands"].items()) {
      Demand d;
      d.name = f["name"].str();
      const Field spec = f["spec"];
      if (spec.size() != nq) spec.fail("expected one [lo, hi] per property");
      for (std::size_t q = 0; q < nq; ++q) d.spec.push_back(spec[q].bounds());
      d.bounds = f["bounds"].bounds();
      d.init = f["init"].number(d.bounds.lo, d.bounds.hi);
      check_len(f["caps"], static_cast<std::size_t>(c.horizon), "caps");
      d.caps = f["caps"].numbers();
      for (const double v : d.caps) {
        if (v < 0.0) f["caps"].fail("must be nonnegative");
      }
      d.price = f["price"].nonneg();
      p_names.push_back(d.name);
      c.demands.push_back(std::move(d));
    }

    const Field arcs = root["arcs"];
    const auto read_arcs = [&](const char* key, const std::vector<std::string>& from,
                               const std::vector<std::string>& to) {
      std::vector<Arc> out;
      if (!arcs.has(key)) return out;
      std::set<std::pair<std::size_t, std::size_t>> seen;
      for (const Field& f : arcs[key].items()) {
        if (f.size() != 2) f.fail("expected [from, to]");
        const Arc a{index_of(from, f[0].str(), f[0]), index_of(to, f[1].str(), f[1])};
        if (!seen.insert({a.from, a.to}).second) f.fail("duplicate arc");
        out.push_back(a);
      }
      return out;
    };
    c.sj = read_arcs("sj", s_names, j_names);
    c.jj = read_arcs("jj", j_names, j_names);
    c.jp = read_arcs("jp", j_names, p_names);
    std::set<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t k = 0; k < c.jj.size(); ++k) {
      const Arc a = c.jj[k];
      if (a.from == a.to) arcs["jj"][k].fail("a blender cannot feed itself");
      if (!pairs.insert(std::minmax(a.from, a.to)).second) {
        arcs["jj"][k].fail("only one direction is allowed per blender pair");
      }
    }
    return c;
  }
};

/// Decoded actions in physical units, in action order.
struct Flows {
  std::vector<double> tau;    // purchases per source
  std::vector<double> delta;  // sales per demand
  std::vector<double> sj, jj, jp;

  std::vector<double> flatten() const {
    std::vector<double> v;
    for (const auto* part : {&tau, &delta, &sj, &jj, &jp}) v.insert(v.end(), part->begin(), part->end());
    return v;
  }
};

/// Pre-sanitization quantities used for costing.
struct Ledger {
  std::vector<double> source_new;
  std::vector<double> blender_new;
  std::vector<double> demand_new;
  std::vector<bool> inout;
};

struct Sanitized {
  Flows flows;
  Ledger ledger;
};

/// BlendingEnv with the prop, disable and none strategies.
///
/// Action: purchases (S), sales (P), then source->blender, blender->blender
/// and blender->demand flows. Observation: inventories of sources, blenders
/// and demands, blender properties (blender-major), availability windows (S x
/// k), demand-cap windows (P x k), then t.
class BlendingEnv final : public Env {
 public:
  explicit BlendingEnv(Config config) : cfg_(std::make_shared<const Config>(std::move(config))) { do_reset(); }

  std::string_view name() const override {
    switch (cfg_->strategy) {
      case Strategy::Prop: return "BlendingEnv-prop";
      case Strategy::Disable: return "BlendingEnv-disable";
      case Strategy::None: return "BlendingEnv-none";
    }
    return "BlendingEnv";
  }
  std::size_t action_dim() const override {
    const Config& c = *cfg_;
    return c.sources.size() + c.demands.size() + c.sj.size() + c.jj.size() + c.jp.size();
  }
  std::size_t observation_dim() const override {
    const Config& c = *cfg_;
    const std::size_t k = static_cast<std::size_t>(c.window);
    return c.sources.size() + c.blenders.size() + c.demands.size() +
           c.blenders.size() * c.properties.size() + (c.sources.size() + c.demands.size()) * k + 1;
  }
  int horizon() const override { return cfg_->horizon; }
  std::unique_ptr<Env> clone() const override { return std::make_unique<BlendingEnv>(*this); }

  const Config& config() const { return *cfg_; }
  const std::vector<double>& source_inventory() const { return is_; }
  const std::vector<double>& blender_inventory() const { return ib_; }
  const std::vector<double>& demand_inventory() const { return id_; }
  /// properties()[j][q]
  const std::vector<std::vector<double>>& properties() const { return prop_; }

  Flows decode(std::span<const double> a) const {
    const Config& c = *cfg_;
    const auto t = static_cast<std::size_t>(time());
    Flows f;
    std::size_t k = 0;
    for (const auto& s : c.sources) f.tau.push_back(affine_decode(a[k++], Bounds{0.0, s.availability[t]}));
    for (const auto& d : c.demands) f.delta.push_back(affine_decode(a[k++], Bounds{0.0, d.caps[t]}));
    const Bounds fb{0.0, c.fmax};
    for (std::size_t i = 0; i < c.sj.size(); ++i) f.sj.push_back(affine_decode(a[k++], fb));
    for (std::size_t i = 0; i < c.jj.size(); ++i) f.jj.push_back(affine_decode(a[k++], fb));
    for (std::size_t i = 0; i < c.jp.size(); ++i) f.jp.push_back(affine_decode(a[k++], fb));
    return f;
  }

  /// Source bounds, in-out rule, blender lower bound and demand lower bound
  /// checks, in that order, against the current inventories.
  Sanitized sanitize(const Flows& pre) const {
    const Config& c = *cfg_;
    const double eps = c.eps;
    const Strategy st = c.strategy;
    Sanitized out;
    Flows f = pre;
    Ledger& led = out.ledger;

    for (std::size_t s = 0; s < c.sources.size(); ++s) {
      double outflow = 0.0;
      for (std::size_t a = 0; a < c.sj.size(); ++a) {
        if (c.sj[a].from == s) outflow += pre.sj[a];
      }
      const double inew = is_[s] - outflow + pre.tau[s];
      led.source_new.push_back(inew);
      const Bounds b = c.sources[s].bounds;
      if (inew < b.lo - eps && st != Strategy::None) {
        const double ratio = st == Strategy::Prop && outflow > 0.0 ? (is_[s] + pre.tau[s] - b.lo) / outflow : 0.0;
        for (std::size_t a = 0; a < c.sj.size(); ++a) {
          if (c.sj[a].from == s) f.sj[a] = pre.sj[a] * ratio;
        }
      } else if (inew > b.hi + eps && st != Strategy::None) {
        const auto t = static_cast<std::size_t>(time());
        f.tau[s] = st == Strategy::Prop
                       ? std::min(b.hi + outflow - is_[s], c.sources[s].availability[t])
                       : 0.0;
      }
    }

    const std::size_t nj = c.blenders.size();
    std::vector<double> inflow(nj, 0.0), outflow(nj, 0.0);
    for (std::size_t a = 0; a < c.sj.size(); ++a) inflow[c.sj[a].to] += f.sj[a];
    for (std::size_t a = 0; a < c.jj.size(); ++a) {
      inflow[c.jj[a].to] += f.jj[a];
      outflow[c.jj[a].from] += f.jj[a];
    }
    for (std::size_t a = 0; a < c.jp.size(); ++a) outflow[c.jp[a].from] += f.jp[a];
    led.inout.assign(nj, false);
    for (std::size_t j = 0; j < nj; ++j) led.inout[j] = inflow[j] > eps && outflow[j] > eps;
    if (st != Strategy::None) {
      for (std::size_t a = 0; a < c.jj.size(); ++a) {
        if (led.inout[c.jj[a].from]) f.jj[a] = 0.0;
      }
      for (std::size_t a = 0; a < c.jp.size(); ++a) {
        if (led.inout[c.jp[a].from]) f.jp[a] = 0.0;
      }
    }

    std::vector<double> in_b(nj, 0.0), out_b(nj, 0.0);
    for (std::size_t a = 0; a < c.sj.size(); ++a) in_b[c.sj[a].to] += f.sj[a];
    for (std::size_t a = 0; a < c.jj.size(); ++a) {
      in_b[c.jj[a].to] += f.jj[a];
      out_b[c.jj[a].from] += f.jj[a];
    }
    for (std::size_t a = 0; a < c.jp.size(); ++a) out_b[c.jp[a].from] += f.jp[a];
    std::vector<double> scale(nj, 1.0);
    for (std::size_t j = 0; j < nj; ++j) {
      const double inew = ib_[j] + in_b[j] - out_b[j];
      led.blender_new.push_back(inew);
      const double lb = c.blenders[j].bounds.lo;
      if (inew < lb - eps && st != Strategy::None) {
        scale[j] = st == Strategy::Prop && out_b[j] > 0.0 ? (ib_[j] + in_b[j] - lb) / out_b[j] : 0.0;
      }
    }
    for (std::size_t a = 0; a < c.jj.size(); ++a) {
      if (scale[c.jj[a].from] != 1.0) f.jj[a] *= scale[c.jj[a].from];
    }
    for (std::size_t a = 0; a < c.jp.size(); ++a) {
      if (scale[c.jp[a].from] != 1.0) f.jp[a] *= scale[c.jp[a].from];
    }

    for (std::size_t p = 0; p < c.demands.size(); ++p) {
      double in = 0.0;
      for (std::size_t a = 0; a < c.jp.size(); ++a) {
        if (c.jp[a].to == p) in += f.jp[a];
      }
      const double inew = id_[p] + in - pre.delta[p];
      led.demand_new.push_back(inew);
      const double lb = c.demands[p].bounds.lo;
      if (inew < lb - eps && st != Strategy::None) {
        f.delta[p] = st == Strategy::Prop ? id_[p] + in - lb : 0.0;
      }
    }

    out.flows = std::move(f);
    return out;
  }

 protected:
  Observation do_reset() override {
    const Config& c = *cfg_;
    is_.clear();
    ib_.clear();
    id_.clear();
    prop_.clear();
    for (const auto& s : c.sources) is_.push_back(s.init);
    for (const auto& b : c.blenders) {
      ib_.push_back(b.init);
      prop_.push_back(b.properties);
    }
    for (const auto& d : c.demands) id_.push_back(d.init);
    return observe(0);
  }

  StepOutcome advance(std::span<const double> action) override {
    const Config& c = *cfg_;
    const auto t = static_cast<std::size_t>(time());
    const double eps = c.eps;
    const Sanitized san = sanitize(decode(action));
    const Flows& f = san.flows;
    const Ledger& led = san.ledger;
    const std::size_t nj = c.blenders.size();
    const std::size_t nq = c.properties.size();

    const auto bound_penalty = [&](double x, Bounds b) {
      if (x > b.hi + eps) return c.l_bound * (c.l0_bound + x - b.hi);
      if (x < b.lo - eps) return c.l_bound * (c.l0_bound + b.lo - x);
      return 0.0;
    };
    double src_cost = 0.0, bld_cost = 0.0, dem_cost = 0.0, inout_cost = 0.0, spec_cost = 0.0;
    for (std::size_t s = 0; s < c.sources.size(); ++s) src_cost += bound_penalty(led.source_new[s], c.sources[s].bounds);
    for (std::size_t j = 0; j < nj; ++j) {
      bld_cost += bound_penalty(led.blender_new[j], c.blenders[j].bounds);
      if (led.inout[j]) inout_cost += c.l0_inout;
    }
    for (std::size_t p = 0; p < c.demands.size(); ++p) dem_cost += bound_penalty(led.demand_new[p], c.demands[p].bounds);
    for (std::size_t a = 0; a < c.jp.size(); ++a) {
      if (f.jp[a] <= 0.0) continue;
      const auto& spec = c.demands[c.jp[a].to].spec;
      for (std::size_t q = 0; q < nq; ++q) {
        const double v = prop_[c.jp[a].from][q];
        if (v < spec[q].lo - eps || v > spec[q].hi + eps) spec_cost += c.l0_spec;
      }
    }

    // Sources.
    for (std::size_t s = 0; s < c.sources.size(); ++s) {
      double x = is_[s] + f.tau[s];
      for (std::size_t a = 0; a < c.sj.size(); ++a) {
        if (c.sj[a].from == s) x -= f.sj[a];
      }
      is_[s] = std::clamp(x, c.sources[s].bounds.lo, c.sources[s].bounds.hi);
    }

    // Blenders: mass balance and mixing. The retained content keeps its
    // previous composition; inflows bring theirs.
    std::vector<double> in(nj, 0.0), out(nj, 0.0);
    std::vector<std::vector<double>> mix(nj, std::vector<double>(nq, 0.0));
    for (std::size_t a = 0; a < c.sj.size(); ++a) {
      const std::size_t j = c.sj[a].to;
      in[j] += f.sj[a];
      for (std::size_t q = 0; q < nq; ++q) mix[j][q] += f.sj[a] * c.sources[c.sj[a].from].sigma[q];
    }
    for (std::size_t a = 0; a < c.jj.size(); ++a) {
      const std::size_t j = c.jj[a].to;
      in[j] += f.jj[a];
      out[c.jj[a].from] += f.jj[a];
      for (std::size_t q = 0; q < nq; ++q) mix[j][q] += f.jj[a] * prop_[c.jj[a].from][q];
    }
    for (std::size_t a = 0; a < c.jp.size(); ++a) out[c.jp[a].from] += f.jp[a];

    std::vector<std::vector<double>> next_prop(nj, std::vector<double>(nq, 0.0));
    for (std::size_t j = 0; j < nj; ++j) {
      const double balance = ib_[j] + in[j] - out[j];
      const double retained = std::max(ib_[j] - out[j], 0.0);
      const double mass = retained + in[j];
      ib_[j] = std::clamp(balance, c.blenders[j].bounds.lo, c.blenders[j].bounds.hi);
      if (ib_[j] <= eps || mass <= eps) continue;
      for (std::size_t q = 0; q < nq; ++q) next_prop[j][q] = (retained * prop_[j][q] + mix[j][q]) / mass;
    }
    prop_ = std::move(next_prop);

    // Demands.
    for (std::size_t p = 0; p < c.demands.size(); ++p) {
      double x = id_[p] - f.delta[p];
      for (std::size_t a = 0; a < c.jp.size(); ++a) {
        if (c.jp[a].to == p) x += f.jp[a];
      }
      id_[p] = std::clamp(x, c.demands[p].bounds.lo, c.demands[p].bounds.hi);
    }

    double sale = 0.0, purchase = 0.0, q_bin = 0.0, q_float = 0.0;
    for (std::size_t p = 0; p < c.demands.size(); ++p) sale += c.demands[p].price * f.delta[p];
    for (std::size_t s = 0; s < c.sources.size(); ++s) purchase += c.sources[s].price * f.tau[s];
    for (const auto* arcs : {&f.sj, &f.jp}) {
      for (const double x : *arcs) {
        if (x > 0.0) q_bin += 1.0;
        q_float += x;
      }
    }

    StepOutcome o;
    o.reward = sale - purchase - c.alpha * q_bin - c.beta * q_float;
    o.info = {
        {"cost_src_bound", src_cost},
        {"cost_bld_bound", bld_cost},
        {"cost_dem_bound", dem_cost},
        {"cost_inout", inout_cost},
        {"cost_prop_spec", spec_cost},
    };
    o.sanitized_action = f.flatten();
    o.observation = observe(t + 1);
    return o;
  }

 private:
  Observation observe(std::size_t t) const {
    const Config& c = *cfg_;
    const auto k = static_cast<std::size_t>(c.window);
    Observation obs;
    obs.reserve(observation_dim());
    obs.insert(obs.end(), is_.begin(), is_.end());
    obs.insert(obs.end(), ib_.begin(), ib_.end());
    obs.insert(obs.end(), id_.begin(), id_.end());
    for (const auto& row : prop_) obs.insert(obs.end(), row.begin(), row.end());
    for (const auto& s : c.sources) ForecastWindow{s.availability, 0, k}.append_to(obs, t);
    for (const auto& d : c.demands) ForecastWindow{d.caps, 0, k}.append_to(obs, t);
    obs.push_back(static_cast<double>(t));
    return obs;
  }

  std::shared_ptr<const Config> cfg_;
  std::vector<double> is_, ib_, id_;
  std::vector<std::vector<double>> prop_;
};

}  // namespace safeor::blending
