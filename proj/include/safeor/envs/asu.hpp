#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <memory>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "safeor/config.hpp"
#include "safeor/core.hpp"

namespace safeor::asu {

using Point = std::vector<double>;

namespace hull_detail {

using V3 = std::array<double, 3>;

inline V3 sub(const V3& a, const V3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
inline double dot(const V3& a, const V3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
inline V3 cross(const V3& a, const V3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}
inline double norm(const V3& a) { return std::sqrt(dot(a, a)); }

inline double cross2(const std::array<double, 2>& o, const std::array<double, 2>& a,
                     const std::array<double, 2>& b) {
  return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
}

/// Monotone chain over 2D points; returns indices of strict vertices.
inline std::vector<std::size_t> chain(const std::vector<std::array<double, 2>>& p, double tol) {
  std::vector<std::size_t> idx(p.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return p[a] < p[b]; });
  if (idx.size() < 3) return idx;
  std::vector<std::size_t> h(2 * idx.size());
  std::size_t k = 0;
  for (const std::size_t i : idx) {
    while (k >= 2 && cross2(p[h[k - 2]], p[h[k - 1]], p[i]) <= tol) --k;
    h[k++] = i;
  }
  for (std::size_t j = idx.size() - 1, lo = k + 1; j-- > 0;) {
    const std::size_t i = idx[j];
    while (k >= lo && cross2(p[h[k - 2]], p[h[k - 1]], p[i]) <= tol) --k;
    h[k++] = i;
  }
  h.resize(k - 1);
  return h;
}

/// Vertices of a set of 3D points lying in the plane through `origin` spanned by u, w.
inline std::vector<std::size_t> planar(const std::vector<V3>& pts, const std::vector<std::size_t>& on,
                                       const V3& origin, const V3& u, const V3& w, double tol) {
  std::vector<std::array<double, 2>> q;
  for (const std::size_t i : on) {
    const V3 d = sub(pts[i], origin);
    q.push_back({dot(d, u), dot(d, w)});
  }
  std::vector<std::size_t> out;
  for (const std::size_t j : chain(q, tol)) out.push_back(on[j]);
  return out;
}

}  // namespace hull_detail

/// Extreme points of the convex hull of `points` (dimension 1 to 3),
/// deduplicated and sorted lexicographically.
inline std::vector<Point> hull_vertices(std::vector<Point> points) {
  using namespace hull_detail;
  std::sort(points.begin(), points.end());
  points.erase(std::unique(points.begin(), points.end()), points.end());
  if (points.size() <= 1) return points;
  const std::size_t m = points.front().size();
  if (m == 0 || m > 3) throw std::invalid_argument("hull supports 1 to 3 dimensions");

  double scale = 0.0;
  for (const auto& p : points) {
    for (const double x : p) scale = std::max(scale, std::abs(x));
  }
  const double tol = 1e-9 * std::max(scale, 1.0);

  std::vector<V3> pts;
  for (const auto& p : points) pts.push_back({p[0], m > 1 ? p[1] : 0.0, m > 2 ? p[2] : 0.0});
  const std::size_t n = pts.size();

  // Farthest point from pts[0] fixes a line; if all points are on it, the ends are the hull.
  std::size_t far = 1;
  for (std::size_t i = 1; i < n; ++i) {
    if (norm(sub(pts[i], pts[0])) > norm(sub(pts[far], pts[0]))) far = i;
  }
  const V3 axis = sub(pts[far], pts[0]);
  std::size_t off_line = n;
  double best = tol * tol;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = norm(cross(axis, sub(pts[i], pts[0])));
    if (d > best) best = d, off_line = i;
  }
  std::vector<bool> keep(n, false);
  if (off_line == n) {
    std::size_t lo = 0, hi = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (dot(sub(pts[i], pts[0]), axis) < dot(sub(pts[lo], pts[0]), axis)) lo = i;
      if (dot(sub(pts[i], pts[0]), axis) > dot(sub(pts[hi], pts[0]), axis)) hi = i;
    }
    keep[lo] = keep[hi] = true;
  } else {
    const V3 normal0 = cross(axis, sub(pts[off_line], pts[0]));
    bool coplanar = true;
    for (std::size_t i = 0; i < n && coplanar; ++i) {
      coplanar = std::abs(dot(normal0, sub(pts[i], pts[0]))) <= tol * norm(normal0);
    }
    if (coplanar) {
      std::vector<std::size_t> all(n);
      std::iota(all.begin(), all.end(), 0);
      const double ul = norm(axis);
      const V3 u{axis[0] / ul, axis[1] / ul, axis[2] / ul};
      V3 w = cross(normal0, u);
      const double wl = norm(w);
      w = {w[0] / wl, w[1] / wl, w[2] / wl};
      for (const std::size_t i : planar(pts, all, pts[0], u, w, tol)) keep[i] = true;
    } else {
      // Every supporting plane through three points contributes its face's 2D hull.
      for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = a + 1; b < n; ++b) {
          for (std::size_t c = b + 1; c < n; ++c) {
            const V3 e1 = sub(pts[b], pts[a]);
            const V3 nrm = cross(e1, sub(pts[c], pts[a]));
            const double nl = norm(nrm);
            if (nl <= tol * norm(e1)) continue;
            int above = 0, below = 0;
            std::vector<std::size_t> on;
            for (std::size_t i = 0; i < n; ++i) {
              const double s = dot(nrm, sub(pts[i], pts[a])) / nl;
              if (s > tol) ++above;
              else if (s < -tol) ++below;
              else on.push_back(i);
            }
            if (above > 0 && below > 0) continue;
            const double el = norm(e1);
            const V3 u{e1[0] / el, e1[1] / el, e1[2] / el};
            V3 w = cross(nrm, u);
            const double wl = norm(w);
            w = {w[0] / wl, w[1] / wl, w[2] / wl};
            for (const std::size_t i : planar(pts, on, pts[a], u, w, tol)) keep[i] = true;
          }
        }
      }
    }
  }
  std::vector<Point> out;
  for (std::size_t i = 0; i < n; ++i) {
    if (keep[i]) out.push_back(points[i]);
  }
  return out;
}

inline constexpr double kOffThreshold = 1e-6;

struct Weights {
  std::vector<double> lambda;
  bool on = false;
};

/// Convex-sum normalization of clipped weights; below the threshold the plant is off.
inline Weights normalize_weights(std::span<const double> raw) {
  Weights w;
  w.lambda.assign(raw.size(), 0.0);
  double sum = 0.0;
  for (const double x : raw) sum += std::clamp(x, 0.0, 1.0);
  if (sum < kOffThreshold) return w;
  w.on = true;
  for (std::size_t i = 0; i < raw.size(); ++i) w.lambda[i] = std::clamp(raw[i], 0.0, 1.0) / sum;
  return w;
}

struct Config {
  std::vector<Point> vertices;              // [vertex][product]
  std::vector<Bounds> iv_bounds;            // per product
  std::vector<double> iv0;
  std::vector<std::vector<double>> demand;  // [product][hour]
  std::vector<double> electricity;          // per hour
  double c_fixed = 0.0;
  double c_unit = 0.0;
  double rho_iv = 0.0;
  double rho_d = 0.0;
  int lookahead_days = 0;
  int episode_days = 1;

  std::size_t products() const { return iv_bounds.size(); }
  int horizon() const { return 24 * episode_days; }
  std::size_t window() const { return 24 * static_cast<std::size_t>(lookahead_days + 1); }

  static Config from_json(const json& doc) { return parse(Field(doc, "")); }

  static Config parse(const Field& root) {
    Config c;
    c.episode_days = static_cast<int>(root["episode_days"].integer(1, 100'000));
    c.lookahead_days = static_cast<int>(root["lookahead_days"].integer(0, 100'000));

    for (const Field& f : root["iv_bounds"].items()) c.iv_bounds.push_back(f.bounds());
    const std::size_t m = c.products();
    if (m == 0) root["iv_bounds"].fail("at least one product is required");
    for (std::size_t j = 0; j < m; ++j) {
      if (c.iv_bounds[j].lo < 0.0) root["iv_bounds"][j].fail("inventory bounds must be nonnegative");
    }

    auto read_points = [m](const Field& f) {
      std::vector<Point> pts;
      for (const Field& row : f.items()) {
        Point p;
        for (const Field& x : row.items()) p.push_back(x.nonneg());
        if (p.size() != m) row.fail("expected one entry per product");
        pts.push_back(std::move(p));
      }
      if (pts.empty()) f.fail("at least one point is required");
      return pts;
    };
    if (root.has("vertices")) {
      c.vertices = read_points(root["vertices"]);
    } else if (root.has("history")) {
      if (m > 3) root["history"].fail("hull computation supports at most 3 products");
      c.vertices = hull_vertices(read_points(root["history"]));
    } else {
      root.fail("either vertices or history is required");
    }

    if (root.has("iv0")) {
      c.iv0 = root["iv0"].numbers();
      if (c.iv0.size() != m) root["iv0"].fail("expected one entry per product");
      for (std::size_t j = 0; j < m; ++j) {
        if (!c.iv_bounds[j].contains(c.iv0[j])) root["iv0"][j].fail("initial inventory outside bounds");
      }
    } else {
      for (const auto& b : c.iv_bounds) c.iv0.push_back(b.lo);
    }

    const std::size_t need = 24 * static_cast<std::size_t>(c.episode_days + c.lookahead_days + 1);
    if (root.has("demand")) {
      const Field d = root["demand"];
      if (d.size() != m) d.fail("expected one row per product");
      for (std::size_t j = 0; j < m; ++j) {
        std::vector<double> row;
        for (const Field& x : d[j].items()) row.push_back(x.nonneg());
        c.demand.push_back(std::move(row));
      }
    } else {
      const Field d = root["demand_daily"];
      if (d.size() != m) d.fail("expected one row per product");
      for (std::size_t j = 0; j < m; ++j) {
        std::vector<double> row;
        for (const Field& x : d[j].items()) {
          row.insert(row.end(), 23, 0.0);
          row.push_back(x.nonneg());
        }
        c.demand.push_back(std::move(row));
      }
    }
    for (std::size_t j = 0; j < m; ++j) {
      if (c.demand[j].size() < need) root.fail("demand series must cover episode and lookahead days");
    }
    for (const Field& x : root["electricity"].items()) c.electricity.push_back(x.nonneg());
    if (c.electricity.size() < need) root["electricity"].fail("series must cover episode and lookahead days");

    c.c_fixed = root["c_fixed"].nonneg();
    c.c_unit = root["c_unit"].nonneg();
    c.rho_iv = root["rho_iv"].nonneg();
    c.rho_d = root["rho_d"].nonneg();
    return c;
  }
};

/// ASUEnv.
///
/// Action: one weight per hull vertex. Observation: price window, demand
/// windows (product-major), inventories. Windows span the current and the
/// lookahead days at hourly resolution.
class AsuEnv final : public Env {
 public:
  explicit AsuEnv(Config config) : cfg_(std::make_shared<const Config>(std::move(config))) { do_reset(); }

  std::string_view name() const override { return "ASUEnv"; }
  std::size_t action_dim() const override { return cfg_->vertices.size(); }
  std::size_t observation_dim() const override { return (cfg_->products() + 1) * cfg_->window() + cfg_->products(); }
  int horizon() const override { return cfg_->horizon(); }
  std::unique_ptr<Env> clone() const override { return std::make_unique<AsuEnv>(*this); }

  const Config& config() const { return *cfg_; }
  const std::vector<double>& inventory() const { return iv_; }

 protected:
  Observation do_reset() override {
    iv_ = cfg_->iv0;
    refresh(0);
    return observe();
  }

  StepOutcome advance(std::span<const double> action) override {
    const Config& c = *cfg_;
    const auto t = static_cast<std::size_t>(time());
    const std::size_t m = c.products();

    std::vector<double> raw(action.size());
    for (std::size_t x = 0; x < raw.size(); ++x) raw[x] = affine_decode(action[x], Bounds{0.0, 1.0});
    const Weights w = normalize_weights(raw);

    std::vector<double> pq(m, 0.0);
    for (std::size_t x = 0; x < w.lambda.size(); ++x) {
      for (std::size_t j = 0; j < m; ++j) pq[j] += w.lambda[x] * c.vertices[x][j];
    }

    const bool day_end = t % 24 == 23;
    double cost_demand = 0.0;
    double cost_iv = 0.0;
    StepOutcome out;
    for (std::size_t j = 0; j < m; ++j) {
      double level = iv_[j] + pq[j];
      double dq = 0.0;
      if (day_end) {
        const double d = c.demand[j][t];
        dq = std::min(std::max(level - c.iv_bounds[j].lo, 0.0), d);
        level -= dq;
        cost_demand += c.rho_d * std::max(d - dq, 0.0);
      }
      if (level > c.iv_bounds[j].hi) {
        cost_iv += c.rho_iv * (level - c.iv_bounds[j].hi);
        level = c.iv_bounds[j].hi;
      }
      iv_[j] = level;
      out.info["dispatched_" + std::to_string(j)] = dq;
    }

    double production = 0.0;
    if (w.on) production = c.c_fixed + std::accumulate(pq.begin(), pq.end(), 0.0) * c.c_unit * c.electricity[t];

    if ((t + 1) % 24 == 0) {
      refresh(t + 1);
    } else {
      shift();
    }

    out.reward = -production;
    out.info["cost_iv"] = cost_iv;
    out.info["cost_demand"] = cost_demand;
    out.sanitized_action = w.lambda;
    out.observation = observe();
    return out;
  }

 private:
  void refresh(std::size_t t) {
    const Config& c = *cfg_;
    const std::size_t n = c.window();
    price_.assign(c.electricity.begin() + static_cast<std::ptrdiff_t>(t),
                  c.electricity.begin() + static_cast<std::ptrdiff_t>(t + n));
    demand_.clear();
    for (const auto& row : c.demand) {
      demand_.emplace_back(row.begin() + static_cast<std::ptrdiff_t>(t), row.begin() + static_cast<std::ptrdiff_t>(t + n));
    }
  }

  void shift() {
    price_.erase(price_.begin());
    const double mean =
        price_.empty() ? 0.0 : std::accumulate(price_.begin(), price_.end(), 0.0) / static_cast<double>(price_.size());
    price_.push_back(mean);
    for (auto& row : demand_) {
      row.erase(row.begin());
      row.push_back(0.0);
    }
  }

  Observation observe() const {
    Observation obs;
    obs.reserve(observation_dim());
    obs.insert(obs.end(), price_.begin(), price_.end());
    for (const auto& row : demand_) obs.insert(obs.end(), row.begin(), row.end());
    obs.insert(obs.end(), iv_.begin(), iv_.end());
    return obs;
  }

  std::shared_ptr<const Config> cfg_;
  std::vector<double> iv_;
  std::vector<double> price_;
  std::vector<std::vector<double>> demand_;
};

}  // namespace safeor::asu
