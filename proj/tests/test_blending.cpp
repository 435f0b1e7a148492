#include <gtest/gtest.h>

#include <random>

#include "safeor/envs/blending.hpp"
#include "test_util.hpp"

using namespace safeor;
using namespace safeor::blending;
using safeor::testing::load;
using safeor::testing::uniform_action;

namespace {

// Source s feeds j1 and j2, j1 feeds j2, j2 delivers to p.
json small(const char* strategy, double s_init, double j1_init, double j2_init, double j2_prop = 0.0) {
  return json{{"strategy", strategy},
              {"horizon", 3},
              {"fmax", 40},
              {"alpha", 0.0},
              {"beta", 0.0},
              {"window", 1},
              {"lambdas", {{"l0_bound", 1.0}, {"l_bound", 1.0}, {"l0_inout", 2.0}, {"l0_spec", 3.0}}},
              {"properties", {"q"}},
              {"sources", json::array({{{"name", "s"}, {"sigma", {0.5}}, {"bounds", {0, 100}}, {"init", s_init},
                                        {"availability", {10, 10, 10}}, {"price", 1.0}}})},
              {"blenders", json::array({{{"name", "j1"}, {"bounds", {0, 100}}, {"init", j1_init}},
                                        {{"name", "j2"}, {"bounds", {0, 100}}, {"init", j2_init},
                                         {"properties", {j2_prop}}}})},
              {"demands", json::array({{{"name", "p"}, {"spec", json::array({{0.0, 1.0}})}, {"bounds", {0, 100}},
                                        {"init", 0}, {"caps", {10, 10, 10}}, {"price", 4.0}}})},
              {"arcs", {{"sj", json::array({{"s", "j1"}, {"s", "j2"}})},
                        {"jj", json::array({json::array({"j1", "j2"})})},
                        {"jp", json::array({json::array({"j2", "p"})})}}}};
}

Flows flows(double tau, double delta, std::vector<double> sj, double jj, double jp) {
  Flows f;
  f.tau = {tau};
  f.delta = {delta};
  f.sj = std::move(sj);
  f.jj = {jj};
  f.jp = {jp};
  return f;
}

double encode(double x, double hi) { return x / hi * 2.0 - 1.0; }

}  // namespace

TEST(Blending, PropScalesSourceOutflows) {
  BlendingEnv env(Config::from_json(small("prop", 2.0, 0.0, 0.0)));
  const auto s = env.sanitize(flows(1.0, 0.0, {2.0, 3.0}, 0.0, 0.0));
  EXPECT_DOUBLE_EQ(s.flows.sj[0], 2.0 * 3.0 / 5.0);
  EXPECT_DOUBLE_EQ(s.flows.sj[1], 3.0 * 3.0 / 5.0);
  EXPECT_EQ(s.ledger.source_new[0], -2.0);
}

TEST(Blending, DisableZeroesSourceOutflows) {
  BlendingEnv env(Config::from_json(small("disable", 2.0, 0.0, 0.0)));
  const auto s = env.sanitize(flows(1.0, 0.0, {2.0, 3.0}, 0.0, 0.0));
  EXPECT_EQ(s.flows.sj, (std::vector<double>{0.0, 0.0}));
}

TEST(Blending, DisableInOutZeroesBlenderOutflows) {
  BlendingEnv env(Config::from_json(small("disable", 50.0, 10.0, 10.0)));
  const auto s = env.sanitize(flows(0.0, 0.0, {2.0, 0.0}, 1.0, 0.0));
  EXPECT_TRUE(s.ledger.inout[0]);
  EXPECT_FALSE(s.ledger.inout[1]);
  EXPECT_EQ(s.flows.jj[0], 0.0);
  EXPECT_EQ(s.flows.sj[0], 2.0);
}

TEST(Blending, NoneLeavesFlowsButKeepsLedger) {
  BlendingEnv env(Config::from_json(small("none", 2.0, 10.0, 10.0)));
  const Flows pre = flows(1.0, 0.0, {2.0, 3.0}, 1.0, 0.0);
  const auto s = env.sanitize(pre);
  EXPECT_EQ(s.flows.flatten(), pre.flatten());
  EXPECT_EQ(s.ledger.source_new[0], -2.0);
  EXPECT_TRUE(s.ledger.inout[0]);
}

TEST(Blending, EmptyBlenderTakesSourceProperty) {
  BlendingEnv env(Config::from_json(small("prop", 50.0, 0.0, 0.0)));
  env.step(std::vector<double>{-1.0, -1.0, encode(2.0, 40.0), -1.0, -1.0, -1.0});
  EXPECT_NEAR(env.blender_inventory()[0], 2.0, 1e-12);
  EXPECT_DOUBLE_EQ(env.properties()[0][0], 0.5);
  EXPECT_EQ(env.properties()[1][0], 0.0);
}

TEST(Blending, NullActionIsFree) {
  BlendingEnv env(Config::from_json(small("prop", 50.0, 0.0, 0.0)));
  const auto out = env.step(std::vector<double>(env.action_dim(), -1.0));
  EXPECT_EQ(out.reward, 0.0);
  EXPECT_EQ(out.cost, 0.0);
}

TEST(Blending, OffSpecDeliveryPenalized) {
  BlendingEnv env(Config::from_json(small("prop", 50.0, 0.0, 10.0, 3.0)));
  const auto out = env.step(std::vector<double>{-1.0, -1.0, -1.0, -1.0, -1.0, encode(4.0, 40.0)});
  EXPECT_EQ(out.info.at("cost_prop_spec"), 3.0);
  EXPECT_EQ(out.cost, 3.0);
}

TEST(Blending, ConfigErrors) {
  json doc = small("prop", 1.0, 0.0, 0.0);
  doc["arcs"]["jj"].push_back({"j2", "j1"});
  EXPECT_THROW(Config::from_json(doc), ConfigError);
  doc = small("blend", 1.0, 0.0, 0.0);
  EXPECT_THROW(Config::from_json(doc), ConfigError);
  doc = small("prop", 1.0, 0.0, 0.0);
  doc["arcs"]["sj"].push_back({"s", "j9"});
  try {
    Config::from_json(doc);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.path(), "arcs.sj[2][1]");
  }
}

class BlendingProperties : public ::testing::TestWithParam<const char*> {};

TEST_P(BlendingProperties, MassBalanceAndRuleChecks) {
  json doc = load("blending");
  doc["strategy"] = GetParam();
  BlendingEnv env(Config::from_json(doc));
  const Config& c = env.config();
  const std::size_t ns = c.sources.size(), np = c.demands.size(), nj = c.blenders.size();
  std::mt19937_64 rng(31);
  for (int episode = 0; episode < 100; ++episode) {
    env.reset();
    while (!env.done()) {
      const auto a = uniform_action(rng, env.action_dim());
      const Flows decoded = env.decode(a);
      const auto before = env.blender_inventory();
      const auto out = env.step(a);
      if (c.strategy == Strategy::None) { EXPECT_EQ(out.sanitized_action, decoded.flatten()); }
      const auto& x = out.sanitized_action;
      std::vector<double> in(nj, 0.0), outflow(nj, 0.0);
      std::size_t k = ns + np;
      for (const Arc& arc : c.sj) in[arc.to] += x[k++];
      for (const Arc& arc : c.jj) {
        in[arc.to] += x[k];
        outflow[arc.from] += x[k++];
      }
      for (const Arc& arc : c.jp) outflow[arc.from] += x[k++];
      for (std::size_t j = 0; j < nj; ++j) {
        const double expect = std::clamp(before[j] + in[j] - outflow[j], c.blenders[j].bounds.lo, c.blenders[j].bounds.hi);
        EXPECT_NEAR(env.blender_inventory()[j], expect, 1e-9);
        if (c.strategy == Strategy::Disable) { EXPECT_FALSE(in[j] > c.eps && outflow[j] > c.eps); }
        if (env.blender_inventory()[j] <= c.eps) {
          for (const double v : env.properties()[j]) EXPECT_EQ(v, 0.0);
        }
      }
    }
  }
}

INSTANTIATE_TEST_SUITE_P(Strategies, BlendingProperties, ::testing::Values("prop", "disable", "none"));
