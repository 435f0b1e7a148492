#include <gtest/gtest.h>

#include <random>

#include "safeor/envs/grid_storage.hpp"
#include "test_util.hpp"

using namespace safeor;
using namespace safeor::grid_storage;
using safeor::testing::load;
using safeor::testing::uniform_action;

namespace {

json one_bus(double demand, double pmax, json battery = nullptr) {
  json doc{{"horizon", 2},
           {"window", 1},
           {"eta", 1.0},
           {"gamma", 1.0},
           {"theta_max", 0.0},
           {"s_max", 100.0},
           {"K_slack", 50.0},
           {"K_ls", 20.0},
           {"buses", {"b"}},
           {"generators", json::array({{{"name", "g"}, {"bus", "b"}, {"pmin", 0}, {"pmax", pmax}, {"cost", {0.0}}}})},
           {"demand", {{"b", {demand, demand}}}},
           {"penalties", {{"shed", 2.0}, {"balance", 1.0}}}};
  if (!battery.is_null()) {
    battery["bus"] = "b";
    doc["batteries"] = json::array({battery});
  }
  return doc;
}

double encode(double x, double lo, double hi) { return (x - lo) / (hi - lo) * 2.0 - 1.0; }

}  // namespace

TEST(GridStorage, LowerEndpointDecode) {
  GridStorageEnv env(Config::from_json(load("grid_storage")));
  const auto out = env.step(std::vector<double>(env.action_dim(), -1.0));
  const auto lo = env.action_lower();
  const std::size_t nb = env.config().buses.size();
  for (std::size_t i = 0; i < lo.size(); ++i) EXPECT_EQ(out.sanitized_action[i], lo[i]) << i;
  for (std::size_t n = 1; n < nb; ++n) {
    EXPECT_EQ(out.sanitized_action[out.sanitized_action.size() - nb + n], -env.config().theta_max);
  }
  EXPECT_EQ(out.info.at("shed"), 0.0);
}

TEST(GridStorage, ShedAboveMaxDemandClipped) {
  GridStorageEnv env(Config::from_json(one_bus(10.0, 100.0)));
  std::vector<double> pre{50.0, 0.0, 0.0, 13.0};
  const Decoded d = env.clip_physical(pre);
  EXPECT_EQ(d.shed[0], 10.0);
  EXPECT_EQ(d.penalty, 2.0 * 3.0);
  EXPECT_THROW(env.clip_physical(std::vector<double>{1.0}), DimensionMismatch);
}

TEST(GridStorage, GeneratorMidpoint) {
  GridStorageEnv env(Config::from_json(one_bus(10.0, 100.0)));
  const auto out = env.step(std::vector<double>{0.0, -1.0, -1.0, -1.0});
  EXPECT_EQ(out.sanitized_action[0], 50.0);
}

TEST(GridStorage, StateOfChargeUpdate) {
  const json battery{{"emin", 0.0}, {"emax", 1.0}, {"e0", 0.5}, {"charge", {0.0, 0.4}}, {"discharge", {0.0, 0.2}}};
  GridStorageEnv env(Config::from_json(one_bus(0.0, 100.0, battery)));
  env.step(std::vector<double>{-1.0, 0.0, 0.0, -1.0});
  EXPECT_NEAR(env.energy()[0], 0.6, 1e-12);
}

TEST(GridStorage, DeenergizedLineCarriesNothing) {
  GridStorageEnv env(Config::from_json(load("grid_storage")));
  std::mt19937_64 rng(5);
  for (int t = 0; t < 7; ++t) env.step(uniform_action(rng, env.action_dim()));
  // Step 6 took l13 out of service.
  EXPECT_EQ(env.last_flows()[2], 0.0);
  EXPECT_NE(env.last_flows()[0], 0.0);
}

TEST(GridStorage, SlackCoversShortfall) {
  GridStorageEnv env(Config::from_json(one_bus(10.0, 100.0)));
  const auto out = env.step(std::vector<double>{encode(8.0, 0.0, 100.0), -1.0, -1.0, -1.0});
  EXPECT_NEAR(out.info.at("slack"), 2.0, 1e-12);
  EXPECT_NEAR(out.reward, -2.0 * 50.0, 1e-9);
  EXPECT_NEAR(out.info.at("cost_balance"), 0.0, 1e-12);
}

TEST(GridStorage, ConfigErrors) {
  json doc = one_bus(1.0, 10.0);
  doc["eta"] = 0.0;
  EXPECT_THROW(Config::from_json(doc), ConfigError);
  doc = load("grid_storage");
  doc["deenergized"]["99"] = {"l12"};
  EXPECT_THROW(Config::from_json(doc), ConfigError);
  doc = load("grid_storage");
  doc["deenergized"]["3"] = {"l99"};
  try {
    Config::from_json(doc);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.path(), "deenergized.3[0]");
  }
}

TEST(GridStorage, FlowsSlackAndSocInvariants) {
  GridStorageEnv env(Config::from_json(load("grid_storage")));
  const Config& c = env.config();
  const std::size_t nb = c.buses.size();
  std::mt19937_64 rng(9);
  for (int episode = 0; episode < 100; ++episode) {
    env.reset();
    while (!env.done()) {
      const auto t = static_cast<std::size_t>(env.time());
      const auto out = env.step(uniform_action(rng, env.action_dim()));
      for (std::size_t l = 0; l < c.lines.size(); ++l) {
        const Line& ln = c.lines[l];
        const double expect =
            c.deenergized[t][l] != 0 ? 0.0 : ln.susceptance * (env.last_theta()[ln.from] - env.last_theta()[ln.to]);
        EXPECT_NEAR(env.last_flows()[l], expect, 1e-12);
      }
      EXPECT_GE(out.info.at("slack"), 0.0);
      bool balanced = true;
      for (const double r : env.last_residual()) balanced = balanced && r == 0.0;
      EXPECT_EQ(out.info.at("cost_balance") == 0.0, balanced || c.penalties.balance == 0.0);
      for (std::size_t n = 0; n < nb; ++n) {
        EXPECT_GE(out.observation[n], 0.0);
        EXPECT_LE(out.observation[n], 1.0);
        if (c.batteries[n].emax > 0.0) {
          EXPECT_GE(env.energy()[n], c.batteries[n].emin);
          EXPECT_LE(env.energy()[n], c.batteries[n].emax);
        }
      }
    }
  }
}
