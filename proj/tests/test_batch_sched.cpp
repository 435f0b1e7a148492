#include <gtest/gtest.h>

#include <random>

#include "safeor/envs/batch_sched.hpp"
#include "test_util.hpp"

using namespace safeor;
using namespace safeor::batch_sched;
using safeor::testing::load;
using safeor::testing::uniform_action;

namespace {

// One task turning A into P on unit R.
json one_task(double a_init, double r_init, int duration, std::vector<double> demand, double p_init = 0.0) {
  return json{
      {"mode", "rtn"},
      {"horizon", 4},
      {"lambda_sanit", 1.0},
      {"resources",
       {{{"name", "A"}, {"class", "reactant"}, {"init", a_init}, {"min", 0}, {"max", 100}, {"cost", 1.0}},
        {{"name", "P"}, {"class", "product"}, {"init", p_init}, {"min", 0}, {"max", 100}, {"price", 10.0}},
        {{"name", "R"}, {"class", "equipment"}, {"init", r_init}, {"min", 0}, {"max", 1}}}},
      {"tasks",
       {{{"name", "make"},
         {"duration", duration},
         {"stoich", {{"A", -1.0}, {"P", 1.0}}},
         {"equipment", {"R"}},
         {"vmin", 1},
         {"vmax", 10}}}},
      {"demand", {{"P", demand}}}};
}

}  // namespace

TEST(BatchSched, SmallActionsAreZeroed) {
  BatchSchedEnv env(Config::from_json(load("rtn")));
  const std::vector<double> a(env.action_dim(), 1e-3);
  const auto s = env.decode_and_sanitize(a);
  for (const double b : s.batch) EXPECT_EQ(b, 0.0);
  EXPECT_EQ(s.deviation, 0.0);
}

TEST(BatchSched, HeadroomThenClip) {
  BatchSchedEnv env(Config::from_json(one_task(5.0, 1.0, 1, {0, 0, 0, 0})));
  const double a = 2.0 * 7.0 / 9.0 - 1.0;  // scaled 8 on [1, 10]
  const auto s = env.decode_and_sanitize(std::vector<double>{a});
  EXPECT_NEAR(s.scaled[0], 8.0, 1e-12);
  EXPECT_EQ(s.batch[0], 5.0);
  EXPECT_NEAR(s.deviation, 3.0, 1e-12);
}

TEST(BatchSched, MissingEquipmentForcesZero) {
  BatchSchedEnv env(Config::from_json(one_task(50.0, 0.0, 1, {0, 0, 0, 0})));
  const auto s = env.decode_and_sanitize(std::vector<double>{1.0});
  EXPECT_EQ(s.batch[0], 0.0);
  EXPECT_EQ(s.deviation, 10.0);
}

TEST(BatchSched, IdleStepWithoutDemandIsFree) {
  BatchSchedEnv env(Config::from_json(one_task(5.0, 1.0, 1, {0, 0, 0, 0})));
  const auto out = env.step(std::vector<double>{0.0});
  EXPECT_EQ(out.reward, 0.0);
  EXPECT_EQ(out.cost, 0.0);
}

TEST(BatchSched, RevenueAndUnmetPenalty) {
  BatchSchedEnv env(Config::from_json(one_task(5.0, 1.0, 1, {3, 0, 0, 0}, 2.0)));
  const auto out = env.step(std::vector<double>{0.0});
  EXPECT_EQ(out.info.at("revenue"), 20.0);
  EXPECT_EQ(out.info.at("unmet"), 15.0);
  EXPECT_EQ(out.reward, 5.0);
  EXPECT_EQ(env.inventory()[1], 0.0);
}

TEST(BatchSched, OutputArrivesAfterDuration) {
  BatchSchedEnv env(Config::from_json(one_task(50.0, 1.0, 2, {0, 0, 0, 0})));
  env.step(std::vector<double>{1.0});  // batch 10 at t = 0
  EXPECT_EQ(env.inventory()[1], 0.0);
  EXPECT_EQ(env.inventory()[2], 0.0);  // unit busy
  env.step(std::vector<double>{0.0});
  EXPECT_EQ(env.inventory()[1], 10.0);  // visible at t = 2
  EXPECT_EQ(env.inventory()[2], 1.0);
}

TEST(BatchSched, BusyUnitBlocksSecondDispatch) {
  BatchSchedEnv env(Config::from_json(one_task(50.0, 1.0, 3, {0, 0, 0, 0})));
  env.step(std::vector<double>{1.0});
  const auto out = env.step(std::vector<double>{1.0});
  EXPECT_EQ(out.sanitized_action[0], 0.0);
  EXPECT_EQ(out.info.at("cost_sanit"), 10.0);
}

TEST(BatchSched, StnSlotsCoverEveryUnit) {
  json doc = load("rtn");
  doc["mode"] = "stn";
  BatchSchedEnv env(Config::from_json(doc));
  ASSERT_EQ(env.action_dim(), 4u);  // 2 tasks x 2 units
  EXPECT_TRUE(env.slots()[0].eligible);
  EXPECT_FALSE(env.slots()[1].eligible);
  EXPECT_FALSE(env.slots()[2].eligible);
  EXPECT_TRUE(env.slots()[3].eligible);
  const auto s = env.decode_and_sanitize(std::vector<double>{0.0, 1.0, 1.0, 0.0});
  EXPECT_EQ(s.batch[1], 0.0);
  EXPECT_EQ(s.deviation, 0.0);
}

TEST(BatchSched, ConfigErrors) {
  json doc = one_task(5.0, 1.0, 1, {0});
  doc["mode"] = "xyz";
  EXPECT_THROW(Config::from_json(doc), ConfigError);
  doc = one_task(5.0, 1.0, 1, {0});
  doc["tasks"][0]["stoich"]["Q"] = 1.0;
  try {
    Config::from_json(doc);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.path(), "tasks[0].stoich.Q");
  }
  doc = one_task(5.0, 1.0, 1, {0});
  doc["tasks"][0]["stoich"]["A"] = 1.0;
  EXPECT_THROW(Config::from_json(doc), ConfigError);
  doc = one_task(500.0, 1.0, 1, {0});
  EXPECT_THROW(Config::from_json(doc), ConfigError);
}

class BatchSchedProperties : public ::testing::TestWithParam<const char*> {};

TEST_P(BatchSchedProperties, BoundsEquipmentAndMaterialLedger) {
  json doc = load("rtn");
  doc["mode"] = GetParam();
  BatchSchedEnv env(Config::from_json(doc));
  const Config& c = env.config();
  std::mt19937_64 rng(17);
  for (int episode = 0; episode < 50; ++episode) {
    env.reset();
    std::vector<double> produced(c.resources.size(), 0.0), consumed(c.resources.size(), 0.0);
    while (!env.done()) {
      const auto out = env.step(uniform_action(rng, env.action_dim()));
      for (std::size_t k = 0; k < env.slots().size(); ++k) {
        const Task& task = c.tasks[env.slots()[k].task];
        for (std::size_t r = 0; r < c.resources.size(); ++r) {
          if (task.stoich[r] > 0) produced[r] += task.stoich[r] * out.sanitized_action[k];
          if (task.stoich[r] < 0) consumed[r] -= task.stoich[r] * out.sanitized_action[k];
        }
      }
      for (std::size_t r = 0; r < c.resources.size(); ++r) {
        EXPECT_GE(env.inventory()[r], c.resources[r].bounds.lo);
        EXPECT_LE(env.inventory()[r], c.resources[r].bounds.hi);
        double pending = 0.0;
        const auto& cols = env.pendable();
        const auto it = std::find(cols.begin(), cols.end(), r);
        if (it != cols.end()) {
          for (const auto& row : env.pending()) pending += row[static_cast<std::size_t>(it - cols.begin())];
        }
        if (c.resources[r].cls == ResourceClass::Equipment) {
          EXPECT_EQ(env.inventory()[r] + pending, c.resources[r].init);
        }
        if (c.resources[r].cls == ResourceClass::Intermediate && out.info.at("cost_lb") == 0.0 &&
            out.info.at("cost_ub") == 0.0) {
          EXPECT_NEAR(produced[r] - consumed[r], env.inventory()[r] - c.resources[r].init + pending, 1e-9);
        }
      }
      if (out.info.at("cost_lb") != 0.0 || out.info.at("cost_ub") != 0.0) break;
    }
  }
}

INSTANTIATE_TEST_SUITE_P(Modes, BatchSchedProperties, ::testing::Values("rtn", "stn"));

TEST(BatchSched, NullEpisodeHasNoSanitOrEquipmentCost) {
  BatchSchedEnv env(Config::from_json(load("rtn")));
  while (!env.done()) {
    const auto out = env.step(std::vector<double>(env.action_dim(), 0.0));
    EXPECT_EQ(out.info.at("cost_eq"), 0.0);
    EXPECT_EQ(out.info.at("cost_sanit"), 0.0);
  }
}
