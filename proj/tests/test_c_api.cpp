#include <gtest/gtest.h>

#include <random>
#include <string>

#include "safeor/c_api.h"
#include "test_util.hpp"

using namespace safeor;
using safeor::testing::load;
using safeor::testing::uniform_action;

namespace {

safeor_handle make(const std::string& env, const std::string& config) {
  safeor_handle h = 0;
  EXPECT_EQ(safeor_make(env.c_str(), load(config).dump().c_str(), &h), SAFEOR_OK) << safeor_last_error();
  return h;
}

struct CStep {
  std::vector<double> obs;
  double reward = 0.0, cost = 0.0;
  int terminated = 0, truncated = 0;
  int status = 0;
};

CStep step(safeor_handle h, const std::vector<double>& a, std::size_t obs_dim) {
  CStep s;
  s.obs.resize(obs_dim);
  s.status = safeor_step(h, a.data(), a.size(), s.obs.data(), s.obs.size(), &s.reward, &s.cost, &s.terminated,
                         &s.truncated);
  return s;
}

}  // namespace

TEST(CApi, UcV0Spec) {
  const safeor_handle h = make("uc-v0", "uc_v0");
  std::size_t obs = 0, act = 0;
  int horizon = 0;
  ASSERT_EQ(safeor_spec(h, &obs, &act, &horizon), SAFEOR_OK);
  EXPECT_EQ(act, 2 * load("uc_v0")["generators"].size());
  EXPECT_EQ(horizon, 24);
  safeor_close(h);
}

TEST(CApi, UnknownEnv) {
  safeor_handle h = 0;
  EXPECT_EQ(safeor_make("warehouse", "{}", &h), SAFEOR_ERR_UNKNOWN_ENV);
}

TEST(CApi, ConfigErrorNamesField) {
  json doc = load("uc_v0");
  doc.erase("penalty");
  safeor_handle h = 0;
  EXPECT_EQ(safeor_make("uc-v0", doc.dump().c_str(), &h), SAFEOR_ERR_CONFIG);
  EXPECT_NE(std::string(safeor_last_error()).find("penalty"), std::string::npos);
  EXPECT_EQ(safeor_make("uc-v0", "{not json", &h), SAFEOR_ERR_CONFIG);
}

TEST(CApi, MatchesCoreOnEveryEnv) {
  for (const auto& [name, config] : std::vector<std::pair<std::string, std::string>>{
           {"rtn", "rtn"}, {"stn", "rtn"}, {"uc-v0", "uc_v0"}, {"uc-v1", "uc_v1"}, {"gtep", "gtep"},
           {"gtep-nolines", "gtep"}, {"blending-prop", "blending"}, {"blending-disable", "blending"},
           {"blending-none", "blending"}, {"inv_mgmt", "inv_mgmt"}, {"grid_storage", "grid_storage"},
           {"sched_maint", "sched_maint"}, {"asu", "asu"}}) {
    SCOPED_TRACE(name);
    auto core = make_env(name, load(config));
    const safeor_handle h = make(name, config);
    std::vector<double> obs(core->observation_dim());
    ASSERT_EQ(safeor_reset(h, obs.data(), obs.size()), SAFEOR_OK);
    EXPECT_EQ(obs, core->reset());
    std::mt19937_64 rng(61);
    for (int k = 0; k < 100; ++k) {
      if (core->done()) {
        core->reset();
        ASSERT_EQ(safeor_reset(h, nullptr, 0), SAFEOR_OK);
      }
      const auto a = uniform_action(rng, core->action_dim());
      const auto expect = core->step(a);
      const CStep got = step(h, a, core->observation_dim());
      ASSERT_EQ(got.status, SAFEOR_OK) << safeor_last_error();
      for (std::size_t i = 0; i < got.obs.size(); ++i) EXPECT_NEAR(got.obs[i], expect.observation[i], 1e-12);
      EXPECT_NEAR(got.reward, expect.reward, 1e-12);
      EXPECT_NEAR(got.cost, expect.cost, 1e-12);
      EXPECT_EQ(got.terminated != 0, expect.terminated);
      std::size_t n = 0;
      safeor_info_size(h, &n);
      ASSERT_EQ(n, expect.info.size());
      for (std::size_t i = 0; i < n; ++i) {
        const char* key = nullptr;
        double value = 0.0;
        ASSERT_EQ(safeor_info_entry(h, i, &key, &value), SAFEOR_OK);
        EXPECT_NEAR(value, expect.info.at(key), 1e-12);
      }
      std::vector<double> sanitized(core->action_dim());
      ASSERT_EQ(safeor_sanitized_action(h, sanitized.data(), sanitized.size()), SAFEOR_OK);
      EXPECT_EQ(sanitized, expect.sanitized_action);
    }
    safeor_close(h);
  }
}

TEST(CApi, TerminatedHandleRefusesStep) {
  const safeor_handle h = make("rtn", "rtn_tiny");
  std::size_t obs = 0, act = 0;
  int horizon = 0;
  safeor_spec(h, &obs, &act, &horizon);
  safeor_reset(h, nullptr, 0);
  const std::vector<double> a(act, 0.0);
  for (int t = 0; t < horizon; ++t) ASSERT_EQ(step(h, a, obs).status, SAFEOR_OK);
  EXPECT_EQ(step(h, a, obs).status, SAFEOR_ERR_FINISHED);
  safeor_close(h);
}

TEST(CApi, ArgumentErrors) {
  const safeor_handle h = make("rtn", "rtn");
  std::size_t obs = 0, act = 0;
  safeor_spec(h, &obs, &act, nullptr);
  EXPECT_EQ(step(h, std::vector<double>(act + 1, 0.0), obs).status, SAFEOR_ERR_DIMENSION);
  EXPECT_EQ(step(h, std::vector<double>(act, 0.0), obs - 1).status, SAFEOR_ERR_BUFFER);
  EXPECT_EQ(safeor_close(h), SAFEOR_OK);
  EXPECT_EQ(safeor_close(h), SAFEOR_ERR_HANDLE);
  EXPECT_EQ(step(h, std::vector<double>(act, 0.0), obs).status, SAFEOR_ERR_HANDLE);
}

TEST(CApi, HandlesAreIsolated) {
  const safeor_handle a = make("inv_mgmt", "inv_mgmt");
  const safeor_handle b = make("inv_mgmt", "inv_mgmt");
  EXPECT_NE(a, b);
  std::size_t obs = 0, act = 0;
  int horizon = 0;
  safeor_spec(a, &obs, &act, &horizon);
  std::mt19937_64 rng(67);
  std::vector<std::vector<double>> actions_a, actions_b;
  for (int t = 0; t < horizon; ++t) {
    actions_a.push_back(uniform_action(rng, act));
    actions_b.push_back(uniform_action(rng, act));
  }
  safeor_reset(a, nullptr, 0);
  safeor_reset(b, nullptr, 0);
  std::vector<CStep> inter_a, inter_b;
  for (int t = 0; t < horizon; ++t) {
    inter_a.push_back(step(a, actions_a[t], obs));
    inter_b.push_back(step(b, actions_b[t], obs));
  }
  safeor_reset(a, nullptr, 0);
  for (int t = 0; t < horizon; ++t) {
    const CStep s = step(a, actions_b[t], obs);
    EXPECT_EQ(s.obs, inter_b[t].obs);
    EXPECT_EQ(s.reward, inter_b[t].reward);
    EXPECT_EQ(s.cost, inter_b[t].cost);
  }
  safeor_reset(b, nullptr, 0);
  for (int t = 0; t < horizon; ++t) {
    const CStep s = step(b, actions_a[t], obs);
    EXPECT_EQ(s.obs, inter_a[t].obs);
    EXPECT_EQ(s.reward, inter_a[t].reward);
  }
  safeor_close(a);
  safeor_close(b);
}
