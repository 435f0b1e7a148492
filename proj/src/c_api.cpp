#include "safeor/c_api.h"

#include <cstring>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <utility>
#include <vector>

#include "safeor/harness/registry.hpp"

namespace {

struct Slot {
  std::unique_ptr<safeor::Env> env;
  std::mutex step_mutex;
  std::vector<std::pair<std::string, double>> info;
  std::vector<double> sanitized;
};

std::mutex g_registry_mutex;
std::map<safeor_handle, std::shared_ptr<Slot>> g_slots;
safeor_handle g_next = 1;
thread_local std::string g_last_error;

int fail(int code, std::string message) {
  g_last_error = std::move(message);
  return code;
}

std::shared_ptr<Slot> find(safeor_handle h) {
  std::lock_guard lock(g_registry_mutex);
  const auto it = g_slots.find(h);
  return it == g_slots.end() ? nullptr : it->second;
}

template <class F>
int guarded(F&& body) {
  try {
    return body();
  } catch (const safeor::ConfigError& e) {
    return fail(SAFEOR_ERR_CONFIG, e.what());
  } catch (const safeor::UnknownEnv& e) {
    return fail(SAFEOR_ERR_UNKNOWN_ENV, e.what());
  } catch (const safeor::DimensionMismatch& e) {
    return fail(SAFEOR_ERR_DIMENSION, e.what());
  } catch (const safeor::EpisodeFinished& e) {
    return fail(SAFEOR_ERR_FINISHED, e.what());
  } catch (const std::exception& e) {
    return fail(SAFEOR_ERR_OTHER, e.what());
  }
}

int copy_out(const std::vector<double>& src, double* dst, size_t len) {
  if (dst == nullptr) return SAFEOR_OK;
  if (len < src.size()) return fail(SAFEOR_ERR_BUFFER, "output buffer too small");
  std::memcpy(dst, src.data(), src.size() * sizeof(double));
  return SAFEOR_OK;
}

}  // namespace

extern "C" {

const char* safeor_last_error(void) { return g_last_error.c_str(); }

int safeor_make(const char* env_name, const char* config_json, safeor_handle* out) {
  return guarded([&] {
    if (env_name == nullptr || config_json == nullptr || out == nullptr) {
      return fail(SAFEOR_ERR_OTHER, "null argument");
    }
    auto slot = std::make_shared<Slot>();
    slot->env = safeor::make_env(env_name, safeor::parse_config_text(config_json));
    std::lock_guard lock(g_registry_mutex);
    *out = g_next++;
    g_slots.emplace(*out, std::move(slot));
    return static_cast<int>(SAFEOR_OK);
  });
}

int safeor_spec(safeor_handle h, size_t* obs_dim, size_t* act_dim, int* horizon) {
  const auto slot = find(h);
  if (!slot) return fail(SAFEOR_ERR_HANDLE, "invalid handle");
  if (obs_dim) *obs_dim = slot->env->observation_dim();
  if (act_dim) *act_dim = slot->env->action_dim();
  if (horizon) *horizon = slot->env->horizon();
  return SAFEOR_OK;
}

int safeor_reset(safeor_handle h, double* obs, size_t obs_len) {
  const auto slot = find(h);
  if (!slot) return fail(SAFEOR_ERR_HANDLE, "invalid handle");
  return guarded([&] {
    std::lock_guard lock(slot->step_mutex);
    if (obs != nullptr && obs_len < slot->env->observation_dim()) {
      return fail(SAFEOR_ERR_BUFFER, "output buffer too small");
    }
    slot->info.clear();
    slot->sanitized.clear();
    return copy_out(slot->env->reset(), obs, obs_len);
  });
}

int safeor_step(safeor_handle h, const double* action, size_t action_len, double* obs, size_t obs_len,
                double* reward, double* cost, int* terminated, int* truncated) {
  const auto slot = find(h);
  if (!slot) return fail(SAFEOR_ERR_HANDLE, "invalid handle");
  return guarded([&] {
    std::lock_guard lock(slot->step_mutex);
    if (action == nullptr && action_len != 0) return fail(SAFEOR_ERR_OTHER, "null action");
    if (obs != nullptr && obs_len < slot->env->observation_dim()) {
      return fail(SAFEOR_ERR_BUFFER, "output buffer too small");
    }
    safeor::StepOutcome out = slot->env->step(std::span<const double>(action, action_len));
    slot->info.assign(out.info.begin(), out.info.end());
    slot->sanitized = std::move(out.sanitized_action);
    if (reward) *reward = out.reward;
    if (cost) *cost = out.cost;
    if (terminated) *terminated = out.terminated ? 1 : 0;
    if (truncated) *truncated = out.truncated ? 1 : 0;
    return copy_out(out.observation, obs, obs_len);
  });
}

int safeor_info_size(safeor_handle h, size_t* n) {
  const auto slot = find(h);
  if (!slot) return fail(SAFEOR_ERR_HANDLE, "invalid handle");
  std::lock_guard lock(slot->step_mutex);
  if (n) *n = slot->info.size();
  return SAFEOR_OK;
}

int safeor_info_entry(safeor_handle h, size_t i, const char** key, double* value) {
  const auto slot = find(h);
  if (!slot) return fail(SAFEOR_ERR_HANDLE, "invalid handle");
  std::lock_guard lock(slot->step_mutex);
  if (i >= slot->info.size()) return fail(SAFEOR_ERR_BUFFER, "info index out of range");
  if (key) *key = slot->info[i].first.c_str();
  if (value) *value = slot->info[i].second;
  return SAFEOR_OK;
}

int safeor_sanitized_action(safeor_handle h, double* out, size_t len) {
  const auto slot = find(h);
  if (!slot) return fail(SAFEOR_ERR_HANDLE, "invalid handle");
  std::lock_guard lock(slot->step_mutex);
  return copy_out(slot->sanitized, out, len);
}

int safeor_close(safeor_handle h) {
  std::lock_guard lock(g_registry_mutex);
  if (g_slots.erase(h) == 0) return fail(SAFEOR_ERR_HANDLE, "invalid handle");
  return SAFEOR_OK;
}

}
