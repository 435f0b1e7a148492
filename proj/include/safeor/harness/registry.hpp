#pragma once

#include <memory>
#include <string>
#include <vector>

#include "safeor/config.hpp"
#include "safeor/envs/asu.hpp"
#include "safeor/envs/batch_sched.hpp"
#include "safeor/envs/blending.hpp"
#include "safeor/envs/grid_storage.hpp"
#include "safeor/envs/gtep.hpp"
#include "safeor/envs/inv_mgmt.hpp"
#include "safeor/envs/sched_maint.hpp"
#include "safeor/envs/unit_commitment.hpp"

namespace safeor {

struct EnvEntry {
  std::string name;
  std::string alias;
  std::string override_key;  // empty when the name does not force a variant
  json override_value;
};

inline const std::vector<EnvEntry>& env_registry() {
  static const std::vector<EnvEntry> entries = {
      {"rtn", "RTNEnv", "mode", "rtn"},
      {"stn", "STNEnv", "mode", "stn"},
      {"uc", "UCEnv", "", nullptr},
      {"uc-v0", "UCEnv-v0", "variant", "v0"},
      {"uc-v1", "UCEnv-v1", "variant", "v1"},
      {"gtep", "GTEPEnv", "with_lines", true},
      {"gtep-nolines", "GTEPEnv-nolines", "with_lines", false},
      {"blending", "BlendingEnv", "", nullptr},
      {"blending-prop", "BlendingEnv-prop", "strategy", "prop"},
      {"blending-disable", "BlendingEnv-disable", "strategy", "disable"},
      {"blending-none", "BlendingEnv-none", "strategy", "none"},
      {"inv_mgmt", "InvMgmtEnv", "", nullptr},
      {"grid_storage", "GridStorageEnv", "", nullptr},
      {"sched_maint", "SchedMaintEnv", "", nullptr},
      {"asu", "ASUEnv", "", nullptr},
  };
  return entries;
}

inline std::vector<std::string> env_names() {
  std::vector<std::string> out;
  for (const auto& e : env_registry()) out.push_back(e.name);
  return out;
}

/// Build an environment by registry name or class-style alias. Variant names
/// override the matching key of the config document.
inline std::unique_ptr<Env> make_env(const std::string& name, const json& config) {
  const EnvEntry* entry = nullptr;
  for (const auto& e : env_registry()) {
    if (e.name == name || e.alias == name) entry = &e;
  }
  if (entry == nullptr) throw UnknownEnv(name);
  if (!config.is_object()) throw ConfigError("", "config must be a JSON object");

  json doc = config;
  if (!entry->override_key.empty()) doc[entry->override_key] = entry->override_value;

  const std::string& base = entry->name;
  if (base == "rtn" || base == "stn") return std::make_unique<batch_sched::BatchSchedEnv>(batch_sched::Config::from_json(doc));
  if (base.starts_with("uc")) return std::make_unique<unit_commitment::UnitCommitmentEnv>(unit_commitment::Config::from_json(doc));
  if (base.starts_with("gtep")) return std::make_unique<gtep::GtepEnv>(gtep::Config::from_json(doc));
  if (base.starts_with("blending")) return std::make_unique<blending::BlendingEnv>(blending::Config::from_json(doc));
  if (base == "inv_mgmt") return std::make_unique<inv_mgmt::InvMgmtEnv>(inv_mgmt::Config::from_json(doc));
  if (base == "grid_storage") return std::make_unique<grid_storage::GridStorageEnv>(grid_storage::Config::from_json(doc));
  if (base == "sched_maint") return std::make_unique<sched_maint::SchedMaintEnv>(sched_maint::Config::from_json(doc));
  return std::make_unique<asu::AsuEnv>(asu::Config::from_json(doc));
}

}  // namespace safeor
