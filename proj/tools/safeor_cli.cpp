#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>
#include <fmt/format.h>
#include <fmt/ranges.h>

#include "safeor/safeor.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;
constexpr int kExitBudget = 3;

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("safeor");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  spdlog::set_level(spdlog::level::warn);
  const char* env = std::getenv("SAFEOR_LOG_LEVEL");
  if (env == nullptr) return;
  const std::string level(env);
  if (level == "error") spdlog::set_level(spdlog::level::err);
  else if (level == "warn") spdlog::set_level(spdlog::level::warn);
  else if (level == "info") spdlog::set_level(spdlog::level::info);
  else if (level == "debug") spdlog::set_level(spdlog::level::debug);
  else spdlog::warn("ignoring SAFEOR_LOG_LEVEL='{}'", level);
}

struct Options {
  std::string env;
  std::string config;
  std::string policy = "zero";
  std::uint64_t seed = 0;
  int episodes = 1;
  int grid_levels = 3;
  int horizon = -1;
  std::string out;
  std::string trace;
};

int cmd_validate(const Options& o) {
  const auto env = safeor::make_env(o.env, safeor::load_config_file(o.config));
  safeor::json j{{"env", std::string(env->name())},
                 {"action_dim", env->action_dim()},
                 {"observation_dim", env->observation_dim()},
                 {"horizon", env->horizon()}};
  std::cout << j.dump(2) << '\n';
  return kExitOk;
}

int cmd_run(const Options& o) {
  safeor::RunSpec spec;
  spec.env = o.env;
  spec.config = safeor::load_config_file(o.config);
  spec.policy = safeor::parse_policy_spec(o.policy, o.seed, o.grid_levels);
  spec.episodes = o.episodes;
  spec.horizon = o.horizon;
  spec.out = o.out;
  spdlog::info("running {} episode(s) of {} with policy {}", o.episodes, o.env, o.policy);
  const auto result = safeor::run(spec);
  std::cout << safeor::to_json(result.summary).dump(2) << '\n';
  if (!o.out.empty()) spdlog::info("traces written to {}", o.out);
  return kExitOk;
}

int cmd_oracle(const Options& o) {
  const auto env = safeor::make_env(o.env, safeor::load_config_file(o.config));
  const int h = o.horizon < 0 ? env->horizon() : o.horizon;
  spdlog::info("enumerating {} sequences", safeor::oracle_count(o.grid_levels, env->action_dim(), h));
  const auto best = safeor::oracle_best(*env, o.grid_levels, h);
  safeor::json j{{"env", std::string(env->name())},
                 {"grid_levels", o.grid_levels},
                 {"horizon", h},
                 {"enumerated", best.enumerated},
                 {"best_return", best.best_return},
                 {"best_cost", best.best_cost},
                 {"actions", best.actions}};
  std::cout << j.dump(2) << '\n';
  return kExitOk;
}

int cmd_replay(const Options& o) {
  const auto env = safeor::make_env(o.env, safeor::load_config_file(o.config));
  const auto recorded = safeor::load_trace_file(o.trace);
  const auto check = safeor::replay_and_compare(*env, recorded);
  if (!o.out.empty()) {
    std::ofstream f(o.out);
    safeor::write_trace(f, check.reproduced);
  }
  safeor::json j{{"env", std::string(env->name())},
                 {"steps", recorded.size()},
                 {"mismatches", check.mismatches},
                 {"return", safeor::episode_return(check.reproduced)},
                 {"cost", safeor::episode_cost(check.reproduced)}};
  std::cout << j.dump(2) << '\n';
  if (check.mismatches != 0) spdlog::error("replay diverged on {} step(s)", check.mismatches);
  return check.mismatches == 0 ? kExitOk : kExitFailure;
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  CLI::App app{"Constrained OR environment harness"};
  app.require_subcommand(1);
  Options o;

  auto add_common = [&o](CLI::App* sub) {
    sub->add_option("--env", o.env, "Environment name")->required();
    sub->add_option("--config", o.config, "Config JSON file")->required()->check(CLI::ExistingFile);
  };

  auto* run = app.add_subcommand("run", "Roll out a baseline policy and write traces");
  add_common(run);
  run->add_option("--policy", o.policy, "zero | random[:seed] | grid[:levels] | replay:<trace>");
  run->add_option("--seed", o.seed, "Seed for the random policy");
  run->add_option("--episodes", o.episodes, "Episode count")->check(CLI::PositiveNumber);
  run->add_option("--grid-levels", o.grid_levels, "Levels for the grid policy")->check(CLI::PositiveNumber);
  run->add_option("--horizon", o.horizon, "Steps per episode (default: env horizon)");
  run->add_option("--out", o.out, "Output directory");

  auto* oracle = app.add_subcommand("oracle", "Exhaustive grid search for the best action sequence");
  add_common(oracle);
  oracle->add_option("--grid-levels", o.grid_levels, "Levels per action component")->check(CLI::PositiveNumber);
  oracle->add_option("--horizon", o.horizon, "Search depth (default: env horizon)");

  auto* validate = app.add_subcommand("validate", "Check a config and print dimensions");
  add_common(validate);

  auto* replay = app.add_subcommand("replay", "Re-run a recorded trace and compare");
  add_common(replay);
  replay->add_option("trace", o.trace, "JSON-Lines trace")->required()->check(CLI::ExistingFile);
  replay->add_option("--out", o.out, "Write the reproduced trace here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*run) return cmd_run(o);
    if (*oracle) return cmd_oracle(o);
    if (*validate) return cmd_validate(o);
    return cmd_replay(o);
  } catch (const safeor::BudgetExceeded& e) {
    spdlog::error("{}", e.what());
    return kExitBudget;
  } catch (const safeor::ConfigError& e) {
    spdlog::error("config error: {}", e.what());
    return kExitConfig;
  } catch (const safeor::UnknownEnv& e) {
    spdlog::error("{} (known: {})", e.what(), fmt::join(safeor::env_names(), ", "));
    return kExitConfig;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kExitFailure;
  }
}
