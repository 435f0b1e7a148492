#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>

namespace safeor {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Non-finite or otherwise unusable action component.
class InvalidAction : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  DimensionMismatch(std::size_t expected, std::size_t got)
      : Error("action dimension mismatch: expected " + std::to_string(expected) +
              ", got " + std::to_string(got)),
        expected_(expected),
        got_(got) {}

  std::size_t expected() const noexcept { return expected_; }
  std::size_t got() const noexcept { return got_; }

 private:
  std::size_t expected_;
  std::size_t got_;
};

class EpisodeFinished : public Error {
 public:
  EpisodeFinished() : Error("step called on a finished episode; call reset()") {}
};

/// Config document failed validation. `path()` names the offending field,
/// e.g. "generators[2].pmax".
class ConfigError : public Error {
 public:
  ConfigError(std::string path, const std::string& what)
      : Error(path.empty() ? what : path + ": " + what), path_(std::move(path)) {}

  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

class UnknownEnv : public Error {
 public:
  explicit UnknownEnv(const std::string& name) : Error("unknown environment '" + name + "'") {}
};

/// Exhaustive search would exceed its enumeration budget.
class BudgetExceeded : public Error {
 public:
  BudgetExceeded(double count, double budget)
      : Error("enumeration of " + std::to_string(count) + " sequences exceeds budget " +
              std::to_string(budget)),
        count_(count) {}

  double count() const noexcept { return count_; }

 private:
  double count_;
};

}  // namespace safeor
