#pragma once

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "safeor/core.hpp"
#include "safeor/errors.hpp"

namespace safeor {

using json = nlohmann::json;

/// Read-only cursor into a config document that remembers its path, so every
/// validation failure can name the exact field.
class Field {
 public:
  Field(const json& node, std::string path) : node_(&node), path_(std::move(path)) {}

  const std::string& path() const { return path_; }
  const json& raw() const { return *node_; }

  bool has(std::string_view key) const {
    return node_->is_object() && node_->contains(std::string(key));
  }

  Field operator[](std::string_view key) const {
    if (!node_->is_object()) fail("expected an object");
    const auto it = node_->find(std::string(key));
    const std::string child = path_.empty() ? std::string(key) : path_ + "." + std::string(key);
    if (it == node_->end()) throw ConfigError(child, "missing required field");
    return Field(*it, child);
  }

  Field operator[](std::size_t i) const {
    if (!node_->is_array()) fail("expected an array");
    if (i >= node_->size()) fail("index " + std::to_string(i) + " out of range");
    return Field((*node_)[i], path_ + "[" + std::to_string(i) + "]");
  }

  std::size_t size() const {
    if (!node_->is_array() && !node_->is_object()) fail("expected an array or object");
    return node_->size();
  }

  std::vector<Field> items() const {
    if (!node_->is_array()) fail("expected an array");
    std::vector<Field> out;
    out.reserve(node_->size());
    for (std::size_t i = 0; i < node_->size(); ++i) out.push_back((*this)[i]);
    return out;
  }

  std::vector<std::string> keys() const {
    if (!node_->is_object()) fail("expected an object");
    std::vector<std::string> out;
    for (const auto& [k, v] : node_->items()) out.push_back(k);
    return out;
  }

  double number() const {
    if (!node_->is_number()) fail("expected a number");
    const double v = node_->get<double>();
    if (!std::isfinite(v)) fail("expected a finite number");
    return v;
  }

  double number(double lo, double hi) const {
    const double v = number();
    if (v < lo || v > hi) {
      fail("value " + std::to_string(v) + " outside [" + std::to_string(lo) + ", " +
           std::to_string(hi) + "]");
    }
    return v;
  }

  double nonneg() const { return number(0.0, HUGE_VAL); }

  long long integer() const {
    if (node_->is_number_integer()) return node_->get<long long>();
    if (node_->is_number_float()) {
      const double v = node_->get<double>();
      if (std::isfinite(v) && v == std::floor(v)) return static_cast<long long>(v);
    }
    fail("expected an integer");
  }

  long long integer(long long lo, long long hi) const {
    const long long v = integer();
    if (v < lo || v > hi) {
      fail("value " + std::to_string(v) + " outside [" + std::to_string(lo) + ", " +
           std::to_string(hi) + "]");
    }
    return v;
  }

  bool boolean() const {
    if (!node_->is_boolean()) fail("expected true or false");
    return node_->get<bool>();
  }

  std::string str() const {
    if (!node_->is_string()) fail("expected a string");
    return node_->get<std::string>();
  }

  std::vector<double> numbers() const {
    std::vector<double> out;
    for (const auto& f : items()) out.push_back(f.number());
    return out;
  }

  Bounds bounds() const {
    if (!node_->is_array() || node_->size() != 2) fail("expected [lo, hi]");
    const Bounds b{(*this)[0].number(), (*this)[1].number()};
    if (b.lo > b.hi) fail("lower bound exceeds upper bound");
    return b;
  }

  double number_or(std::string_view key, double fallback) const {
    return has(key) ? (*this)[key].number() : fallback;
  }
  long long integer_or(std::string_view key, long long fallback) const {
    return has(key) ? (*this)[key].integer() : fallback;
  }
  bool boolean_or(std::string_view key, bool fallback) const {
    return has(key) ? (*this)[key].boolean() : fallback;
  }
  std::string str_or(std::string_view key, std::string fallback) const {
    return has(key) ? (*this)[key].str() : std::move(fallback);
  }

  [[noreturn]] void fail(const std::string& what) const { throw ConfigError(path_, what); }

 private:
  const json* node_;
  std::string path_;
};

inline json parse_config_text(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("", std::string("malformed JSON: ") + e.what());
  }
}

inline json load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

/// Index of `name` in `names`, or a config error at `where`.
inline std::size_t index_of(const std::vector<std::string>& names, const std::string& name,
                            const Field& where) {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return i;
  }
  where.fail("unknown reference '" + name + "'");
}

}  // namespace safeor
