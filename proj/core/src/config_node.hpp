#pragma once

#include <algorithm>
#include <initializer_list>
#include <string>

#include <nlohmann/json.hpp>

#include "locstat/harness.hpp"

namespace locstat::detail {

using nlohmann::json;

/// Typed access to one JSON object with unknown-key rejection.
class Node {
 public:
  Node(const json& j, std::string pointer, std::initializer_list<const char*> allowed)
      : j_(j), ptr_(std::move(pointer)) {
    if (!j_.is_object()) throw ConfigError(ptr_, "expected a mapping");
    for (const auto& [key, _] : j_.items()) {
      if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
        throw ConfigError(ptr_ + "/" + key, "unknown key");
      }
    }
  }

  [[nodiscard]] bool has(const char* key) const { return j_.contains(key); }
  [[nodiscard]] std::string at(const char* key) const { return ptr_ + "/" + key; }
  [[nodiscard]] const json& raw(const char* key) const {
    if (!has(key)) throw ConfigError(at(key), "required key is missing");
    return j_.at(key);
  }

  [[nodiscard]] double number(const char* key) const {
    const json& v = raw(key);
    if (!v.is_number()) throw ConfigError(at(key), "expected a number");
    return v.get<double>();
  }
  [[nodiscard]] double number(const char* key, double fallback) const { return has(key) ? number(key) : fallback; }

  [[nodiscard]] std::size_t count(const char* key) const {
    const json& v = raw(key);
    if (!v.is_number_integer() || v.get<long long>() < 0) throw ConfigError(at(key), "expected a non-negative integer");
    return v.get<std::size_t>();
  }
  [[nodiscard]] std::size_t count(const char* key, std::size_t fallback) const {
    return has(key) ? count(key) : fallback;
  }

  [[nodiscard]] std::string text(const char* key) const {
    const json& v = raw(key);
    if (!v.is_string()) throw ConfigError(at(key), "expected a string");
    return v.get<std::string>();
  }
  [[nodiscard]] std::string text(const char* key, const std::string& fallback) const {
    return has(key) ? text(key) : fallback;
  }

  [[nodiscard]] bool flag(const char* key, bool fallback) const {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_boolean()) throw ConfigError(at(key), "expected true or false");
    return v.get<bool>();
  }

  [[nodiscard]] Polynomial poly(const char* key, double fallback) const {
    if (!has(key)) return Polynomial::constant(fallback);
    const json& v = j_.at(key);
    if (v.is_number()) return Polynomial::constant(v.get<double>());
    if (!v.is_array() || v.empty()) throw ConfigError(at(key), "expected a number or a coefficient list");
    std::vector<double> c;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) throw ConfigError(at(key) + "/" + std::to_string(i), "expected a number");
      c.push_back(v[i].get<double>());
    }
    return Polynomial(std::move(c));
  }

 private:
  const json& j_;
  std::string ptr_;
};

}  // namespace locstat::detail
