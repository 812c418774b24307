#pragma once

#include <set>
#include <string>

#include "json.hpp"
#include "robovis/error.hpp"

namespace robovis::cli {

/// JSON configuration with dotted-path access. Every key in the file must be
/// read by the command, so misspelled keys fail instead of being ignored.
class Config {
 public:
  static Config load(const std::string& path);

  /// "a.b=value"; value is parsed as JSON when possible, otherwise taken as a string.
  void set(const std::string& assignment);

  bool has(const std::string& path) const { return root_.contains(pointer(path)); }

  template <typename T>
  T get(const std::string& path, const T& fallback) {
    used_.insert(path);
    const auto p = pointer(path);
    if (!root_.contains(p)) return fallback;
    try {
      return root_.at(p).get<T>();
    } catch (const nlohmann::json::exception&) {
      throw InvalidArgument("config key '" + path + "' has the wrong type");
    }
  }

  template <typename T>
  T require(const std::string& path) {
    if (!has(path)) throw InvalidArgument("missing config key '" + path + "'");
    return get<T>(path, T{});
  }

  /// Throws InvalidArgument naming the first key no getter asked for.
  void finish() const;

 private:
  static nlohmann::json::json_pointer pointer(const std::string& path);
  void check(const nlohmann::json& node, const std::string& prefix) const;

  nlohmann::json root_ = nlohmann::json::object();
  std::set<std::string> used_;
};

}  // namespace robovis::cli
