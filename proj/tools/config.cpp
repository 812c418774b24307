#include "config.hpp"

#include <fstream>

namespace robovis::cli {

Config Config::load(const std::string& path) {
  Config c;
  if (path.empty()) return c;
  std::ifstream in(path);
  if (!in) throw Error("cannot open config " + path);
  try {
    c.root_ = nlohmann::json::parse(in, nullptr, true, true);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError("config " + path + ": " + e.what());
  }
  if (!c.root_.is_object()) throw FormatError("config " + path + " must be a JSON object");
  return c;
}

void Config::set(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw InvalidArgument("override must look like key=value: " + assignment);
  const std::string key = assignment.substr(0, eq), text = assignment.substr(eq + 1);
  nlohmann::json value = nlohmann::json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;
  root_[pointer(key)] = value;
}

nlohmann::json::json_pointer Config::pointer(const std::string& path) {
  std::string p = "/";
  for (char ch : path) p += ch == '.' ? '/' : ch;
  return nlohmann::json::json_pointer(p);
}

void Config::check(const nlohmann::json& node, const std::string& prefix) const {
  if (!prefix.empty() && used_.count(prefix)) return;
  if (!node.is_object() || (node.empty() && !prefix.empty())) {
    throw InvalidArgument("unknown config key '" + prefix + "'");
  }
  for (const auto& [k, v] : node.items()) check(v, prefix.empty() ? k : prefix + "." + k);
}

void Config::finish() const { check(root_, ""); }

}  // namespace robovis::cli
