#pragma once

#include <cstdlib>
#include <filesystem>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include "janus/detail.hpp"
#include "janus/result.hpp"

namespace janus {

/// Plain key-value configuration with dotted section keys:
///
///   # model backend
///   model.endpoint_url = http://localhost:8000/v1/chat/completions
///   model.temperature = 0.70
///
/// Environment variables override file values (key "model.api_key" maps to
/// JANUS_MODEL_API_KEY), so secrets never need to live in the file.
class Config {
 public:
  Config() = default;

  static Result<Config> load(const std::filesystem::path& path) {
    auto content = detail::read_file(path);
    if (!content.ok()) {
      return make_error(Errc::config_error, "cannot read config: " + path.string());
    }
    return from_string(*content, path.string());
  }

  static Result<Config> from_string(std::string_view text,
                                    const std::string& origin = "<string>") {
    Config cfg;
    std::istringstream in{std::string(text)};
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      std::string t = detail::trim(line);
      if (t.empty() || t[0] == '#') continue;
      size_t eq = t.find('=');
      if (eq == std::string::npos) {
        return make_error(Errc::config_error, origin + ":" + std::to_string(lineno) +
                                                  ": expected key = value");
      }
      std::string key = detail::trim(t.substr(0, eq));
      std::string value = detail::trim(t.substr(eq + 1));
      if (key.empty()) {
        return make_error(Errc::config_error,
                          origin + ":" + std::to_string(lineno) + ": empty key");
      }
      cfg.values_[key] = value;
    }
    return cfg;
  }

  static std::string env_key(std::string_view key) {
    std::string out = "JANUS_";
    for (char c : key) {
      out += (c == '.') ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    }
    return out;
  }

  void set(const std::string& key, const std::string& value) { values_[key] = value; }

  std::optional<std::string> get(std::string_view key) const {
    if (const char* env = std::getenv(env_key(key).c_str())) {
      return std::string(env);
    }
    auto it = values_.find(std::string(key));
    if (it == values_.end()) return std::nullopt;
    return it->second;
  }

  std::string get_or(std::string_view key, std::string_view fallback) const {
    auto v = get(key);
    return v ? *v : std::string(fallback);
  }

  int get_int(std::string_view key, int fallback) const {
    auto v = get(key);
    if (!v) return fallback;
    try {
      return std::stoi(*v);
    } catch (...) {
      return fallback;
    }
  }

  double get_double(std::string_view key, double fallback) const {
    auto v = get(key);
    if (!v) return fallback;
    try {
      return std::stod(*v);
    } catch (...) {
      return fallback;
    }
  }

  bool get_bool(std::string_view key, bool fallback) const {
    auto v = get(key);
    if (!v) return fallback;
    std::string t = detail::to_lower(*v);
    if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
    if (t == "false" || t == "0" || t == "no" || t == "off") return false;
    return fallback;
  }

  bool has(std::string_view key) const { return get(key).has_value(); }

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace janus
