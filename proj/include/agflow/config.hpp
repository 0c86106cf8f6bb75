#pragma once

#include <json.hpp>

#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace agflow {

/// Raised for malformed or inconsistent run configuration (CLI exit code 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One experiment run. The config document is JSON: a single structured
/// key/value text file; the master seed is mandatory so no run ever depends
/// on wall-clock state.
struct RunConfig {
  std::string experiment;
  std::uint64_t master_seed = 0;
  int workers = 1;
  std::string out_dir = ".";
  nlohmann::json params;  // experiment-specific block
  nlohmann::json raw;     // full document, echoed into the report
};

inline RunConfig parse_run_config(const nlohmann::json& doc) {
  RunConfig cfg;
  cfg.raw = doc;
  if (!doc.is_object()) throw ConfigError("config: document must be a JSON object");
  if (!doc.contains("experiment") || !doc["experiment"].is_string())
    throw ConfigError("config: missing string field 'experiment'");
  cfg.experiment = doc["experiment"].get<std::string>();
  const bool seed_ok =
      doc.contains("master_seed") &&
      (doc["master_seed"].is_number_unsigned() ||
       (doc["master_seed"].is_number_integer() && doc["master_seed"].get<std::int64_t>() >= 0));
  if (!seed_ok)
    throw ConfigError(
        "config: missing non-negative integer 'master_seed' (wall-clock seeding is not supported)");
  cfg.master_seed = doc["master_seed"].get<std::uint64_t>();
  if (doc.contains("workers")) {
    if (!doc["workers"].is_number_integer() || doc["workers"].get<int>() < 1)
      throw ConfigError("config: 'workers' must be a positive integer");
    cfg.workers = doc["workers"].get<int>();
  }
  if (doc.contains("out_dir")) cfg.out_dir = doc["out_dir"].get<std::string>();
  cfg.params = doc.contains("params") ? doc["params"] : nlohmann::json::object();
  if (!cfg.params.is_object()) throw ConfigError("config: 'params' must be an object");
  return cfg;
}

inline RunConfig load_run_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("config: cannot open " + path);
  nlohmann::json doc;
  try {
    f >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: parse error: ") + e.what());
  }
  return parse_run_config(doc);
}

// typed accessors with config-error reporting

inline double require_number(const nlohmann::json& obj, const std::string& key) {
  if (!obj.contains(key) || !obj[key].is_number())
    throw ConfigError("config: missing numeric field '" + key + "'");
  return obj[key].get<double>();
}

inline double number_or(const nlohmann::json& obj, const std::string& key, double fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number()) throw ConfigError("config: field '" + key + "' must be numeric");
  return obj[key].get<double>();
}

inline std::int64_t require_integer(const nlohmann::json& obj, const std::string& key) {
  if (!obj.contains(key) || !obj[key].is_number_integer())
    throw ConfigError("config: missing integer field '" + key + "'");
  return obj[key].get<std::int64_t>();
}

inline std::int64_t integer_or(const nlohmann::json& obj, const std::string& key,
                               std::int64_t fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number_integer())
    throw ConfigError("config: field '" + key + "' must be an integer");
  return obj[key].get<std::int64_t>();
}

inline std::vector<int> require_int_list(const nlohmann::json& obj, const std::string& key) {
  if (!obj.contains(key) || !obj[key].is_array() || obj[key].empty())
    throw ConfigError("config: missing non-empty integer array '" + key + "'");
  std::vector<int> out;
  for (const auto& v : obj[key]) {
    if (!v.is_number_integer()) throw ConfigError("config: '" + key + "' must hold integers");
    out.push_back(v.get<int>());
  }
  return out;
}

inline std::string string_or(const nlohmann::json& obj, const std::string& key,
                             const std::string& fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_string()) throw ConfigError("config: field '" + key + "' must be a string");
  return obj[key].get<std::string>();
}

}  // namespace agflow
