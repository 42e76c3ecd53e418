#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "ttscale/budget_controller.hpp"
#include "ttscale/eval.hpp"

namespace ttscale {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Effective run configuration.
///
/// File format: "[section]" headers followed by "key = value" lines; "#" and
/// ";" start comments. A value may be written as a JSON string literal to keep
/// surrounding spaces. Every key "section.key" also exists as the flag
/// "--key" with underscores replaced by dashes.
struct Config {
  // [backend]
  std::string base_url = "http://127.0.0.1:30000";
  std::string model = "default";
  // [sampling]
  double temperature = kDefaultTemperature;
  std::uint64_t seed = kDefaultSeed;
  // [policy]
  std::size_t thinking_budget = kDefaultThinkingBudget;
  std::size_t forcing_count = 0;
  std::size_t per_forcing_cap = kDefaultPerForcingCap;
  std::string forcing_text = kDefaultForcingText;
  std::optional<std::size_t> forced_total_cap;
  std::size_t answer_max_tokens = 1024;
  // [run]
  std::size_t workers = kDefaultWorkers;
  int max_retries = 2;
  // [paths]
  std::string dataset;
  std::string mock;
  std::string output;

  /// Canonical "section.key" names in file order.
  static const std::vector<std::string>& keys();

  /// Sets one key from its textual value; throws ConfigError for unknown keys
  /// and unparseable values.
  void set(const std::string& key, const std::string& value);

  [[nodiscard]] BudgetPolicy policy() const;
  [[nodiscard]] nlohmann::json to_json() const;
};

/// "--thinking-budget" style flag for a canonical key.
std::string flag_for_key(const std::string& key);

/// Parses config text into ordered (key, value) assignments, rejecting
/// unknown keys with the file name and line number.
std::vector<std::pair<std::string, std::string>> parse_config_text(const std::string& text,
                                                                   const std::string& origin);

/// Defaults, then the file (if any), then the environment (M1_BASE_URL), then
/// flags keyed by canonical name.
Config load_config(const std::optional<std::filesystem::path>& path,
                   const std::map<std::string, std::string>& env,
                   const std::map<std::string, std::string>& flags);

/// The relevant variables of the process environment.
std::map<std::string, std::string> process_env();

}  // namespace ttscale
