#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

namespace ttscale {

/// Option letter -> option text. Letters run consecutively from 'A'.
using OptionMap = std::map<char, std::string>;

struct McqQuestion {
  std::string id;
  std::string stem;
  OptionMap options;
  char gold = 'A';
  std::string source;
  std::vector<std::string> domains;

  /// Throws std::invalid_argument naming the violated rule.
  void validate() const;

  [[nodiscard]] std::vector<char> letters() const;

  [[nodiscard]] nlohmann::json to_json() const;
  static McqQuestion from_json(const nlohmann::json& j);

  friend bool operator==(const McqQuestion&, const McqQuestion&) = default;
};

/// Reported with the 1-based line number of the offending JSONL line.
class SchemaError : public std::runtime_error {
 public:
  SchemaError(std::string file, std::size_t line, const std::string& what);
  [[nodiscard]] std::size_t line() const noexcept { return line_; }
  [[nodiscard]] const std::string& file() const noexcept { return file_; }

 private:
  std::string file_;
  std::size_t line_;
};

/// Key that marks a provenance header line in JSONL outputs; readers skip it.
inline constexpr const char* kMetaKey = "_meta";

/// Calls `fn(json, line_number)` for each non-blank, non-header line.
/// Parse failures and exceptions thrown by `fn` become SchemaErrors.
void for_each_jsonl(const std::filesystem::path& path,
                    const std::function<void(const nlohmann::json&, std::size_t)>& fn);

/// Reads and validates a question file; ids must be unique.
std::vector<McqQuestion> load_questions(const std::filesystem::path& path);

/// Warnings for questions that are valid but probably malformed.
std::vector<std::string> lint_question(const McqQuestion& q);

}  // namespace ttscale
