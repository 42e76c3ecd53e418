#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "ttscale/model_client.hpp"

namespace ttscale {

/// Makes a script entry fail instead of (or partway through) emitting.
struct ScriptedFailure {
  BackendErrorKind kind = BackendErrorKind::connection;
  std::size_t after = 0;  // chunks emitted before the failure
  int status = 0;         // only for BackendErrorKind::status
};

/// One rule of a scripted model. An entry matches a context when the context
/// ends with any of `suffixes` (or `suffixes` is empty) and contains every
/// string in `contains`.
struct ScriptEntry {
  std::vector<std::string> suffixes;
  std::vector<std::string> contains;
  std::vector<std::string> emission;
  std::optional<std::string> terminal_marker;
  std::optional<ScriptedFailure> failure;

  [[nodiscard]] bool matches(std::string_view context) const;
};

/// Deterministic stand-in for a model server. The context of a request
/// (prompt followed by continuation) selects the first matching entry, whose
/// emission is replayed chunk by chunk, followed by its terminal marker.
/// Sampling parameters are ignored. A context that matches nothing produces
/// an empty stream.
///
/// Script JSON:
///   {"entries": [{"suffix": str | [str], "contains": str | [str],
///                 "emit": str | [str], "terminal_marker": str,
///                 "error": {"kind": str, "after": int, "status": int}}]}
/// A string `emit` is split into whitespace units; an array is used verbatim.
class ScriptedModel final : public Backend {
 public:
  explicit ScriptedModel(std::vector<ScriptEntry> script);

  static ScriptedModel from_json(const nlohmann::json& doc);
  static ScriptedModel load(const std::filesystem::path& path);

  /// Splits text into units of leading whitespace plus one non-whitespace
  /// run, so that concatenating the units reproduces the text up to trailing
  /// whitespace.
  static std::vector<std::string> tokenize(std::string_view text);

  [[nodiscard]] const ScriptEntry* match(std::string_view context) const;
  [[nodiscard]] const std::vector<ScriptEntry>& script() const { return script_; }

  [[nodiscard]] std::string name() const override { return "scripted"; }
  void generate(const GenerationRequest& request, const ChunkSink& sink) const override;

 private:
  std::vector<ScriptEntry> script_;
};

}  // namespace ttscale
