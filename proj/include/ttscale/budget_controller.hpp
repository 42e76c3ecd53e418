#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "ttscale/model_client.hpp"

namespace ttscale {

inline constexpr std::size_t kDefaultThinkingBudget = 4096;
inline constexpr std::size_t kDefaultPerForcingCap = 2048;
inline constexpr const char* kDefaultForcingText = "Wait.";
inline constexpr const char* kThinkMarker = "<|im_start|>think";
inline constexpr const char* kAnswerMarker = "<|im_start|>answer";

/// How much a model may think, and how often it is pushed to keep thinking.
struct BudgetPolicy {
  /// Model-emitted tokens allowed in the initial thinking segment.
  std::size_t thinking_budget = kDefaultThinkingBudget;
  /// Number of times an early end-of-think is replaced by `forcing_text`.
  std::size_t forcing_count = 0;
  std::string forcing_text = kDefaultForcingText;
  /// Token cap for each forced continuation.
  std::size_t per_forcing_cap = kDefaultPerForcingCap;
  /// Optional cap on all forced continuations together.
  std::optional<std::size_t> forced_total_cap;

  /// Opens the thinking phase; appended after the prompt. May be empty.
  std::string think_marker = kThinkMarker;
  /// Emitted by the model when it stops thinking.
  std::string end_of_think_marker = kAnswerMarker;
  /// Appended after the end-of-think marker when thinking is cut off.
  std::string answer_cue = "\nFinal Answer:";
  std::size_t answer_max_tokens = 1024;

  double temperature = kDefaultTemperature;
  std::uint64_t seed = kDefaultSeed;

  /// Throws std::invalid_argument when a field is out of range.
  void validate() const;
};

/// Where a thinking segment came from: index 0 is the model's initial
/// thought, index i > 0 the continuation after the i-th injection.
struct Provenance {
  std::size_t forced_index = 0;

  [[nodiscard]] bool initial() const { return forced_index == 0; }
  [[nodiscard]] std::string str() const;
  static Provenance parse(std::string_view text);

  friend bool operator==(const Provenance&, const Provenance&) = default;
};

struct ThinkingSegment {
  Provenance provenance;
  std::vector<std::string> tokens;

  [[nodiscard]] std::string text() const;
  friend bool operator==(const ThinkingSegment&, const ThinkingSegment&) = default;
};

enum class Termination { natural, budget_exhausted, forcing_exhausted };

std::string_view to_string(Termination termination);
Termination parse_termination(std::string_view text);

struct ReasoningTranscript {
  std::string id;
  std::vector<ThinkingSegment> segments;
  std::size_t injections = 0;
  /// Model-emitted thinking tokens; injected forcing text is not counted.
  std::size_t thinking_tokens = 0;
  std::string answer_text;
  Termination termination = Termination::natural;
  /// Set when the answer phase produced no text.
  bool empty_answer = false;

  /// Throws std::logic_error if the structural invariants do not hold.
  void check_invariants() const;

  [[nodiscard]] nlohmann::json to_json() const;
  static ReasoningTranscript from_json(const nlohmann::json& j);
};

/// A backend failure during a budgeted run, with everything streamed so far.
class BudgetRunError : public BackendError {
 public:
  BudgetRunError(const BackendError& cause, ReasoningTranscript partial);
  [[nodiscard]] const ReasoningTranscript& partial() const { return partial_; }

 private:
  ReasoningTranscript partial_;
};

/// Streams a budgeted, optionally forced, chain of thought followed by an
/// answer.
///
/// Thinking starts after `think_marker`. When the model emits the
/// end-of-think marker while the thinking total is below `thinking_budget`
/// and injections remain, the marker is dropped, `forcing_text` is appended
/// and at most `per_forcing_cap` more tokens are streamed. A segment that
/// hits its cap is cut and the marker plus `answer_cue` are appended.
/// Finally the answer is streamed with no stop marker.
ReasoningTranscript run_with_budget(std::string_view prompt, const BudgetPolicy& policy,
                                    const Backend& backend);

/// Cuts a transcript down to `budget` thinking tokens, keeping segment order.
/// If anything was cut the answer is cleared and termination becomes
/// budget_exhausted.
ReasoningTranscript truncate_to_budget(const ReasoningTranscript& transcript, std::size_t budget);

/// The assistant-side text of a transcript's thinking phase: think marker,
/// segments and the forcing text in front of each forced segment.
std::string thinking_context(const ReasoningTranscript& transcript, const BudgetPolicy& policy);

/// Re-asks for the answer of a (typically truncated) transcript.
ReasoningTranscript elicit_answer(std::string_view prompt, ReasoningTranscript transcript,
                                  const BudgetPolicy& policy, const Backend& backend);

}  // namespace ttscale
