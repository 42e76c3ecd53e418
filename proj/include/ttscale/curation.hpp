#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "json.hpp"

#include "ttscale/model_client.hpp"
#include "ttscale/question.hpp"
#include "ttscale/text_normalize.hpp"

namespace ttscale {

/// A generated reasoning trace for one question.
struct TraceRecord {
  McqQuestion question;
  std::string thinking;
  std::string response;
  std::optional<char> extracted;
  bool verified = false;

  /// Builds a record and derives `extracted` and `verified` from `response`.
  static TraceRecord from_response(McqQuestion question, std::string thinking,
                                   std::string response);

  [[nodiscard]] nlohmann::json to_json() const;
  /// Rejects records whose `verified` flag disagrees with `extracted`.
  static TraceRecord from_json(const nlohmann::json& j);
};

std::vector<TraceRecord> load_traces(const std::filesystem::path& path);

inline const McqQuestion& question_of(const McqQuestion& q) { return q; }
inline const McqQuestion& question_of(const TraceRecord& r) { return r.question; }

// ---------------------------------------------------------------------------
// Provenance ledger

struct ReportStage {
  std::string name;
  std::map<std::string, std::size_t> counts;  // source dataset -> records
  std::size_t total = 0;
  /// Side rows (alternative samples) are exempt from the monotonicity rule.
  bool sequential = true;

  friend bool operator==(const ReportStage&, const ReportStage&) = default;
};

template <typename Item>
ReportStage count_by_source(std::string name, const std::vector<Item>& items) {
  ReportStage stage{std::move(name), {}, items.size(), true};
  for (const auto& item : items) ++stage.counts[question_of(item).source];
  return stage;
}

/// Stage-by-source record counts, one row per pipeline stage.
class CurationReport {
 public:
  void add_stage(ReportStage stage);
  void set_setting(const std::string& key, const std::string& value);

  [[nodiscard]] const std::vector<ReportStage>& stages() const { return stages_; }
  [[nodiscard]] const std::map<std::string, std::string>& settings() const { return settings_; }
  [[nodiscard]] const ReportStage& stage(const std::string& name) const;

  /// Throws std::logic_error unless every total equals the sum of its
  /// per-source counts and sequential totals never increase.
  void validate() const;

  [[nodiscard]] nlohmann::json to_json() const;
  static CurationReport from_json(const nlohmann::json& j);

  /// Appends the stages of `other` and merges its settings.
  void append(const CurationReport& other);

 private:
  std::vector<ReportStage> stages_;
  std::map<std::string, std::string> settings_;
};

// ---------------------------------------------------------------------------
// Difficulty filtering

class Grader {
 public:
  virtual ~Grader() = default;
  [[nodiscard]] virtual std::string name() const = 0;
  /// True if the grader answers `q` correctly. Must be thread-safe.
  [[nodiscard]] virtual bool solves(const McqQuestion& q) const = 0;
};

/// Grades by asking a backend: format_prompt, probe_answer, extract_answer
/// and grade. Backend failures that survive the retries count as an
/// incorrect answer and are recorded.
class BackendGrader final : public Grader {
 public:
  BackendGrader(std::string name, std::shared_ptr<const Backend> backend,
                GenerationRequest request_template = {}, RetryPolicy retry = {});

  [[nodiscard]] std::string name() const override { return name_; }
  [[nodiscard]] bool solves(const McqQuestion& q) const override;
  [[nodiscard]] std::vector<std::string> failures() const;

 private:
  std::string name_;
  std::shared_ptr<const Backend> backend_;
  GenerationRequest template_;
  RetryPolicy retry_;
  mutable std::mutex mutex_;
  mutable std::vector<std::string> failures_;
};

/// Replays recorded verdicts (question id -> answered correctly).
class RecordedGrader final : public Grader {
 public:
  RecordedGrader(std::string name, std::unordered_map<std::string, bool> verdicts);

  [[nodiscard]] std::string name() const override { return name_; }
  [[nodiscard]] bool solves(const McqQuestion& q) const override;

 private:
  std::string name_;
  std::unordered_map<std::string, bool> verdicts_;
};

/// Loads a verdict file: JSON Lines of {"id": str, "<grader>": bool, ...}.
/// Returns one RecordedGrader per grader column, in column order of the
/// first line.
std::vector<std::shared_ptr<const Grader>> load_recorded_graders(
    const std::filesystem::path& path);

template <typename Item>
struct StageResult {
  std::vector<Item> kept;
  ReportStage row;
};

inline constexpr const char* kStageInitial = "initial_collection";
inline constexpr const char* kStageDifficulty = "difficulty_filtering";
inline constexpr const char* kStageTraces = "thinking_generation";
inline constexpr const char* kStageDecontamination = "decontamination_dedup";
inline constexpr const char* kStageDedup = "deduplication";
inline constexpr const char* kStageSample = "diversity_sample";

/// Keeps the questions that every grader answers incorrectly. Grading fans
/// out over `workers` threads; the kept list preserves pool order.
StageResult<McqQuestion> difficulty_filter(const std::vector<McqQuestion>& pool,
                                           const std::vector<std::shared_ptr<const Grader>>& graders,
                                           std::size_t workers = 1);

// ---------------------------------------------------------------------------
// Trace generation and validation

struct TraceGenerationOptions {
  GenerationRequest request_template;  // max_new_tokens defaults to the 8K ceiling
  /// Separates reasoning from the final response in the raw output.
  std::string think_delimiter = "</think>";
  RetryPolicy retry;
};

/// Prompts the backend with the trace-generation layout and splits the output
/// at `think_delimiter` (all text becomes the response if it is absent).
TraceRecord generate_trace(const Backend& backend, const McqQuestion& q,
                           const TraceGenerationOptions& options = {});

StageResult<TraceRecord> validate_traces(const std::vector<TraceRecord>& records);

// ---------------------------------------------------------------------------
// Decontamination and deduplication

struct DecontaminationOptions {
  std::size_t ngram = kDefaultNgramSize;
};

template <typename Item>
std::vector<Item> deduplicate(const std::vector<Item>& pool) {
  std::unordered_set<std::string> seen;
  std::vector<Item> out;
  for (const auto& item : pool) {
    if (seen.insert(normalize_text(question_of(item).stem)).second) out.push_back(item);
  }
  return out;
}

/// Drops pool items whose normalized stem shares an n-gram window with any
/// evaluation stem, then removes exact duplicates by normalized stem.
template <typename Item>
StageResult<Item> decontaminate(const std::vector<Item>& pool,
                                const std::vector<McqQuestion>& eval_questions,
                                const DecontaminationOptions& options = {}) {
  NgramIndex index(options.ngram);
  for (const auto& q : eval_questions) index.add(q.stem);
  std::vector<Item> clean;
  for (const auto& item : pool) {
    if (!index.overlaps(question_of(item).stem)) clean.push_back(item);
  }
  auto kept = deduplicate(clean);
  auto row = count_by_source(kStageDecontamination, kept);
  return {std::move(kept), std::move(row)};
}

// ---------------------------------------------------------------------------
// Domain annotation

inline constexpr const char* kUnlabeled = "Unlabeled";

/// term -> MeSH qualifier label.
using DomainLexicon = std::map<std::string, std::string>;

DomainLexicon load_lexicon(const std::filesystem::path& path);

/// Replaces each question's domains with the sorted set of qualifiers whose
/// terms occur in the stem on word boundaries (case-insensitive, after
/// normalization); questions with no hit get "Unlabeled".
std::vector<McqQuestion> annotate_domains(std::vector<McqQuestion> questions,
                                          const DomainLexicon& lexicon);

// ---------------------------------------------------------------------------
// SFT formatting

class ContaminationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// prompt, think marker, thinking, answer marker, response -- joined by "\n".
/// Throws std::invalid_argument for unverified records and
/// ContaminationError when any part already contains a marker.
std::string format_sft_example(const TraceRecord& record);

}  // namespace ttscale
