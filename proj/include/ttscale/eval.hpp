#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "ttscale/answer.hpp"
#include "ttscale/budget_controller.hpp"
#include "ttscale/prompt.hpp"
#include "ttscale/question.hpp"
#include "ttscale/regression.hpp"

namespace ttscale {

inline constexpr std::size_t kDefaultWorkers = 8;

struct Dataset {
  std::string name;
  std::vector<McqQuestion> questions;

  /// Named after the file stem.
  static Dataset load(const std::filesystem::path& path);
};

struct EvalOptions {
  std::string instruction{kDefaultInstruction};
  std::size_t workers = kDefaultWorkers;
  RetryPolicy retry;
};

struct EvalOutcome {
  std::string question_id;
  char gold = 'A';
  ReasoningTranscript transcript;
  ExtractionOutcome extraction;
  bool correct = false;
  std::size_t thinking_tokens = 0;
  /// Backend failed after all retries; counted as incorrect.
  bool failed = false;
  std::string error;

  [[nodiscard]] nlohmann::json to_json() const;
};

struct EvalResult {
  std::string dataset;
  /// Sorted by question id.
  std::vector<EvalOutcome> outcomes;
  std::size_t correct = 0;
  std::size_t failures = 0;

  [[nodiscard]] std::size_t n() const { return outcomes.size(); }
  [[nodiscard]] double accuracy() const;
  [[nodiscard]] double mean_thinking_tokens() const;
};

/// Formats, runs, extracts and grades every question with up to
/// `options.workers` questions in flight. Results do not depend on
/// completion order.
EvalResult evaluate(const Dataset& dataset, const Backend& backend, const BudgetPolicy& policy,
                    const EvalOptions& options = {});

/// Unweighted mean of per-dataset accuracies in percent, rounded to 2 decimals.
double macro_average(const std::vector<double>& percents);
/// Weighted variant, e.g. by question count.
double macro_average(const std::vector<double>& percents, const std::vector<double>& weights);

struct SweepPoint {
  /// Thinking budget or forcing count.
  double x = 0.0;
  /// Fraction in [0, 1]; always correct / n.
  double accuracy = 0.0;
  std::size_t n = 0;
  std::size_t correct = 0;
  double mean_thinking_tokens = 0.0;

  friend bool operator==(const SweepPoint&, const SweepPoint&) = default;
};

struct SweepResult {
  std::string dataset;
  /// "budget" or "forcing".
  std::string x_name;
  /// Sorted by x; x values are distinct.
  std::vector<SweepPoint> points;

  /// (x, accuracy in percent) pairs for regression.
  [[nodiscard]] std::vector<DataPoint> percent_points() const;

  [[nodiscard]] nlohmann::json to_json() const;
  static SweepResult from_json(const nlohmann::json& j);

  friend bool operator==(const SweepResult&, const SweepResult&) = default;
};

SweepPoint summarize(double x, const EvalResult& result);

inline const std::vector<std::size_t> kDefaultBudgetGrid = {512, 1024, 2048, 4096, 8192};

/// Off by default. When on, each question is generated once at the largest
/// budget and every smaller budget reuses a truncated copy whose answer is
/// re-elicited. This approximates, but does not equal, separate runs.
struct SweepOptions {
  EvalOptions eval;
  bool reuse_truncated = false;
};

/// One evaluation per budget with `thinking_budget` substituted.
SweepResult budget_sweep(const Dataset& dataset, const Backend& backend,
                         const std::vector<std::size_t>& budgets, const BudgetPolicy& policy,
                         const SweepOptions& options = {});

/// One evaluation per forcing count in 0..max_forcings.
SweepResult forcing_sweep(const Dataset& dataset, const Backend& backend, std::size_t max_forcings,
                          const BudgetPolicy& policy, const SweepOptions& options = {});

}  // namespace ttscale
