#include "ttscale/eval.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ttscale/parallel.hpp"

namespace ttscale {

Dataset Dataset::load(const std::filesystem::path& path) {
  return {path.stem().string(), load_questions(path)};
}

nlohmann::json EvalOutcome::to_json() const {
  nlohmann::json j = {
      {"id", question_id},
      {"gold", std::string(1, gold)},
      {"extracted", extraction.letter ? nlohmann::json(std::string(1, *extraction.letter))
                                      : nlohmann::json(nullptr)},
      {"method", to_string(extraction.method)},
      {"correct", correct},
      {"thinking_tokens", thinking_tokens},
      {"termination", to_string(transcript.termination)},
      {"failed", failed},
      {"transcript", transcript.to_json()},
  };
  if (!extraction.pattern.empty()) j["pattern"] = extraction.pattern;
  if (failed) j["error"] = error;
  return j;
}

double EvalResult::accuracy() const {
  if (outcomes.empty()) return 0.0;
  return static_cast<double>(correct) / static_cast<double>(outcomes.size());
}

double EvalResult::mean_thinking_tokens() const {
  if (outcomes.empty()) return 0.0;
  std::size_t total = 0;
  for (const auto& o : outcomes) total += o.thinking_tokens;
  return static_cast<double>(total) / static_cast<double>(outcomes.size());
}

namespace {

EvalOutcome grade_transcript(const McqQuestion& q, ReasoningTranscript transcript) {
  EvalOutcome out;
  out.question_id = q.id;
  out.gold = q.gold;
  out.extraction = extract_answer(transcript.answer_text, AnswerChoices::of(q));
  out.correct = grade(out.extraction, q.gold);
  out.thinking_tokens = transcript.thinking_tokens;
  transcript.id = q.id;
  out.transcript = std::move(transcript);
  return out;
}

EvalOutcome failed_outcome(const McqQuestion& q, const BackendError& e,
                           ReasoningTranscript partial) {
  EvalOutcome out;
  out.question_id = q.id;
  out.gold = q.gold;
  out.thinking_tokens = partial.thinking_tokens;
  partial.id = q.id;
  out.transcript = std::move(partial);
  out.failed = true;
  out.error = e.what();
  return out;
}

template <typename Run>
EvalOutcome run_question(const McqQuestion& q, const RetryPolicy& retry, Run&& run) {
  try {
    return grade_transcript(q, with_retries(retry, [&] { return run(); }));
  } catch (const BudgetRunError& e) {
    return failed_outcome(q, e, e.partial());
  } catch (const BackendError& e) {
    return failed_outcome(q, e, {});
  }
}

EvalResult aggregate(const Dataset& dataset, std::vector<EvalOutcome> outcomes) {
  std::sort(outcomes.begin(), outcomes.end(),
            [](const EvalOutcome& a, const EvalOutcome& b) { return a.question_id < b.question_id; });
  EvalResult result;
  result.dataset = dataset.name;
  for (const auto& o : outcomes) {
    result.correct += o.correct ? 1 : 0;
    result.failures += o.failed ? 1 : 0;
  }
  result.outcomes = std::move(outcomes);
  return result;
}

void require_nonempty(const Dataset& dataset) {
  if (dataset.questions.empty()) {
    throw std::invalid_argument("dataset " + dataset.name + " has no questions");
  }
}

}  // namespace

EvalResult evaluate(const Dataset& dataset, const Backend& backend, const BudgetPolicy& policy,
                    const EvalOptions& options) {
  require_nonempty(dataset);
  policy.validate();
  std::vector<EvalOutcome> outcomes(dataset.questions.size());
  parallel_for(dataset.questions.size(), options.workers, [&](std::size_t i) {
    const auto& q = dataset.questions[i];
    const std::string prompt = format_prompt(q, options.instruction);
    outcomes[i] = run_question(q, options.retry, [&] { return run_with_budget(prompt, policy, backend); });
  });
  return aggregate(dataset, std::move(outcomes));
}

double macro_average(const std::vector<double>& percents) {
  return macro_average(percents, std::vector<double>(percents.size(), 1.0));
}

double macro_average(const std::vector<double>& percents, const std::vector<double>& weights) {
  if (percents.empty()) throw std::invalid_argument("macro_average needs at least one dataset");
  if (weights.size() != percents.size()) {
    throw std::invalid_argument("macro_average needs one weight per dataset");
  }
  double sum = 0.0;
  double total_weight = 0.0;
  for (std::size_t i = 0; i < percents.size(); ++i) {
    if (weights[i] < 0.0) throw std::invalid_argument("macro_average weights must be nonnegative");
    sum += percents[i] * weights[i];
    total_weight += weights[i];
  }
  if (total_weight <= 0.0) throw std::invalid_argument("macro_average weights sum to zero");
  return std::round(sum / total_weight * 100.0) / 100.0;
}

std::vector<DataPoint> SweepResult::percent_points() const {
  std::vector<DataPoint> out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back({p.x, p.accuracy * 100.0});
  return out;
}

nlohmann::json SweepResult::to_json() const {
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& p : points) {
    pts.push_back({{"x", p.x},
                   {"accuracy", p.accuracy},
                   {"n", p.n},
                   {"correct", p.correct},
                   {"mean_thinking_tokens", p.mean_thinking_tokens}});
  }
  return {{"dataset", dataset}, {"x_name", x_name}, {"points", pts}};
}

SweepResult SweepResult::from_json(const nlohmann::json& j) {
  SweepResult s;
  s.dataset = j.at("dataset").get<std::string>();
  s.x_name = j.at("x_name").get<std::string>();
  for (const auto& p : j.at("points")) {
    SweepPoint point;
    point.x = p.at("x").get<double>();
    point.n = p.at("n").get<std::size_t>();
    point.correct = p.at("correct").get<std::size_t>();
    point.accuracy = point.n == 0 ? 0.0
                                  : static_cast<double>(point.correct) / static_cast<double>(point.n);
    point.mean_thinking_tokens = p.value("mean_thinking_tokens", 0.0);
    if (point.correct > point.n) throw std::invalid_argument("sweep point has correct > n");
    if (!s.points.empty() && !(s.points.back().x < point.x)) {
      throw std::invalid_argument("sweep points must have strictly increasing x");
    }
    s.points.push_back(point);
  }
  if (s.points.empty()) throw std::invalid_argument("sweep has no points");
  return s;
}

SweepPoint summarize(double x, const EvalResult& result) {
  return {x, result.accuracy(), result.n(), result.correct, result.mean_thinking_tokens()};
}

namespace {

std::vector<std::size_t> sorted_distinct(const std::vector<std::size_t>& values, const char* what) {
  if (values.empty()) throw std::invalid_argument(std::string(what) + " list is empty");
  std::vector<std::size_t> sorted = values;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw std::invalid_argument(std::string(what) + " values must be distinct");
  }
  return sorted;
}

std::vector<EvalResult> truncated_sweep(const Dataset& dataset, const Backend& backend,
                                        const std::vector<std::size_t>& budgets,
                                        const BudgetPolicy& policy, const EvalOptions& options) {
  BudgetPolicy longest = policy;
  longest.thinking_budget = budgets.back();
  longest.validate();

  const std::size_t nq = dataset.questions.size();
  std::vector<std::vector<EvalOutcome>> per_budget(budgets.size(), std::vector<EvalOutcome>(nq));
  parallel_for(nq, options.workers, [&](std::size_t i) {
    const auto& q = dataset.questions[i];
    const std::string prompt = format_prompt(q, options.instruction);
    std::optional<ReasoningTranscript> full;
    per_budget.back()[i] = run_question(q, options.retry, [&] {
      full = run_with_budget(prompt, longest, backend);
      return *full;
    });
    for (std::size_t b = 0; b + 1 < budgets.size(); ++b) {
      if (!full) {
        per_budget[b][i] = per_budget.back()[i];
        continue;
      }
      per_budget[b][i] = run_question(q, options.retry, [&] {
        ReasoningTranscript cut = truncate_to_budget(*full, budgets[b]);
        if (cut.thinking_tokens == full->thinking_tokens) return cut;
        BudgetPolicy at = policy;
        at.thinking_budget = budgets[b];
        return elicit_answer(prompt, std::move(cut), at, backend);
      });
    }
  });

  std::vector<EvalResult> results;
  results.reserve(budgets.size());
  for (auto& outcomes : per_budget) results.push_back(aggregate(dataset, std::move(outcomes)));
  return results;
}

}  // namespace

SweepResult budget_sweep(const Dataset& dataset, const Backend& backend,
                         const std::vector<std::size_t>& budgets, const BudgetPolicy& policy,
                         const SweepOptions& options) {
  require_nonempty(dataset);
  const auto grid = sorted_distinct(budgets, "budget");
  SweepResult sweep{dataset.name, "budget", {}};
  if (options.reuse_truncated) {
    const auto results = truncated_sweep(dataset, backend, grid, policy, options.eval);
    for (std::size_t b = 0; b < grid.size(); ++b) {
      sweep.points.push_back(summarize(static_cast<double>(grid[b]), results[b]));
    }
    return sweep;
  }
  for (const std::size_t budget : grid) {
    BudgetPolicy p = policy;
    p.thinking_budget = budget;
    sweep.points.push_back(summarize(static_cast<double>(budget), evaluate(dataset, backend, p, options.eval)));
  }
  return sweep;
}

SweepResult forcing_sweep(const Dataset& dataset, const Backend& backend, std::size_t max_forcings,
                          const BudgetPolicy& policy, const SweepOptions& options) {
  require_nonempty(dataset);
  SweepResult sweep{dataset.name, "forcing", {}};
  for (std::size_t k = 0; k <= max_forcings; ++k) {
    BudgetPolicy p = policy;
    p.forcing_count = k;
    sweep.points.push_back(summarize(static_cast<double>(k), evaluate(dataset, backend, p, options.eval)));
  }
  return sweep;
}

}  // namespace ttscale
