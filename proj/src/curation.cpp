#include "ttscale/curation.hpp"

#include <fstream>
#include <iostream>
#include <set>

#include "ttscale/answer.hpp"
#include "ttscale/budget_controller.hpp"
#include "ttscale/parallel.hpp"
#include "ttscale/prompt.hpp"

namespace ttscale {

TraceRecord TraceRecord::from_response(McqQuestion question, std::string thinking,
                                       std::string response) {
  TraceRecord r{std::move(question), std::move(thinking), std::move(response), std::nullopt, false};
  r.extracted = extract_answer(r.response, AnswerChoices::of(r.question)).letter;
  r.verified = r.extracted == r.question.gold;
  return r;
}

nlohmann::json TraceRecord::to_json() const {
  auto j = question.to_json();
  j["thinking"] = thinking;
  j["response"] = response;
  j["extracted"] = extracted ? nlohmann::json(std::string(1, *extracted)) : nlohmann::json();
  j["verified"] = verified;
  return j;
}

TraceRecord TraceRecord::from_json(const nlohmann::json& j) {
  TraceRecord r;
  r.question = McqQuestion::from_json(j);
  r.thinking = j.value("thinking", std::string());
  r.response = j.value("response", std::string());
  if (j.contains("extracted") && !j.at("extracted").is_null()) {
    const auto letter = j.at("extracted").get<std::string>();
    if (letter.size() != 1) throw std::invalid_argument("extracted must be a single letter");
    r.extracted = letter[0];
  }
  r.verified = r.extracted == r.question.gold;
  if (j.contains("verified") && j.at("verified").get<bool>() != r.verified) {
    throw std::invalid_argument("verified flag disagrees with extracted answer");
  }
  return r;
}

std::vector<TraceRecord> load_traces(const std::filesystem::path& path) {
  std::vector<TraceRecord> out;
  for_each_jsonl(path, [&](const nlohmann::json& j, std::size_t) {
    out.push_back(TraceRecord::from_json(j));
  });
  return out;
}

// ---------------------------------------------------------------------------

void CurationReport::add_stage(ReportStage stage) { stages_.push_back(std::move(stage)); }

void CurationReport::set_setting(const std::string& key, const std::string& value) {
  settings_[key] = value;
}

const ReportStage& CurationReport::stage(const std::string& name) const {
  for (const auto& s : stages_) {
    if (s.name == name) return s;
  }
  throw std::out_of_range("no report stage named " + name);
}

void CurationReport::validate() const {
  std::optional<std::size_t> previous;
  for (const auto& s : stages_) {
    std::size_t sum = 0;
    for (const auto& [_, n] : s.counts) sum += n;
    if (sum != s.total) {
      throw std::logic_error("stage " + s.name + ": total " + std::to_string(s.total) +
                             " != per-source sum " + std::to_string(sum));
    }
    if (!s.sequential) continue;
    if (previous && s.total > *previous) {
      throw std::logic_error("stage " + s.name + " has more records than the stage before it");
    }
    previous = s.total;
  }
}

nlohmann::json CurationReport::to_json() const {
  std::set<std::string> sources;
  for (const auto& s : stages_) {
    for (const auto& [source, _] : s.counts) sources.insert(source);
  }
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& s : stages_) {
    nlohmann::json counts = nlohmann::json::object();
    for (const auto& source : sources) {
      const auto it = s.counts.find(source);
      counts[source] = it == s.counts.end() ? 0 : it->second;
    }
    rows.push_back({{"stage", s.name},
                    {"counts", std::move(counts)},
                    {"total", s.total},
                    {"sequential", s.sequential}});
  }
  return {{"sources", sources}, {"stages", std::move(rows)}, {"settings", settings_}};
}

CurationReport CurationReport::from_json(const nlohmann::json& j) {
  CurationReport report;
  for (const auto& row : j.at("stages")) {
    ReportStage s;
    s.name = row.at("stage").get<std::string>();
    s.counts = row.at("counts").get<std::map<std::string, std::size_t>>();
    s.total = row.at("total").get<std::size_t>();
    s.sequential = row.value("sequential", true);
    report.add_stage(std::move(s));
  }
  if (j.contains("settings")) {
    report.settings_ = j.at("settings").get<std::map<std::string, std::string>>();
  }
  return report;
}

void CurationReport::append(const CurationReport& other) {
  for (const auto& s : other.stages_) stages_.push_back(s);
  for (const auto& [k, v] : other.settings_) settings_[k] = v;
}

// ---------------------------------------------------------------------------

BackendGrader::BackendGrader(std::string name, std::shared_ptr<const Backend> backend,
                             GenerationRequest request_template, RetryPolicy retry)
    : name_(std::move(name)),
      backend_(std::move(backend)),
      template_(std::move(request_template)),
      retry_(retry) {}

bool BackendGrader::solves(const McqQuestion& q) const {
  try {
    const auto text =
        with_retries(retry_, [&] { return probe_answer(*backend_, format_prompt(q), template_); });
    return grade(extract_answer(text, AnswerChoices::of(q)), q.gold);
  } catch (const BackendError& e) {
    std::lock_guard lock(mutex_);
    failures_.push_back(q.id + ": " + e.what());
    return false;
  }
}

std::vector<std::string> BackendGrader::failures() const {
  std::lock_guard lock(mutex_);
  return failures_;
}

RecordedGrader::RecordedGrader(std::string name, std::unordered_map<std::string, bool> verdicts)
    : name_(std::move(name)), verdicts_(std::move(verdicts)) {}

bool RecordedGrader::solves(const McqQuestion& q) const {
  const auto it = verdicts_.find(q.id);
  if (it == verdicts_.end()) {
    throw std::out_of_range("grader " + name_ + " has no verdict for question " + q.id);
  }
  return it->second;
}

std::vector<std::shared_ptr<const Grader>> load_recorded_graders(
    const std::filesystem::path& path) {
  std::vector<std::string> names;
  std::map<std::string, std::unordered_map<std::string, bool>> verdicts;
  for_each_jsonl(path, [&](const nlohmann::json& j, std::size_t) {
    const auto id = j.at("id").get<std::string>();
    if (names.empty()) {
      for (const auto& [key, _] : j.items()) {
        if (key != "id") names.push_back(key);
      }
      if (names.empty()) throw std::invalid_argument("verdict line names no grader");
    }
    for (const auto& name : names) verdicts[name][id] = j.at(name).get<bool>();
  });
  std::vector<std::shared_ptr<const Grader>> graders;
  for (const auto& name : names) {
    graders.push_back(std::make_shared<RecordedGrader>(name, std::move(verdicts[name])));
  }
  return graders;
}

StageResult<McqQuestion> difficulty_filter(
    const std::vector<McqQuestion>& pool,
    const std::vector<std::shared_ptr<const Grader>>& graders, std::size_t workers) {
  if (graders.empty()) throw std::invalid_argument("difficulty filter needs at least one grader");
  std::vector<char> hard(pool.size(), 0);
  parallel_for(pool.size(), workers, [&](std::size_t i) {
    bool any_solved = false;
    for (const auto& g : graders) {
      if (g->solves(pool[i])) {
        any_solved = true;
        break;
      }
    }
    hard[i] = any_solved ? 0 : 1;
  });
  std::vector<McqQuestion> kept;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    if (hard[i]) kept.push_back(pool[i]);
  }
  auto row = count_by_source(kStageDifficulty, kept);
  return {std::move(kept), std::move(row)};
}

// ---------------------------------------------------------------------------

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t\r\n") - b + 1);
}

}  // namespace

TraceRecord generate_trace(const Backend& backend, const McqQuestion& q,
                           const TraceGenerationOptions& options) {
  const auto text = with_retries(options.retry, [&] {
    return probe_answer(backend, format_trace_prompt(q), options.request_template);
  });
  std::string thinking;
  std::string response = text;
  if (!options.think_delimiter.empty()) {
    if (const auto pos = text.find(options.think_delimiter); pos != std::string::npos) {
      thinking = trim(text.substr(0, pos));
      response = trim(text.substr(pos + options.think_delimiter.size()));
    }
  }
  return TraceRecord::from_response(q, std::move(thinking), std::move(response));
}

StageResult<TraceRecord> validate_traces(const std::vector<TraceRecord>& records) {
  std::vector<TraceRecord> kept;
  for (const auto& r : records) {
    if (r.verified) kept.push_back(r);
  }
  auto row = count_by_source(kStageTraces, kept);
  return {std::move(kept), std::move(row)};
}

// ---------------------------------------------------------------------------

DomainLexicon load_lexicon(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open lexicon " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error("lexicon " + path.string() + ": " + e.what());
  }
  return j.get<DomainLexicon>();
}

std::vector<McqQuestion> annotate_domains(std::vector<McqQuestion> questions,
                                          const DomainLexicon& lexicon) {
  if (lexicon.empty()) throw std::invalid_argument("domain lexicon is empty");
  std::vector<std::pair<std::string, std::string>> terms;
  for (const auto& [term, qualifier] : lexicon) {
    auto norm = normalize_text(term);
    if (!norm.empty()) terms.emplace_back(" " + norm + " ", qualifier);
  }
  for (auto& q : questions) {
    const std::string padded = " " + normalize_text(q.stem) + " ";
    std::set<std::string> labels;
    for (const auto& [needle, qualifier] : terms) {
      if (padded.find(needle) != std::string::npos) labels.insert(qualifier);
    }
    if (labels.empty()) labels.insert(kUnlabeled);
    q.domains.assign(labels.begin(), labels.end());
  }
  return questions;
}

// ---------------------------------------------------------------------------

std::string format_sft_example(const TraceRecord& record) {
  if (!record.verified) {
    throw std::invalid_argument("refusing to format unverified record " + record.question.id);
  }
  const std::string prompt = format_prompt(record.question);
  for (const std::string* part : {&prompt, &record.thinking, &record.response}) {
    if (part->find(kThinkMarker) != std::string::npos ||
        part->find(kAnswerMarker) != std::string::npos) {
      throw ContaminationError("record " + record.question.id +
                               " already contains a thinking/answer marker");
    }
  }
  std::string out = prompt;
  out += '\n';
  out += kThinkMarker;
  out += '\n';
  out += record.thinking;
  out += '\n';
  out += kAnswerMarker;
  out += '\n';
  out += record.response;
  return out;
}

}  // namespace ttscale
