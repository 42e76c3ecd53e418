#pragma once

// Recorded-verdict replay of the published curation statistics. Every stage
// runs the real pipeline code; only the grader verdicts, the teacher
// responses and the final 1K selection are recorded inputs.

#include <array>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "ttscale/curation.hpp"
#include "ttscale/sampler.hpp"

namespace ttscale::testing {

inline const std::array<std::string, 4> kLedgerSources = {"MedQA", "HeadQA", "MedMCQA", "PubMedQA"};

// Per-source counts as printed in the dataset statistics table.
struct LedgerRow {
  const char* name;
  std::array<std::size_t, 4> counts;
  std::size_t total;
};

inline const LedgerRow kInitialRow{"initial", {10178, 2657, 182822, 500}, 196157};
inline const LedgerRow kDifficultyRow{"difficulty", {2099, 331, 35270, 116}, 37816};
inline const LedgerRow kTracesRow{"traces", {1628, 209, 21628, 39}, 23504};
inline const LedgerRow kM23kRow{"m23K", {1628, 209, 21628, 28}, 23493};
inline const LedgerRow kRandom23kRow{"random23K", {1316, 317, 21831, 29}, 23493};
inline const LedgerRow kM1kRow{"m1K", {274, 123, 575, 28}, 1000};

struct LedgerReplay {
  CurationReport report;
  std::size_t initial = 0;
  std::size_t after_filter = 0;
  std::size_t after_traces = 0;
  std::size_t after_decontamination = 0;
  std::size_t sampled = 0;
};

inline std::string ledger_id(std::size_t source, std::size_t i) {
  return kLedgerSources[source] + "-" + std::to_string(i);
}

inline LedgerReplay replay_table3_ledger() {
  LedgerReplay out;

  // Initial pool: question i of a source is hard iff i < difficulty count.
  std::vector<McqQuestion> pool;
  pool.reserve(kInitialRow.total);
  std::unordered_map<std::string, bool> small_model;
  std::unordered_map<std::string, bool> large_model;
  for (std::size_t s = 0; s < 4; ++s) {
    for (std::size_t i = 0; i < kInitialRow.counts[s]; ++i) {
      McqQuestion q;
      q.id = ledger_id(s, i);
      q.stem = "stem " + q.id;
      q.source = kLedgerSources[s];
      const bool hard = i < kDifficultyRow.counts[s];
      // Easy questions are solved by one grader or both.
      small_model.emplace(q.id, !hard && i % 3 != 0);
      large_model.emplace(q.id, !hard && i % 3 != 1);
      pool.push_back(std::move(q));
    }
  }
  out.initial = pool.size();
  out.report.add_stage(count_by_source(kStageInitial, pool));

  const std::vector<std::shared_ptr<const Grader>> graders = {
      std::make_shared<RecordedGrader>("qwen-7b", std::move(small_model)),
      std::make_shared<RecordedGrader>("qwen-32b", std::move(large_model))};
  auto filtered = difficulty_filter(pool, graders, 1);
  out.after_filter = filtered.kept.size();
  out.report.add_stage(filtered.row);

  // Recorded teacher responses: correct for the first `traces` of each source.
  std::array<std::size_t, 4> seen{};
  std::vector<TraceRecord> records;
  records.reserve(filtered.kept.size());
  for (auto q : filtered.kept) {
    std::size_t s = 0;
    while (kLedgerSources[s] != q.source) ++s;
    const std::size_t i = seen[s]++;
    q.options = {{'A', "yes"}, {'B', "no"}, {'C', "maybe"}, {'D', "unknown"}};
    q.gold = 'A';
    const bool right = i < kTracesRow.counts[s];
    records.push_back(TraceRecord::from_response(q, "reasoning", right ? "\\boxed{A}" : "\\boxed{B}"));
  }
  auto traced = validate_traces(records);
  out.after_traces = traced.kept.size();
  out.report.add_stage(traced.row);

  // Eleven PubMedQA traces are contaminated (6) or duplicated (5).
  std::vector<McqQuestion> eval_set;
  std::size_t pubmed = 0;
  for (auto& r : traced.kept) {
    if (r.question.source != "PubMedQA") continue;
    if (pubmed < 6) eval_set.push_back(r.question);
    if (pubmed >= 6 && pubmed < 11) r.question.stem = "stem PubMedQA-" + std::to_string(pubmed + 20) + "  ";
    ++pubmed;
  }
  auto clean = decontaminate(traced.kept, eval_set);
  out.after_decontamination = clean.kept.size();
  out.report.add_stage(clean.row);

  // Side row: a random 23K drawn straight from the initial pool.
  std::vector<McqQuestion> random23k;
  for (std::size_t s = 0; s < 4; ++s) {
    for (std::size_t i = 0; i < kRandom23kRow.counts[s]; ++i) random23k.push_back(pool[0]);
  }
  for (std::size_t s = 0, k = 0; s < 4; ++s) {
    for (std::size_t i = 0; i < kRandom23kRow.counts[s]; ++i) random23k[k++].source = kLedgerSources[s];
  }
  auto side = count_by_source("random_23k", random23k);
  side.sequential = false;
  out.report.add_stage(side);

  // Recorded m1K selection: the first ids of each source in the m23K pool.
  std::vector<std::string> ids;
  std::array<std::size_t, 4> taken{};
  for (const auto& r : clean.kept) {
    std::size_t s = 0;
    while (kLedgerSources[s] != r.question.source) ++s;
    if (taken[s] < kM1kRow.counts[s]) {
      ids.push_back(r.question.id);
      ++taken[s];
    }
  }
  const auto m1k = select_by_ids(clean.kept, ids);
  out.sampled = m1k.size();
  out.report.add_stage(count_by_source(kStageSample, m1k));
  return out;
}

}  // namespace ttscale::testing
