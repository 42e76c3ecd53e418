#include <algorithm>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "test_support.hpp"
#include "ttscale/answer.hpp"
#include "ttscale/prompt.hpp"
#include "ttscale/question.hpp"

namespace ttscale {
namespace {

using nlohmann::json;
using testing::make_question;

std::vector<json> read_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  std::vector<json> rows;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty()) rows.push_back(json::parse(line));
  }
  return rows;
}

AnswerChoices choices_of(const json& row) {
  std::vector<char> letters;
  for (const char c : row["letters"].get<std::string>()) letters.push_back(c);
  auto choices = AnswerChoices::of_letters(letters);
  if (row.contains("options")) {
    for (const auto& [k, v] : row["options"].items()) choices.texts[k[0]] = v.get<std::string>();
  }
  return choices;
}

// Independent parse of an options block: one "L. text" per line.
OptionMap parse_options_block(const std::string& block) {
  OptionMap out;
  std::istringstream in(block);
  for (std::string line; std::getline(in, line);) {
    if (line.size() < 3 || line[1] != '.' || line[2] != ' ') throw std::runtime_error("bad line: " + line);
    out[line[0]] = line.substr(3);
  }
  return out;
}

TEST(FormatOptions, ThreeOptions) {
  EXPECT_EQ(format_options({{'A', "yes"}, {'B', "no"}, {'C', "maybe"}}), "A. yes\nB. no\nC. maybe");
}

TEST(FormatOptions, SingleAndFiveOptions) {
  EXPECT_EQ(format_options({{'A', "only"}}), "A. only");
  const OptionMap five = {{'A', "a"}, {'B', "b"}, {'C', "c"}, {'D', "d"}, {'E', "e"}};
  EXPECT_EQ(format_options(five), "A. a\nB. b\nC. c\nD. d\nE. e");
}

TEST(FormatPrompt, DefaultInstructionIsSuffix) {
  const auto q = make_question("q1", "Which one?");
  const auto p = format_prompt(q);
  const std::string suffix = "Return your final response within \\boxed{}.";
  ASSERT_GE(p.size(), suffix.size());
  EXPECT_EQ(p.substr(p.size() - suffix.size()), suffix);
  EXPECT_EQ(p, "Which one?\nA. yes\nB. no\nC. maybe\nD. unknown\n" + suffix);
}

TEST(FormatPrompt, ChainOfThoughtInstruction) {
  const auto p = format_prompt(make_question("q1", "Which one?"), kChainOfThoughtInstruction);
  EXPECT_NE(p.find("Let's think step by step."), std::string::npos);
}

TEST(FormatPrompt, EmptyStemIsAllowedButLinted) {
  const auto q = make_question("q1", "");
  EXPECT_EQ(format_prompt(q).front(), '\n');
  EXPECT_FALSE(lint_question(q).empty());
  EXPECT_TRUE(lint_question(make_question("q2", "A real stem?")).empty());
}

TEST(FormatTracePrompt, InstructionFirst) {
  const auto q = make_question("q1", "Which one?");
  const auto t = format_trace_prompt(q);
  EXPECT_EQ(t.rfind("Return your final response within \\boxed{", 0), 0u);
  EXPECT_EQ(t, std::string(kDefaultInstruction) + "\nWhich one?\n" + format_options(q.options));
}

TEST(FormatTracePrompt, SameFieldsAsEvaluationPrompt) {
  const auto q = make_question("q1", "Which one?");
  auto lines = [](const std::string& s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    for (std::string l; std::getline(in, l);) out.push_back(l);
    std::sort(out.begin(), out.end());
    return out;
  };
  EXPECT_EQ(lines(format_prompt(q)), lines(format_trace_prompt(q)));
  EXPECT_NE(format_prompt(q), format_trace_prompt(q));
}

TEST(FormatPrompt, OptionsBlockParsesBack) {
  for (std::size_t n = 1; n <= 6; ++n) {
    auto q = make_question("q", "Stem line one\nstem line two");
    q.options.clear();
    for (std::size_t i = 0; i < n; ++i) {
      q.options[static_cast<char>('A' + i)] = "option text " + std::to_string(i * 7);
    }
    const auto prompt = format_prompt(q);
    const auto begin = q.stem.size() + 1;
    const auto end = prompt.size() - kDefaultInstruction.size() - 1;
    const auto parsed = parse_options_block(prompt.substr(begin, end - begin));
    EXPECT_EQ(parsed, q.options);
    EXPECT_EQ(prompt.substr(0, q.stem.size()), q.stem);
  }
}

TEST(Question, JsonSchemaRoundTrip) {
  const auto q = make_question("q1", "Stem", 'B', "PubMedQA", {"Drug Therapy"});
  const auto j = q.to_json();
  EXPECT_EQ(j["question"], "Stem");
  EXPECT_EQ(j["answer"], "B");
  EXPECT_EQ(j["options"]["C"], "maybe");
  EXPECT_EQ(McqQuestion::from_json(j), q);
}

TEST(Question, ValidationRules) {
  auto q = make_question("q1", "Stem", 'E');
  EXPECT_THROW(q.validate(), std::invalid_argument);
  q = make_question("", "Stem");
  EXPECT_THROW(q.validate(), std::invalid_argument);
  q = make_question("q1", "Stem");
  q.options.erase('B');
  EXPECT_THROW(q.validate(), std::invalid_argument);
}

TEST(Question, SchemaErrorCitesLine) {
  testing::TempDir dir;
  std::string text;
  for (int i = 1; i <= 6; ++i) text += make_question("q" + std::to_string(i), "S").to_json().dump() + "\n";
  text += "{\"id\": \"q7\", \"question\": 3}\n";
  testing::write_text(dir / "bad.jsonl", text);
  try {
    (void)load_questions(dir / "bad.jsonl");
    FAIL() << "expected SchemaError";
  } catch (const SchemaError& e) {
    EXPECT_EQ(e.line(), 7u);
    EXPECT_NE(std::string(e.what()).find("7"), std::string::npos);
  }
}

TEST(Question, DuplicateIdsRejected) {
  testing::TempDir dir;
  testing::write_questions(dir / "dup.jsonl", {make_question("q1", "a"), make_question("q1", "b")});
  try {
    (void)load_questions(dir / "dup.jsonl");
    FAIL() << "expected SchemaError";
  } catch (const SchemaError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
}

TEST(ExtractAnswer, ContractExamples) {
  const auto abcd = AnswerChoices::of_letters({'A', 'B', 'C', 'D'});
  auto r = extract_answer("thus \\boxed{B} is correct", abcd);
  EXPECT_EQ(r.letter, 'B');
  EXPECT_EQ(r.method, ExtractionMethod::boxed);
  EXPECT_EQ(extract_answer("\\boxed{A} then \\boxed{C}", abcd).letter, 'A');
  r = extract_answer("The answer is C.", abcd);
  EXPECT_EQ(r.letter, 'C');
  EXPECT_EQ(r.method, ExtractionMethod::regex_fallback);
}

TEST(ExtractAnswer, FallbackTableIsVersioned) {
  EXPECT_EQ(kFallbackTableVersion, "fallback-v1");
  std::vector<std::string> ids;
  for (const auto& p : fallback_patterns()) ids.emplace_back(p.id);
  EXPECT_EQ(ids, (std::vector<std::string>{"answer_is", "answer_colon", "option", "standalone"}));
  EXPECT_TRUE(fallback_patterns().back().tail_only);
}

TEST(ExtractAnswer, HandLabelledFixtures) {
  const auto rows = read_jsonl(testing::fixture("extraction_cases.jsonl"));
  ASSERT_GE(rows.size(), 40u);
  for (const auto& row : rows) {
    const auto text = row["text"].get<std::string>();
    const auto out = extract_answer(text, choices_of(row));
    SCOPED_TRACE(row["id"].get<std::string>());
    if (row["expected"].is_null()) {
      EXPECT_FALSE(out.letter.has_value());
    } else {
      ASSERT_TRUE(out.letter.has_value());
      EXPECT_EQ(*out.letter, row["expected"].get<std::string>()[0]);
    }
    EXPECT_EQ(to_string(out.method), row["method"].get<std::string>());
    if (row.contains("pattern")) EXPECT_EQ(out.pattern, row["pattern"].get<std::string>());
    EXPECT_LE(out.span.begin, out.span.end);
    EXPECT_LE(out.span.end, text.size());
    EXPECT_EQ(extract_answer(text, choices_of(row)), out);
  }
}

TEST(ExtractAnswer, DecoyBoxWinsForEveryFixture) {
  for (const auto& row : read_jsonl(testing::fixture("extraction_cases.jsonl"))) {
    const auto choices = choices_of(row);
    for (const char x : choices.letters) {
      const std::string text = "\\boxed{" + std::string(1, x) + "} " + row["text"].get<std::string>();
      const auto out = extract_answer(text, choices);
      ASSERT_EQ(out.letter, x) << row["id"];
      ASSERT_EQ(out.method, ExtractionMethod::boxed) << row["id"];
    }
  }
}

TEST(Grade, Basics) {
  ExtractionOutcome o;
  o.letter = 'B';
  o.method = ExtractionMethod::boxed;
  EXPECT_TRUE(grade(o, 'B'));
  EXPECT_FALSE(grade(o, 'C'));
  EXPECT_FALSE(grade(ExtractionOutcome{}, 'B'));
}

TEST(Grade, FixtureBatchAccuracy) {
  const auto rows = read_jsonl(testing::fixture("grade_cases.jsonl"));
  ASSERT_EQ(rows.size(), 10u);
  const auto abcd = AnswerChoices::of_letters({'A', 'B', 'C', 'D'});
  int correct = 0;
  for (const auto& row : rows) {
    correct += grade(extract_answer(row["text"].get<std::string>(), abcd), row["gold"].get<std::string>()[0]);
  }
  EXPECT_DOUBLE_EQ(correct / 10.0, 0.7);
}

}  // namespace
}  // namespace ttscale
