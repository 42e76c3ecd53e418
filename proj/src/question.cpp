#include "ttscale/question.hpp"

#include <fstream>
#include <set>

namespace ttscale {

void McqQuestion::validate() const {
  if (id.empty()) throw std::invalid_argument("question id is empty");
  if (options.size() < 2) throw std::invalid_argument("question " + id + " has fewer than 2 options");
  char expected = 'A';
  for (const auto& [letter, _] : options) {
    if (letter != expected) {
      throw std::invalid_argument("question " + id + " option letters are not consecutive from A");
    }
    ++expected;
  }
  if (!options.contains(gold)) {
    throw std::invalid_argument("question " + id + " gold answer '" + std::string(1, gold) +
                                "' is not an option");
  }
}

std::vector<char> McqQuestion::letters() const {
  std::vector<char> out;
  out.reserve(options.size());
  for (const auto& [letter, _] : options) out.push_back(letter);
  return out;
}

nlohmann::json McqQuestion::to_json() const {
  nlohmann::json opts = nlohmann::json::object();
  for (const auto& [letter, text] : options) opts[std::string(1, letter)] = text;
  return {{"id", id},         {"question", stem},       {"options", std::move(opts)},
          {"answer", std::string(1, gold)}, {"source", source}, {"domains", domains}};
}

McqQuestion McqQuestion::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("expected a JSON object");
  McqQuestion q;
  q.id = j.at("id").get<std::string>();
  q.stem = j.at("question").get<std::string>();
  for (const auto& [key, value] : j.at("options").items()) {
    if (key.size() != 1 || key[0] < 'A' || key[0] > 'Z') {
      throw std::invalid_argument("option key '" + key + "' is not a capital letter");
    }
    q.options[key[0]] = value.get<std::string>();
  }
  const auto answer = j.at("answer").get<std::string>();
  if (answer.size() != 1) throw std::invalid_argument("answer must be a single letter");
  q.gold = answer[0];
  q.source = j.value("source", std::string());
  if (j.contains("domains")) q.domains = j.at("domains").get<std::vector<std::string>>();
  q.validate();
  return q;
}

SchemaError::SchemaError(std::string file, std::size_t line, const std::string& what)
    : std::runtime_error(file + ", line " + std::to_string(line) + ": " + what),
      file_(std::move(file)),
      line_(line) {}

void for_each_jsonl(const std::filesystem::path& path,
                    const std::function<void(const nlohmann::json&, std::size_t)>& fn) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw SchemaError(path.string(), number, std::string("malformed JSON: ") + e.what());
    }
    if (j.is_object() && j.contains(kMetaKey)) continue;
    try {
      fn(j, number);
    } catch (const SchemaError&) {
      throw;
    } catch (const std::exception& e) {
      throw SchemaError(path.string(), number, e.what());
    }
  }
}

std::vector<McqQuestion> load_questions(const std::filesystem::path& path) {
  std::vector<McqQuestion> out;
  std::set<std::string> seen;
  for_each_jsonl(path, [&](const nlohmann::json& j, std::size_t) {
    auto q = McqQuestion::from_json(j);
    if (!seen.insert(q.id).second) throw std::invalid_argument("duplicate question id " + q.id);
    out.push_back(std::move(q));
  });
  return out;
}

std::vector<std::string> lint_question(const McqQuestion& q) {
  std::vector<std::string> warnings;
  if (q.stem.find_first_not_of(" \t\r\n") == std::string::npos) {
    warnings.push_back(q.id + ": empty question stem");
  }
  for (const auto& [letter, text] : q.options) {
    if (text.find('\n') != std::string::npos) {
      warnings.push_back(q.id + ": option " + std::string(1, letter) + " contains a newline");
    }
  }
  if (q.stem.find("\n\n") != std::string::npos) {
    warnings.push_back(q.id + ": stem contains a blank line");
  }
  return warnings;
}

}  // namespace ttscale
