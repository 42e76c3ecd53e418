#include "ttscale/scripted_model.hpp"

#include <cctype>
#include <fstream>
#include <stdexcept>

namespace ttscale {

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

std::vector<std::string> string_or_list(const nlohmann::json& entry, const char* key) {
  std::vector<std::string> out;
  if (!entry.contains(key)) return out;
  const auto& value = entry.at(key);
  if (value.is_string()) {
    out.push_back(value.get<std::string>());
  } else if (value.is_array()) {
    for (const auto& item : value) out.push_back(item.get<std::string>());
  } else {
    throw std::invalid_argument(std::string("script field '") + key +
                                "' must be a string or an array of strings");
  }
  return out;
}

BackendErrorKind parse_kind(const std::string& name) {
  if (name == "connection") return BackendErrorKind::connection;
  if (name == "timeout") return BackendErrorKind::timeout;
  if (name == "status") return BackendErrorKind::status;
  if (name == "truncated") return BackendErrorKind::truncated;
  if (name == "protocol") return BackendErrorKind::protocol;
  throw std::invalid_argument("unknown scripted error kind '" + name + "'");
}

}  // namespace

bool ScriptEntry::matches(std::string_view context) const {
  for (const auto& needle : contains) {
    if (context.find(needle) == std::string_view::npos) return false;
  }
  if (suffixes.empty()) return true;
  for (const auto& suffix : suffixes) {
    if (context.ends_with(suffix)) return true;
  }
  return false;
}

ScriptedModel::ScriptedModel(std::vector<ScriptEntry> script) : script_(std::move(script)) {
  if (script_.empty()) throw std::invalid_argument("scripted model needs at least one entry");
}

ScriptedModel ScriptedModel::from_json(const nlohmann::json& doc) {
  const nlohmann::json& entries = doc.is_array() ? doc : doc.at("entries");
  std::vector<ScriptEntry> script;
  for (const auto& item : entries) {
    for (const auto& [key, _] : item.items()) {
      if (key != "suffix" && key != "contains" && key != "emit" && key != "terminal_marker" &&
          key != "error") {
        throw std::invalid_argument("unknown script field '" + key + "'");
      }
    }
    ScriptEntry entry;
    entry.suffixes = string_or_list(item, "suffix");
    entry.contains = string_or_list(item, "contains");
    if (item.contains("emit")) {
      const auto& emit = item.at("emit");
      entry.emission = emit.is_string() ? tokenize(emit.get<std::string>())
                                        : emit.get<std::vector<std::string>>();
    }
    if (item.contains("terminal_marker")) {
      entry.terminal_marker = item.at("terminal_marker").get<std::string>();
    }
    if (item.contains("error")) {
      const auto& err = item.at("error");
      ScriptedFailure failure;
      failure.kind = parse_kind(err.at("kind").get<std::string>());
      failure.after = err.value("after", std::size_t{0});
      failure.status = err.value("status", 0);
      entry.failure = failure;
    }
    script.push_back(std::move(entry));
  }
  return ScriptedModel(std::move(script));
}

ScriptedModel ScriptedModel::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open script file " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error("script file " + path.string() + ": " + e.what());
  }
  return from_json(doc);
}

std::vector<std::string> ScriptedModel::tokenize(std::string_view text) {
  std::vector<std::string> units;
  std::size_t i = 0;
  while (i < text.size()) {
    const std::size_t start = i;
    while (i < text.size() && is_space(text[i])) ++i;
    if (i == text.size()) break;
    while (i < text.size() && !is_space(text[i])) ++i;
    units.emplace_back(text.substr(start, i - start));
  }
  return units;
}

const ScriptEntry* ScriptedModel::match(std::string_view context) const {
  for (const auto& entry : script_) {
    if (entry.matches(context)) return &entry;
  }
  return nullptr;
}

void ScriptedModel::generate(const GenerationRequest& request, const ChunkSink& sink) const {
  const std::string context = request.context();
  const ScriptEntry* entry = match(context);
  if (entry == nullptr) return;

  auto fail_if_due = [&](std::size_t emitted) {
    if (entry->failure && entry->failure->after == emitted) {
      const auto& f = *entry->failure;
      throw BackendError(f.kind, "scripted failure after " + std::to_string(emitted) + " chunks",
                         f.status);
    }
  };

  std::size_t emitted = 0;
  for (const auto& chunk : entry->emission) {
    fail_if_due(emitted);
    if (!sink(chunk)) return;
    ++emitted;
  }
  fail_if_due(emitted);
  if (entry->terminal_marker) sink(*entry->terminal_marker);
}

}  // namespace ttscale
