#include "ttscale/config.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <sstream>

#include "ttscale/chat_backend.hpp"
#include "ttscale/io.hpp"

namespace ttscale {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_unsigned(const std::string& key, const std::string& value) {
  T out{};
  const auto* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end || value.empty()) {
    throw ConfigError("invalid value for " + key + ": '" + value + "' (expected a nonnegative integer)");
  }
  return out;
}

double parse_double(const std::string& key, const std::string& value) {
  std::istringstream in(value);
  in.imbue(std::locale::classic());
  double out = 0.0;
  in >> out;
  if (!in || !in.eof() || value.empty()) {
    throw ConfigError("invalid value for " + key + ": '" + value + "' (expected a number)");
  }
  return out;
}

std::string unquote(const std::string& value, const std::string& where) {
  if (value.size() >= 2 && value.front() == '"') {
    try {
      return nlohmann::json::parse(value).get<std::string>();
    } catch (const nlohmann::json::exception&) {
      throw ConfigError(where + ": malformed quoted value " + value);
    }
  }
  return value;
}

}  // namespace

const std::vector<std::string>& Config::keys() {
  static const std::vector<std::string> k = {
      "backend.base_url",         "backend.model",          "sampling.temperature",
      "sampling.seed",            "policy.thinking_budget", "policy.forcing_count",
      "policy.per_forcing_cap",   "policy.forcing_text",    "policy.forced_total_cap",
      "policy.answer_max_tokens", "run.workers",            "run.max_retries",
      "paths.dataset",            "paths.mock",             "paths.output",
  };
  return k;
}

void Config::set(const std::string& key, const std::string& value) {
  if (key == "backend.base_url") base_url = value;
  else if (key == "backend.model") model = value;
  else if (key == "sampling.temperature") temperature = parse_double(key, value);
  else if (key == "sampling.seed") seed = parse_unsigned<std::uint64_t>(key, value);
  else if (key == "policy.thinking_budget") thinking_budget = parse_unsigned<std::size_t>(key, value);
  else if (key == "policy.forcing_count") forcing_count = parse_unsigned<std::size_t>(key, value);
  else if (key == "policy.per_forcing_cap") per_forcing_cap = parse_unsigned<std::size_t>(key, value);
  else if (key == "policy.forcing_text") forcing_text = value;
  else if (key == "policy.forced_total_cap") {
    if (value.empty() || value == "none") forced_total_cap.reset();
    else forced_total_cap = parse_unsigned<std::size_t>(key, value);
  }
  else if (key == "policy.answer_max_tokens") answer_max_tokens = parse_unsigned<std::size_t>(key, value);
  else if (key == "run.workers") workers = parse_unsigned<std::size_t>(key, value);
  else if (key == "run.max_retries") max_retries = static_cast<int>(parse_unsigned<unsigned>(key, value));
  else if (key == "paths.dataset") dataset = value;
  else if (key == "paths.mock") mock = value;
  else if (key == "paths.output") output = value;
  else throw ConfigError("unknown config key '" + key + "'");
}

BudgetPolicy Config::policy() const {
  BudgetPolicy p;
  p.thinking_budget = thinking_budget;
  p.forcing_count = forcing_count;
  p.per_forcing_cap = per_forcing_cap;
  p.forcing_text = forcing_text;
  p.forced_total_cap = forced_total_cap;
  p.answer_max_tokens = answer_max_tokens;
  p.temperature = temperature;
  p.seed = seed;
  return p;
}

nlohmann::json Config::to_json() const {
  return {
      {"backend", {{"base_url", base_url}, {"model", model}}},
      {"sampling", {{"temperature", temperature}, {"seed", seed}}},
      {"policy",
       {{"thinking_budget", thinking_budget},
        {"forcing_count", forcing_count},
        {"per_forcing_cap", per_forcing_cap},
        {"forcing_text", forcing_text},
        {"forced_total_cap", forced_total_cap ? nlohmann::json(*forced_total_cap) : nlohmann::json(nullptr)},
        {"answer_max_tokens", answer_max_tokens}}},
      {"run", {{"workers", workers}, {"max_retries", max_retries}}},
      {"paths", {{"dataset", dataset}, {"mock", mock}, {"output", output}}},
  };
}

std::string flag_for_key(const std::string& key) {
  std::string name = key.substr(key.find('.') + 1);
  std::replace(name.begin(), name.end(), '_', '-');
  return "--" + name;
}

std::vector<std::pair<std::string, std::string>> parse_config_text(const std::string& text,
                                                                   const std::string& origin) {
  const auto& known = Config::keys();
  std::vector<std::pair<std::string, std::string>> out;
  std::istringstream in(text);
  std::string line;
  std::string section;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string where = origin + ":" + std::to_string(lineno);
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#' || t.front() == ';') continue;
    if (t.front() == '[') {
      if (t.back() != ']') throw ConfigError(where + ": malformed section header");
      section = trim(t.substr(1, t.size() - 2));
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ConfigError(where + ": expected key = value");
    if (section.empty()) throw ConfigError(where + ": key outside of any section");
    const std::string key = section + "." + trim(t.substr(0, eq));
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw ConfigError(where + ": unknown config key '" + key + "'");
    }
    out.emplace_back(key, unquote(trim(t.substr(eq + 1)), where));
  }
  return out;
}

Config load_config(const std::optional<std::filesystem::path>& path,
                   const std::map<std::string, std::string>& env,
                   const std::map<std::string, std::string>& flags) {
  Config c;
  if (path) {
    for (const auto& [key, value] : parse_config_text(read_file(*path), path->string())) {
      c.set(key, value);
    }
  }
  if (const auto it = env.find(kBaseUrlEnv); it != env.end() && !it->second.empty()) {
    c.base_url = it->second;
  }
  for (const auto& [key, value] : flags) c.set(key, value);
  return c;
}

std::map<std::string, std::string> process_env() {
  std::map<std::string, std::string> env;
  for (const char* name : {kBaseUrlEnv, kApiKeyEnv}) {
    if (const char* v = std::getenv(name)) env[name] = v;
  }
  return env;
}

}  // namespace ttscale
