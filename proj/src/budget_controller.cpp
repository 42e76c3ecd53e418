#include "ttscale/budget_controller.hpp"

#include <stdexcept>

namespace ttscale {

void BudgetPolicy::validate() const {
  if (thinking_budget < 1) throw std::invalid_argument("thinking_budget must be at least 1");
  if (per_forcing_cap < 1) throw std::invalid_argument("per_forcing_cap must be at least 1");
  if (forcing_count > 0 && forcing_text.empty()) {
    throw std::invalid_argument("forcing_text must be nonempty when forcing_count > 0");
  }
  if (end_of_think_marker.empty()) {
    throw std::invalid_argument("end_of_think_marker must be nonempty");
  }
  if (forcing_text.find(end_of_think_marker) != std::string::npos) {
    throw std::invalid_argument("forcing_text must not contain the end-of-think marker");
  }
  if (answer_max_tokens < 1) throw std::invalid_argument("answer_max_tokens must be at least 1");
  if (!(temperature >= 0.0)) throw std::invalid_argument("temperature must be non-negative");
}

std::string Provenance::str() const {
  return initial() ? "initial" : "forced(" + std::to_string(forced_index) + ")";
}

Provenance Provenance::parse(std::string_view text) {
  if (text == "initial") return {};
  if (text.starts_with("forced(") && text.ends_with(")") && text.size() > 8) {
    const auto digits = text.substr(7, text.size() - 8);
    std::size_t index = 0;
    for (char c : digits) {
      if (c < '0' || c > '9') throw std::invalid_argument("bad provenance: " + std::string(text));
      index = index * 10 + static_cast<std::size_t>(c - '0');
    }
    if (index > 0) return Provenance{index};
  }
  throw std::invalid_argument("bad provenance: " + std::string(text));
}

std::string ThinkingSegment::text() const {
  std::string out;
  for (const auto& t : tokens) out += t;
  return out;
}

std::string_view to_string(Termination termination) {
  switch (termination) {
    case Termination::natural: return "natural";
    case Termination::budget_exhausted: return "budget_exhausted";
    case Termination::forcing_exhausted: return "forcing_exhausted";
  }
  return "unknown";
}

Termination parse_termination(std::string_view text) {
  if (text == "natural") return Termination::natural;
  if (text == "budget_exhausted") return Termination::budget_exhausted;
  if (text == "forcing_exhausted") return Termination::forcing_exhausted;
  throw std::invalid_argument("bad termination: " + std::string(text));
}

void ReasoningTranscript::check_invariants() const {
  if (segments.empty()) throw std::logic_error("transcript has no segments");
  std::size_t total = 0;
  for (std::size_t i = 0; i < segments.size(); ++i) {
    if (segments[i].provenance.forced_index != i) {
      throw std::logic_error("segment provenance indices are not consecutive");
    }
    total += segments[i].tokens.size();
  }
  if (total != thinking_tokens) throw std::logic_error("thinking_tokens does not match segments");
  if (injections != segments.size() - 1) {
    throw std::logic_error("injections does not match forced segments");
  }
}

nlohmann::json ReasoningTranscript::to_json() const {
  nlohmann::json segs = nlohmann::json::array();
  for (const auto& s : segments) {
    segs.push_back({{"provenance", s.provenance.str()}, {"text", s.text()}, {"tokens", s.tokens}});
  }
  return {{"id", id},
          {"segments", std::move(segs)},
          {"injections", injections},
          {"thinking_tokens", thinking_tokens},
          {"answer", answer_text},
          {"termination", std::string(to_string(termination))}};
}

ReasoningTranscript ReasoningTranscript::from_json(const nlohmann::json& j) {
  ReasoningTranscript t;
  t.id = j.at("id").get<std::string>();
  for (const auto& s : j.at("segments")) {
    ThinkingSegment seg;
    seg.provenance = Provenance::parse(s.at("provenance").get<std::string>());
    seg.tokens = s.at("tokens").get<std::vector<std::string>>();
    if (s.contains("text") && s.at("text").get<std::string>() != seg.text()) {
      throw std::invalid_argument("segment text does not match its tokens");
    }
    t.segments.push_back(std::move(seg));
  }
  t.injections = j.at("injections").get<std::size_t>();
  t.thinking_tokens = j.at("thinking_tokens").get<std::size_t>();
  t.answer_text = j.at("answer").get<std::string>();
  t.termination = parse_termination(j.at("termination").get<std::string>());
  t.empty_answer = t.answer_text.empty();
  t.check_invariants();
  return t;
}

BudgetRunError::BudgetRunError(const BackendError& cause, ReasoningTranscript partial)
    : BackendError(cause), partial_(std::move(partial)) {}

std::string thinking_context(const ReasoningTranscript& transcript, const BudgetPolicy& policy) {
  std::string out = policy.think_marker;
  for (const auto& seg : transcript.segments) {
    if (!seg.provenance.initial()) out += policy.forcing_text;
    for (const auto& t : seg.tokens) out += t;
  }
  return out;
}

namespace {

std::string answer_context(const ReasoningTranscript& transcript, const BudgetPolicy& policy) {
  std::string context = thinking_context(transcript, policy) + policy.end_of_think_marker;
  if (transcript.termination == Termination::budget_exhausted) context += policy.answer_cue;
  return context;
}

void stream_answer(std::string_view prompt, ReasoningTranscript& transcript,
                   const BudgetPolicy& policy, const Backend& backend) {
  GenerationRequest request;
  request.prompt = std::string(prompt);
  request.continuation = answer_context(transcript, policy);
  request.max_new_tokens = policy.answer_max_tokens;
  request.temperature = policy.temperature;
  request.seed = policy.seed;
  transcript.answer_text = collect_stream(backend, request).text();
  transcript.empty_answer = transcript.answer_text.empty();
}

}  // namespace

ReasoningTranscript run_with_budget(std::string_view prompt, const BudgetPolicy& policy,
                                    const Backend& backend) {
  policy.validate();

  ReasoningTranscript transcript;
  std::string continuation = policy.think_marker;
  std::size_t forced_used = 0;

  GenerationRequest request;
  request.prompt = std::string(prompt);
  request.temperature = policy.temperature;
  request.seed = policy.seed;
  request.stop_on = policy.end_of_think_marker;

  auto stream_segment = [&](std::size_t cap) {
    transcript.segments.push_back(ThinkingSegment{Provenance{transcript.injections}, {}});
    auto& segment = transcript.segments.back();
    request.continuation = continuation;
    request.max_new_tokens = cap;
    const StreamEnd end = stream_generate(backend, request, [&](const TokenEvent& e) {
      segment.tokens.push_back(e.text);
      continuation += e.text;
      ++transcript.thinking_tokens;
    });
    return end.cause;
  };

  try {
    StopCause cause = stream_segment(policy.thinking_budget);
    for (;;) {
      if (cause == StopCause::cap) {
        transcript.termination = Termination::budget_exhausted;
        break;
      }
      // The model ended its thought (marker or end of stream).
      std::size_t cap = policy.per_forcing_cap;
      if (policy.forced_total_cap) {
        cap = std::min(cap, *policy.forced_total_cap - std::min(*policy.forced_total_cap,
                                                                forced_used));
      }
      const bool may_force = transcript.injections < policy.forcing_count &&
                             transcript.thinking_tokens < policy.thinking_budget && cap > 0;
      if (!may_force) {
        if (transcript.injections < policy.forcing_count) {
          transcript.termination = Termination::budget_exhausted;
        } else {
          transcript.termination = transcript.injections == 0 ? Termination::natural
                                                              : Termination::forcing_exhausted;
        }
        break;
      }
      continuation += policy.forcing_text;
      ++transcript.injections;
      const std::size_t before = transcript.thinking_tokens;
      cause = stream_segment(cap);
      forced_used += transcript.thinking_tokens - before;
    }
    stream_answer(prompt, transcript, policy, backend);
  } catch (const BackendError& e) {
    throw BudgetRunError(e, std::move(transcript));
  }
  return transcript;
}

ReasoningTranscript truncate_to_budget(const ReasoningTranscript& transcript,
                                       std::size_t budget) {
  if (budget < 1) throw std::invalid_argument("budget must be at least 1");
  if (transcript.thinking_tokens <= budget) return transcript;

  ReasoningTranscript cut;
  cut.id = transcript.id;
  std::size_t remaining = budget;
  for (const auto& seg : transcript.segments) {
    // A forced segment is only kept if at least one of its tokens fits.
    if (!seg.provenance.initial() && remaining == 0) break;
    ThinkingSegment kept{seg.provenance, {}};
    const std::size_t take = std::min(remaining, seg.tokens.size());
    kept.tokens.assign(seg.tokens.begin(), seg.tokens.begin() + static_cast<std::ptrdiff_t>(take));
    remaining -= take;
    cut.segments.push_back(std::move(kept));
  }
  cut.injections = cut.segments.size() - 1;
  cut.thinking_tokens = budget - remaining;
  cut.termination = Termination::budget_exhausted;
  cut.empty_answer = true;
  return cut;
}

ReasoningTranscript elicit_answer(std::string_view prompt, ReasoningTranscript transcript,
                                  const BudgetPolicy& policy, const Backend& backend) {
  policy.validate();
  try {
    stream_answer(prompt, transcript, policy, backend);
  } catch (const BackendError& e) {
    throw BudgetRunError(e, std::move(transcript));
  }
  return transcript;
}

}  // namespace ttscale
