#include "ttscale/model_client.hpp"

#include <deque>
#include <stdexcept>

namespace ttscale {

std::string_view to_string(BackendErrorKind kind) {
  switch (kind) {
    case BackendErrorKind::connection: return "connection";
    case BackendErrorKind::timeout: return "timeout";
    case BackendErrorKind::status: return "status";
    case BackendErrorKind::truncated: return "truncated";
    case BackendErrorKind::protocol: return "protocol";
  }
  return "unknown";
}

BackendError::BackendError(BackendErrorKind kind, const std::string& message, int status)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message),
      kind_(kind),
      status_(status) {}

bool BackendError::retryable() const noexcept {
  switch (kind_) {
    case BackendErrorKind::connection:
    case BackendErrorKind::timeout:
    case BackendErrorKind::truncated:
      return true;
    case BackendErrorKind::status:
      return status_ == 429 || status_ >= 500;
    case BackendErrorKind::protocol:
      return false;
  }
  return false;
}

std::string_view to_string(StopCause cause) {
  switch (cause) {
    case StopCause::marker: return "marker";
    case StopCause::cap: return "cap";
    case StopCause::backend_stop: return "backend_stop";
  }
  return "unknown";
}

void GenerationRequest::validate() const {
  if (max_new_tokens < 1) throw std::invalid_argument("max_new_tokens must be at least 1");
  if (!(temperature >= 0.0)) throw std::invalid_argument("temperature must be non-negative");
  if (stop_on && stop_on->empty()) throw std::invalid_argument("stop_on must not be empty");
}

namespace {

// Length of the longest suffix of `text` that is a proper prefix of `marker`.
std::size_t partial_marker_suffix(std::string_view text, std::string_view marker) {
  const std::size_t longest = std::min(text.size(), marker.size() - 1);
  for (std::size_t n = longest; n > 0; --n) {
    if (text.substr(text.size() - n) == marker.substr(0, n)) return n;
  }
  return 0;
}

class StopFilter {
 public:
  StopFilter(const GenerationRequest& request, const TokenSink& on_token)
      : cap_(request.max_new_tokens), marker_(request.stop_on.value_or("")), on_token_(on_token) {}

  // Returns false once the stream must stop.
  bool accept(std::string_view chunk) {
    if (chunk.empty()) return true;
    if (marker_.empty()) return emit(std::string(chunk));

    held_.emplace_back(chunk);
    held_text_ += chunk;

    if (const auto pos = held_text_.find(marker_); pos != std::string::npos) {
      std::size_t offset = 0;
      while (!held_.empty()) {
        std::string piece = std::move(held_.front());
        held_.pop_front();
        if (offset + piece.size() <= pos) {
          offset += piece.size();
          if (!emit(std::move(piece))) return false;
          continue;
        }
        if (pos > offset && !emit(piece.substr(0, pos - offset))) return false;
        break;
      }
      held_.clear();
      held_text_.clear();
      cause_ = StopCause::marker;
      return false;
    }

    const std::size_t hold = partial_marker_suffix(held_text_, marker_);
    while (!held_.empty() && held_text_.size() - held_.front().size() >= hold) {
      std::string piece = std::move(held_.front());
      held_.pop_front();
      held_text_.erase(0, piece.size());
      if (!emit(std::move(piece))) return false;
    }
    return true;
  }

  StreamEnd finish() {
    if (!cause_) {
      while (!held_.empty()) {
        std::string piece = std::move(held_.front());
        held_.pop_front();
        if (!emit(std::move(piece))) break;
      }
      if (!cause_) cause_ = StopCause::backend_stop;
    }
    return StreamEnd{*cause_, emitted_};
  }

 private:
  bool emit(std::string text) {
    on_token_(TokenEvent{std::move(text), emitted_++});
    if (emitted_ >= cap_) {
      cause_ = StopCause::cap;
      return false;
    }
    return true;
  }

  std::size_t cap_;
  std::string marker_;
  const TokenSink& on_token_;
  std::deque<std::string> held_;
  std::string held_text_;
  std::size_t emitted_ = 0;
  std::optional<StopCause> cause_;
};

}  // namespace

StreamEnd stream_generate(const Backend& backend, const GenerationRequest& request,
                          const TokenSink& on_token) {
  request.validate();
  StopFilter filter(request, on_token);
  bool stopped = false;
  backend.generate(request, [&](std::string_view chunk) {
    if (stopped) return false;
    stopped = !filter.accept(chunk);
    return !stopped;
  });
  return filter.finish();
}

std::string StreamResult::text() const {
  std::string out;
  for (const auto& e : events) out += e.text;
  return out;
}

std::vector<std::string> StreamResult::tokens() const {
  std::vector<std::string> out;
  out.reserve(events.size());
  for (const auto& e : events) out.push_back(e.text);
  return out;
}

StreamResult collect_stream(const Backend& backend, const GenerationRequest& request) {
  StreamResult result;
  result.cause = stream_generate(backend, request, [&](const TokenEvent& e) {
                   result.events.push_back(e);
                 }).cause;
  return result;
}

std::string probe_answer(const Backend& backend, std::string_view prompt,
                         const GenerationRequest& base) {
  GenerationRequest request = base;
  request.prompt = std::string(prompt);
  request.continuation.clear();
  request.stop_on.reset();
  std::string text;
  stream_generate(backend, request, [&](const TokenEvent& e) { text += e.text; });
  return text;
}

}  // namespace ttscale
