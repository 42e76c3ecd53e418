#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "ttscale/backend_error.hpp"

namespace ttscale {

/// Hard output ceiling used for trace generation: no observed trace exceeds 8K tokens.
inline constexpr std::size_t kTraceGenerationLimit = 8192;

inline constexpr double kDefaultTemperature = 0.0;
inline constexpr std::uint64_t kDefaultSeed = 42;

struct GenerationRequest {
  std::string prompt;
  /// Assistant text already produced; generation resumes right after it.
  std::string continuation;
  std::size_t max_new_tokens = kTraceGenerationLimit;
  double temperature = kDefaultTemperature;
  std::uint64_t seed = kDefaultSeed;
  /// Generation halts when this text appears; it is never yielded.
  std::optional<std::string> stop_on;

  /// Throws std::invalid_argument on a zero token cap, negative temperature
  /// or an empty stop marker.
  void validate() const;

  [[nodiscard]] std::string context() const { return prompt + continuation; }
};

struct TokenEvent {
  std::string text;
  std::size_t ordinal = 0;
};

enum class StopCause { marker, cap, backend_stop };

std::string_view to_string(StopCause cause);

/// Receives raw token chunks from a backend. Returning false asks the backend
/// to stop producing.
using ChunkSink = std::function<bool(std::string_view chunk)>;

/// A source of streamed tokens. Implementations must be safe to call from
/// several threads at once; each call owns its own stream.
class Backend {
 public:
  virtual ~Backend() = default;

  [[nodiscard]] virtual std::string name() const = 0;

  /// Pushes chunks in order until the backend finishes or `sink` returns false.
  /// Failures surface as BackendError.
  virtual void generate(const GenerationRequest& request, const ChunkSink& sink) const = 0;
};

using TokenSink = std::function<void(const TokenEvent&)>;

struct StreamEnd {
  StopCause cause = StopCause::backend_stop;
  std::size_t events = 0;
};

/// Streams `request` through `backend`, enforcing the token cap and the stop
/// marker. The marker is detected on concatenated text, so it may be split
/// across backend chunks; chunks that could begin a marker are held back
/// until they are resolved. At most `max_new_tokens` events are delivered.
StreamEnd stream_generate(const Backend& backend, const GenerationRequest& request,
                          const TokenSink& on_token);

struct StreamResult {
  std::vector<TokenEvent> events;
  StopCause cause = StopCause::backend_stop;

  [[nodiscard]] std::string text() const;
  [[nodiscard]] std::vector<std::string> tokens() const;
};

StreamResult collect_stream(const Backend& backend, const GenerationRequest& request);

/// Full, non-streamed completion text for `prompt`, used by graders.
/// `base` supplies sampling parameters and the token cap.
std::string probe_answer(const Backend& backend, std::string_view prompt,
                         const GenerationRequest& base = {});

struct RetryPolicy {
  int max_retries = 2;
  std::chrono::milliseconds base_delay{250};
};

/// Calls `fn` until it succeeds, retrying retryable BackendErrors with
/// exponential backoff (base, 2*base, ...). The last error is rethrown.
template <typename Fn>
auto with_retries(const RetryPolicy& policy, Fn&& fn) -> decltype(fn()) {
  for (int attempt = 0;; ++attempt) {
    try {
      return fn();
    } catch (const BackendError& e) {
      if (!e.retryable() || attempt >= policy.max_retries) throw;
      std::this_thread::sleep_for(policy.base_delay * (1 << attempt));
    }
  }
}

}  // namespace ttscale
