#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ttscale {

enum class BackendErrorKind {
  connection,  // could not reach the backend
  timeout,     // transport stalled or read failed mid-request
  status,      // backend answered with a non-success HTTP status
  truncated,   // stream ended without the completion sentinel
  protocol,    // malformed payload
};

std::string_view to_string(BackendErrorKind kind);

class BackendError : public std::runtime_error {
 public:
  BackendError(BackendErrorKind kind, const std::string& message, int status = 0);

  [[nodiscard]] BackendErrorKind kind() const noexcept { return kind_; }
  [[nodiscard]] int status() const noexcept { return status_; }

  // Connection, timeout and truncation failures are transient; so are
  // 429 and 5xx statuses. Everything else is a caller or payload problem.
  [[nodiscard]] bool retryable() const noexcept;

 private:
  BackendErrorKind kind_;
  int status_;
};

}  // namespace ttscale
