#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ttscale {

struct ServerSentEvent {
  std::optional<std::string> event;
  std::string data;
};

/// Incremental server-sent-events decoder. Bytes may arrive in arbitrary
/// pieces; an event is complete at a blank line. Multiple `data:` lines in
/// one event are joined with '\n'. Comment lines (":") are ignored.
class SseParser {
 public:
  std::vector<ServerSentEvent> feed(std::string_view bytes);

  /// Flushes a trailing event that was not terminated by a blank line.
  std::vector<ServerSentEvent> finish();

 private:
  void process_line(std::string_view line, std::vector<ServerSentEvent>& out);
  void dispatch(std::vector<ServerSentEvent>& out);

  std::string buffer_;
  ServerSentEvent current_;
  bool has_data_ = false;
};

}  // namespace ttscale
