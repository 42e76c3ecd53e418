#include "ttscale/sse.hpp"

namespace ttscale {

std::vector<ServerSentEvent> SseParser::feed(std::string_view bytes) {
  buffer_.append(bytes);
  std::vector<ServerSentEvent> out;
  std::size_t start = 0;
  for (;;) {
    const auto nl = buffer_.find('\n', start);
    if (nl == std::string::npos) break;
    std::string_view line(buffer_.data() + start, nl - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    process_line(line, out);
    start = nl + 1;
  }
  buffer_.erase(0, start);
  return out;
}

std::vector<ServerSentEvent> SseParser::finish() {
  std::vector<ServerSentEvent> out;
  if (!buffer_.empty()) {
    std::string line = std::move(buffer_);
    buffer_.clear();
    if (!line.empty() && line.back() == '\r') line.pop_back();
    process_line(line, out);
  }
  dispatch(out);
  return out;
}

void SseParser::process_line(std::string_view line, std::vector<ServerSentEvent>& out) {
  if (line.empty()) {
    dispatch(out);
    return;
  }
  if (line.front() == ':') return;

  std::string_view field = line;
  std::string_view value;
  if (const auto colon = line.find(':'); colon != std::string_view::npos) {
    field = line.substr(0, colon);
    value = line.substr(colon + 1);
    if (!value.empty() && value.front() == ' ') value.remove_prefix(1);
  }

  if (field == "data") {
    if (has_data_) current_.data.push_back('\n');
    current_.data.append(value);
    has_data_ = true;
  } else if (field == "event") {
    current_.event = std::string(value);
  }
}

void SseParser::dispatch(std::vector<ServerSentEvent>& out) {
  if (has_data_) out.push_back(std::move(current_));
  current_ = ServerSentEvent{};
  has_data_ = false;
}

}  // namespace ttscale
