#include "ttscale/chat_backend.hpp"

#include <cstdlib>
#include <stdexcept>

#include "httplib.h"
#include "ttscale/sse.hpp"

namespace ttscale {

namespace {

constexpr std::size_t kMarkerSlackTokens = 16;
constexpr std::size_t kMaxErrorBody = 4096;

BackendErrorKind classify(httplib::Error error) {
  switch (error) {
    case httplib::Error::Read:
    case httplib::Error::Write:
      return BackendErrorKind::timeout;
    case httplib::Error::Compression:
    case httplib::Error::ExceedRedirectCount:
      return BackendErrorKind::protocol;
    default:
      return BackendErrorKind::connection;
  }
}

}  // namespace

ChatCompletionsBackend::ChatCompletionsBackend(ChatBackendOptions options)
    : options_(std::move(options)) {
  const auto scheme_end = options_.base_url.find("://");
  if (scheme_end == std::string::npos) {
    throw std::invalid_argument("base URL must include a scheme: " + options_.base_url);
  }
  const auto path_start = options_.base_url.find('/', scheme_end + 3);
  origin_ = options_.base_url.substr(0, path_start);
  std::string prefix =
      path_start == std::string::npos ? std::string() : options_.base_url.substr(path_start);
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  path_ = prefix + "/v1/chat/completions";
}

ChatBackendOptions ChatCompletionsBackend::options_from_env(std::string base_url,
                                                            std::string model) {
  ChatBackendOptions options;
  options.base_url = std::move(base_url);
  options.model = std::move(model);
  if (const char* key = std::getenv(kApiKeyEnv)) options.api_key = key;
  return options;
}

nlohmann::json ChatCompletionsBackend::request_body(const GenerationRequest& request) const {
  nlohmann::json messages = nlohmann::json::array();
  messages.push_back({{"role", "user"}, {"content", request.prompt}});
  nlohmann::json body = {
      {"model", options_.model},
      {"temperature", request.temperature},
      {"seed", request.seed},
      {"max_tokens", request.max_new_tokens + (request.stop_on ? kMarkerSlackTokens : 0)},
      {"stream", true},
  };
  if (!request.continuation.empty()) {
    messages.push_back({{"role", "assistant"}, {"content", request.continuation}});
    body["continue_final_message"] = true;
    body["add_generation_prompt"] = false;
  }
  body["messages"] = std::move(messages);
  return body;
}

void ChatCompletionsBackend::generate(const GenerationRequest& request,
                                      const ChunkSink& sink) const {
  httplib::Client client(origin_);
  client.set_connection_timeout(options_.connect_timeout);
  client.set_read_timeout(options_.read_timeout);

  httplib::Request http;
  http.method = "POST";
  http.path = path_;
  http.body = request_body(request).dump();
  http.set_header("Content-Type", "application/json");
  http.set_header("Accept", "text/event-stream");
  if (!options_.api_key.empty()) http.set_header("Authorization", "Bearer " + options_.api_key);

  int status = 0;
  std::string error_body;
  bool done = false;
  bool consumer_stopped = false;
  std::optional<BackendError> failure;
  SseParser parser;

  auto handle_events = [&](std::vector<ServerSentEvent> events) {
    for (auto& event : events) {
      if (event.data == "[DONE]") {
        done = true;
        return false;
      }
      nlohmann::json chunk = nlohmann::json::parse(event.data, nullptr, false);
      if (chunk.is_discarded()) {
        failure.emplace(BackendErrorKind::protocol, "unparseable stream chunk: " + event.data);
        return false;
      }
      if (chunk.contains("error")) {
        failure.emplace(BackendErrorKind::status, "backend reported: " + chunk["error"].dump(),
                        500);
        return false;
      }
      if (!chunk.contains("choices") || chunk["choices"].empty()) continue;
      const auto& delta = chunk["choices"][0].value("delta", nlohmann::json::object());
      if (!delta.contains("content") || !delta["content"].is_string()) continue;
      const auto content = delta["content"].get<std::string>();
      if (!content.empty() && !sink(content)) {
        consumer_stopped = true;
        return false;
      }
    }
    return true;
  };

  http.response_handler = [&](const httplib::Response& res) {
    status = res.status;
    return true;
  };
  http.content_receiver = [&](const char* data, std::size_t length, std::uint64_t,
                              std::uint64_t) {
    if (status < 200 || status >= 300) {
      error_body.append(data, std::min(length, kMaxErrorBody - std::min(kMaxErrorBody,
                                                                         error_body.size())));
      return true;
    }
    return handle_events(parser.feed(std::string_view(data, length)));
  };

  httplib::Response response;
  httplib::Error error = httplib::Error::Success;
  const bool ok = client.send(http, response, error);

  if (failure) throw *failure;
  if (consumer_stopped || done) return;
  if (!ok && error != httplib::Error::Canceled) {
    throw BackendError(classify(error), httplib::to_string(error) + " (" + origin_ + ")");
  }
  if (status < 200 || status >= 300) {
    throw BackendError(BackendErrorKind::status,
                       "HTTP " + std::to_string(status) + ": " + error_body, status);
  }
  handle_events(parser.finish());
  if (failure) throw *failure;
  if (!done && !consumer_stopped) {
    throw BackendError(BackendErrorKind::truncated, "stream ended without [DONE]");
  }
}

}  // namespace ttscale
