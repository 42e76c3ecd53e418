#pragma once

#include <chrono>
#include <string>

#include "json.hpp"

#include "ttscale/model_client.hpp"

namespace ttscale {

inline constexpr const char* kApiKeyEnv = "M1_API_KEY";
inline constexpr const char* kBaseUrlEnv = "M1_BASE_URL";

struct ChatBackendOptions {
  /// scheme://host[:port][/prefix]; requests go to <prefix>/v1/chat/completions.
  std::string base_url = "http://127.0.0.1:30000";
  std::string model;
  /// Sent as a bearer token when nonempty.
  std::string api_key;
  std::chrono::seconds connect_timeout{10};
  std::chrono::seconds read_timeout{600};
};

/// Streaming client for an OpenAI-style chat-completions server.
///
/// The prompt is sent as a single user message. A nonempty continuation is
/// sent as a trailing assistant message together with the
/// `continue_final_message` / `add_generation_prompt` extensions understood
/// by SGLang and vLLM, so the server extends it instead of opening a new turn.
class ChatCompletionsBackend final : public Backend {
 public:
  explicit ChatCompletionsBackend(ChatBackendOptions options);

  /// Options with the API key taken from M1_API_KEY.
  static ChatBackendOptions options_from_env(std::string base_url, std::string model);

  [[nodiscard]] nlohmann::json request_body(const GenerationRequest& request) const;
  [[nodiscard]] const std::string& origin() const { return origin_; }
  [[nodiscard]] const std::string& path() const { return path_; }

  [[nodiscard]] std::string name() const override { return "chat:" + options_.model; }
  void generate(const GenerationRequest& request, const ChunkSink& sink) const override;

 private:
  ChatBackendOptions options_;
  std::string origin_;
  std::string path_;
};

}  // namespace ttscale
