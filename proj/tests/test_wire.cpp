#include <atomic>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <gtest/gtest.h>

#include "httplib.h"
#include "json.hpp"

#include "ttscale/chat_backend.hpp"
#include "ttscale/model_client.hpp"
#include "ttscale/sse.hpp"

namespace ttscale {
namespace {

using nlohmann::json;

std::string sse_chunk(const std::string& content) {
  json chunk = {{"choices", json::array({{{"index", 0}, {"delta", {{"content", content}}}}})}};
  return "data: " + chunk.dump() + "\n\n";
}

// Serves /v1/chat/completions on an ephemeral port; `reply` builds the body.
class FakeServer {
 public:
  using Reply = std::function<void(const httplib::Request&, httplib::Response&)>;

  explicit FakeServer(Reply reply) : reply_(std::move(reply)) {
    server_.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
      {
        std::lock_guard lock(mutex_);
        bodies_.push_back(req.body);
        auth_.push_back(req.get_header_value("Authorization"));
      }
      reply_(req, res);
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~FakeServer() {
    server_.stop();
    thread_.join();
  }

  [[nodiscard]] std::string base_url() const { return "http://127.0.0.1:" + std::to_string(port_); }
  [[nodiscard]] json last_body() const {
    std::lock_guard lock(mutex_);
    return json::parse(bodies_.back());
  }
  [[nodiscard]] std::string last_auth() const {
    std::lock_guard lock(mutex_);
    return auth_.back();
  }

 private:
  Reply reply_;
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
  mutable std::mutex mutex_;
  std::vector<std::string> bodies_;
  std::vector<std::string> auth_;
};

ChatCompletionsBackend backend_for(const FakeServer& server) {
  ChatBackendOptions options;
  options.base_url = server.base_url();
  options.model = "m1";
  options.api_key = "secret";
  options.read_timeout = std::chrono::seconds(5);
  return ChatCompletionsBackend(options);
}

void stream_pieces(httplib::Response& res, std::vector<std::string> pieces) {
  res.set_chunked_content_provider("text/event-stream",
                                   [pieces = std::move(pieces)](std::size_t, httplib::DataSink& sink) {
                                     for (const auto& p : pieces) sink.write(p.data(), p.size());
                                     sink.done();
                                     return true;
                                   });
}

TEST(SseParser, HandlesSplitLinesCommentsAndMultiLineData) {
  SseParser parser;
  auto events = parser.feed(": keepalive\r\nda");
  EXPECT_TRUE(events.empty());
  events = parser.feed("ta: one\r\ndata: two\r\n\r\nevent: x\ndata: three\n\n");
  ASSERT_EQ(events.size(), 2u);
  EXPECT_EQ(events[0].data, "one\ntwo");
  EXPECT_EQ(events[1].event.value_or(""), "x");
  EXPECT_EQ(events[1].data, "three");
  EXPECT_TRUE(parser.finish().empty());
  parser.feed("data: tail");
  const auto tail = parser.finish();
  ASSERT_EQ(tail.size(), 1u);
  EXPECT_EQ(tail[0].data, "tail");
}

TEST(ChatBackend, RequestBodyCarriesSamplingAndContinuation) {
  ChatBackendOptions options;
  options.base_url = "http://localhost:1/prefix/";
  options.model = "m1-7B";
  const ChatCompletionsBackend backend(options);
  EXPECT_EQ(backend.origin(), "http://localhost:1");
  EXPECT_EQ(backend.path(), "/prefix/v1/chat/completions");

  GenerationRequest req;
  req.prompt = "Q";
  req.max_new_tokens = 100;
  auto body = backend.request_body(req);
  EXPECT_EQ(body["model"], "m1-7B");
  EXPECT_EQ(body["temperature"], 0.0);
  EXPECT_EQ(body["seed"], 42);
  EXPECT_EQ(body["max_tokens"], 100);
  EXPECT_EQ(body["stream"], true);
  ASSERT_EQ(body["messages"].size(), 1u);
  EXPECT_FALSE(body.contains("continue_final_message"));

  req.continuation = "<|im_start|>think";
  req.stop_on = "<|im_start|>answer";
  body = backend.request_body(req);
  ASSERT_EQ(body["messages"].size(), 2u);
  EXPECT_EQ(body["messages"][1]["role"], "assistant");
  EXPECT_EQ(body["messages"][1]["content"], "<|im_start|>think");
  EXPECT_EQ(body["continue_final_message"], true);
  EXPECT_EQ(body["add_generation_prompt"], false);
  // The client enforces the cap itself; extra room lets it see a marker.
  EXPECT_GT(body["max_tokens"].get<int>(), 100);
}

TEST(ChatBackend, StreamsUntilDone) {
  FakeServer server([](const httplib::Request&, httplib::Response& res) {
    stream_pieces(res, {sse_chunk("Hello"), sse_chunk(" world"), "data: [DONE]\n\n"});
  });
  const auto backend = backend_for(server);
  GenerationRequest req;
  req.prompt = "hi";
  const auto r = collect_stream(backend, req);
  EXPECT_EQ(r.text(), "Hello world");
  EXPECT_EQ(r.events.size(), 2u);
  EXPECT_EQ(r.cause, StopCause::backend_stop);
  EXPECT_EQ(server.last_auth(), "Bearer secret");
  EXPECT_EQ(server.last_body()["messages"][0]["content"], "hi");
}

TEST(ChatBackend, MarkerSplitAcrossSseEvents) {
  FakeServer server([](const httplib::Request&, httplib::Response& res) {
    stream_pieces(res, {sse_chunk("reason"), sse_chunk(" <|im_"), sse_chunk("start|>"),
                        sse_chunk("answer"), sse_chunk(" B"), "data: [DONE]\n\n"});
  });
  const auto backend = backend_for(server);
  GenerationRequest req;
  req.stop_on = "<|im_start|>answer";
  const auto r = collect_stream(backend, req);
  EXPECT_EQ(r.cause, StopCause::marker);
  EXPECT_EQ(r.text(), "reason ");
}

TEST(ChatBackend, CapStopsConsumption) {
  FakeServer server([](const httplib::Request&, httplib::Response& res) {
    std::vector<std::string> pieces;
    for (int i = 0; i < 50; ++i) pieces.push_back(sse_chunk(" t" + std::to_string(i)));
    pieces.push_back("data: [DONE]\n\n");
    stream_pieces(res, pieces);
  });
  const auto backend = backend_for(server);
  GenerationRequest req;
  req.max_new_tokens = 7;
  const auto r = collect_stream(backend, req);
  EXPECT_EQ(r.events.size(), 7u);
  EXPECT_EQ(r.cause, StopCause::cap);
}

TEST(ChatBackend, MissingDoneIsTruncation) {
  FakeServer server([](const httplib::Request&, httplib::Response& res) {
    stream_pieces(res, {sse_chunk("partial")});
  });
  const auto backend = backend_for(server);
  try {
    (void)collect_stream(backend, GenerationRequest{});
    FAIL() << "expected truncation";
  } catch (const BackendError& e) {
    EXPECT_EQ(e.kind(), BackendErrorKind::truncated);
    EXPECT_TRUE(e.retryable());
  }
}

TEST(ChatBackend, ServerErrorStatusIsRetryable) {
  FakeServer server([](const httplib::Request&, httplib::Response& res) {
    res.status = 500;
    res.set_content("{\"error\":\"overloaded\"}", "application/json");
  });
  const auto backend = backend_for(server);
  try {
    (void)collect_stream(backend, GenerationRequest{});
    FAIL() << "expected status error";
  } catch (const BackendError& e) {
    EXPECT_EQ(e.kind(), BackendErrorKind::status);
    EXPECT_EQ(e.status(), 500);
    EXPECT_TRUE(e.retryable());
    EXPECT_NE(std::string(e.what()).find("overloaded"), std::string::npos);
  }
}

TEST(ChatBackend, ClientErrorStatusIsNotRetryable) {
  FakeServer server([](const httplib::Request&, httplib::Response& res) {
    res.status = 401;
    res.set_content("unauthorized", "text/plain");
  });
  const auto backend = backend_for(server);
  try {
    (void)collect_stream(backend, GenerationRequest{});
    FAIL() << "expected status error";
  } catch (const BackendError& e) {
    EXPECT_EQ(e.status(), 401);
    EXPECT_FALSE(e.retryable());
  }
}

TEST(ChatBackend, MalformedChunkIsProtocolError) {
  FakeServer server([](const httplib::Request&, httplib::Response& res) {
    stream_pieces(res, {"data: {not json\n\n", "data: [DONE]\n\n"});
  });
  const auto backend = backend_for(server);
  try {
    (void)collect_stream(backend, GenerationRequest{});
    FAIL() << "expected protocol error";
  } catch (const BackendError& e) {
    EXPECT_EQ(e.kind(), BackendErrorKind::protocol);
    EXPECT_FALSE(e.retryable());
  }
}

TEST(ChatBackend, ConnectionRefused) {
  // A bound socket that never listens refuses connections.
  const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  ASSERT_GE(fd, 0);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  ASSERT_EQ(::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr), 0);
  socklen_t len = sizeof addr;
  ASSERT_EQ(::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len), 0);
  const int port = ntohs(addr.sin_port);
  ChatBackendOptions options;
  options.base_url = "http://127.0.0.1:" + std::to_string(port);
  options.connect_timeout = std::chrono::seconds(2);
  options.read_timeout = std::chrono::seconds(2);
  const ChatCompletionsBackend backend(options);
  try {
    (void)collect_stream(backend, GenerationRequest{});
    FAIL() << "expected connection error";
  } catch (const BackendError& e) {
    EXPECT_EQ(e.kind(), BackendErrorKind::connection);
    EXPECT_TRUE(e.retryable());
  }
  ::close(fd);
}

TEST(ChatBackend, RejectsUrlWithoutScheme) {
  ChatBackendOptions options;
  options.base_url = "localhost:30000";
  EXPECT_THROW(ChatCompletionsBackend{options}, std::invalid_argument);
}

}  // namespace
}  // namespace ttscale
