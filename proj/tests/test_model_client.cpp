#include <random>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "test_support.hpp"
#include "ttscale/model_client.hpp"
#include "ttscale/scripted_model.hpp"

namespace ttscale {
namespace {

using testing::script;
using testing::words;

// Emits a fixed list of chunks regardless of the request.
class ChunkBackend final : public Backend {
 public:
  explicit ChunkBackend(std::vector<std::string> chunks) : chunks_(std::move(chunks)) {}
  std::string name() const override { return "chunks"; }
  void generate(const GenerationRequest&, const ChunkSink& sink) const override {
    for (const auto& c : chunks_) {
      if (!sink(c)) return;
    }
  }

 private:
  std::vector<std::string> chunks_;
};

TEST(StreamGenerate, StopsAtTerminalMarker) {
  const auto model = script({{{"emit", "a b c"}, {"terminal_marker", "<END>"}}});
  GenerationRequest req;
  req.prompt = "p";
  req.max_new_tokens = 10;
  req.stop_on = "<END>";
  const auto r = collect_stream(model, req);
  ASSERT_EQ(r.events.size(), 3u);
  EXPECT_EQ(r.cause, StopCause::marker);
  EXPECT_EQ(r.text(), "a b c");
  for (std::size_t i = 0; i < r.events.size(); ++i) EXPECT_EQ(r.events[i].ordinal, i);
}

TEST(StreamGenerate, CapTruncates) {
  const auto model = script({{{"emit", words(10)}}});
  GenerationRequest req;
  req.max_new_tokens = 5;
  const auto r = collect_stream(model, req);
  EXPECT_EQ(r.events.size(), 5u);
  EXPECT_EQ(r.cause, StopCause::cap);
}

TEST(StreamGenerate, BackendStopWithoutMarker) {
  const auto model = script({{{"emit", "x y"}}});
  GenerationRequest req;
  req.stop_on = "</think>";
  const auto r = collect_stream(model, req);
  EXPECT_EQ(r.cause, StopCause::backend_stop);
  EXPECT_EQ(r.events.size(), 2u);
}

TEST(StreamGenerate, TraceCeilingIsEightK) {
  EXPECT_EQ(GenerationRequest{}.max_new_tokens, 8192u);
  const auto model = script({{{"emit", words(9000)}}});
  const auto r = collect_stream(model, GenerationRequest{});
  EXPECT_EQ(r.events.size(), 8192u);
  EXPECT_EQ(r.cause, StopCause::cap);
}

TEST(StreamGenerate, DefaultsAreGreedyWithSeed42) {
  GenerationRequest req;
  EXPECT_EQ(req.temperature, 0.0);
  EXPECT_EQ(req.seed, 42u);
}

TEST(StreamGenerate, RejectsInvalidRequests) {
  const auto model = script({{{"emit", "x"}}});
  GenerationRequest req;
  req.max_new_tokens = 0;
  EXPECT_THROW(collect_stream(model, req), std::invalid_argument);
  req.max_new_tokens = 1;
  req.temperature = -0.1;
  EXPECT_THROW(collect_stream(model, req), std::invalid_argument);
  req.temperature = 0;
  req.stop_on = "";
  EXPECT_THROW(collect_stream(model, req), std::invalid_argument);
}

TEST(StreamGenerate, MarkerSplitAcrossChunks) {
  const ChunkBackend backend({"think", "ing <|im_", "start|>ans", "wer", " tail"});
  GenerationRequest req;
  req.stop_on = "<|im_start|>answer";
  const auto r = collect_stream(backend, req);
  EXPECT_EQ(r.cause, StopCause::marker);
  EXPECT_EQ(r.text(), "thinking ");
}

TEST(StreamGenerate, HeldPrefixReleasedWhenMarkerDoesNotFollow) {
  const ChunkBackend backend({"a", "<|im_", "x", "b"});
  GenerationRequest req;
  req.stop_on = "<|im_start|>answer";
  const auto r = collect_stream(backend, req);
  EXPECT_EQ(r.cause, StopCause::backend_stop);
  EXPECT_EQ(r.tokens(), (std::vector<std::string>{"a", "<|im_", "x", "b"}));
}

// Reference: what a consumer should see is the concatenated stream up to
// the first marker occurrence, delivered as at most `cap` events.
TEST(StreamGenerate, RandomChunkingMatchesConcatenationOracle) {
  std::mt19937_64 rng(7);
  const std::string marker = "<|im_start|>answer";
  const std::string alphabet = "ab <|>_imstart";
  for (int trial = 0; trial < 2000; ++trial) {
    std::string full;
    const std::size_t len = rng() % 60;
    for (std::size_t i = 0; i < len; ++i) full += alphabet[rng() % alphabet.size()];
    if (rng() % 2 == 0) full.insert(rng() % (full.size() + 1), marker);
    std::vector<std::string> chunks;
    for (std::size_t i = 0; i < full.size();) {
      const std::size_t n = 1 + rng() % 6;
      chunks.push_back(full.substr(i, n));
      i += n;
    }
    const ChunkBackend backend(chunks);
    GenerationRequest req;
    req.stop_on = marker;
    req.max_new_tokens = 1 + rng() % 20;
    const auto r = collect_stream(backend, req);

    const auto pos = full.find(marker);
    const std::string expected = pos == std::string::npos ? full : full.substr(0, pos);
    ASSERT_LE(r.events.size(), req.max_new_tokens);
    ASSERT_EQ(expected.compare(0, r.text().size(), r.text()), 0) << full;
    ASSERT_EQ(r.text().find(marker), std::string::npos);
    switch (r.cause) {
      case StopCause::cap: ASSERT_EQ(r.events.size(), req.max_new_tokens); break;
      case StopCause::marker: ASSERT_EQ(r.text(), expected); break;
      case StopCause::backend_stop:
        ASSERT_EQ(pos, std::string::npos);
        ASSERT_EQ(r.text(), full);
        break;
    }
  }
}

TEST(ScriptedModel, FirstMatchingEntryWins) {
  const auto model = script({{{"suffix", "Wait."}, {"emit", "forced"}},
                             {{"contains", "Q1"}, {"emit", "one"}},
                             {{"emit", "fallback"}}});
  GenerationRequest req;
  req.prompt = "Q1 and Wait.";
  EXPECT_EQ(collect_stream(model, req).text(), "forced");
  req.prompt = "Q1 plain";
  EXPECT_EQ(collect_stream(model, req).text(), "one");
  req.prompt = "other";
  EXPECT_EQ(collect_stream(model, req).text(), "fallback");
}

TEST(ScriptedModel, ContextIncludesContinuation) {
  const auto model = script({{{"suffix", "Wait."}, {"emit", "more"}}, {{"emit", "first"}}});
  GenerationRequest req;
  req.prompt = "question";
  req.continuation = "thinking Wait.";
  EXPECT_EQ(collect_stream(model, req).text(), "more");
}

TEST(ScriptedModel, NoMatchGivesEmptyStream) {
  const auto model = script({{{"suffix", "never"}, {"emit", "x"}}});
  const auto r = collect_stream(model, GenerationRequest{});
  EXPECT_TRUE(r.events.empty());
  EXPECT_EQ(r.cause, StopCause::backend_stop);
}

TEST(ScriptedModel, ReplayIsByteIdentical) {
  const auto model = script({{{"emit", "alpha  beta\n gamma"}, {"terminal_marker", "END"}}});
  GenerationRequest req;
  req.prompt = "p";
  const auto a = collect_stream(model, req);
  const auto b = collect_stream(model, req);
  EXPECT_EQ(a.tokens(), b.tokens());
  EXPECT_EQ(a.tokens(), (std::vector<std::string>{"alpha", "  beta", "\n gamma", "END"}));
}

TEST(ScriptedModel, TokenizeReassembles) {
  const std::string text = " lead two\tthree\n\nfour";
  std::string joined;
  for (const auto& t : ScriptedModel::tokenize(text)) joined += t;
  EXPECT_EQ(joined, text);
  EXPECT_EQ(ScriptedModel::tokenize(text).size(), 4u);
}

TEST(ScriptedModel, RejectsEmptyScriptAndUnknownFields) {
  EXPECT_THROW(ScriptedModel({}), std::invalid_argument);
  EXPECT_THROW(script({{{"emitt", "x"}}}), std::invalid_argument);
  EXPECT_THROW(script({{{"emit", "x"}, {"error", {{"kind", "boom"}}}}}), std::invalid_argument);
}

TEST(ScriptedModel, ScriptedFailuresAreClassified) {
  const auto model = script({{{"emit", "a b c"}, {"error", {{"kind", "timeout"}, {"after", 2}}}}});
  std::vector<std::string> seen;
  try {
    stream_generate(model, GenerationRequest{}, [&](const TokenEvent& e) { seen.push_back(e.text); });
    FAIL() << "expected a BackendError";
  } catch (const BackendError& e) {
    EXPECT_EQ(e.kind(), BackendErrorKind::timeout);
    EXPECT_TRUE(e.retryable());
  }
  EXPECT_EQ(seen.size(), 2u);
}

TEST(ProbeAnswer, ReturnsFullText) {
  const auto model = script({{{"emit", "so \\boxed{B}"}}});
  EXPECT_NE(probe_answer(model, "prompt").find("\\boxed{B}"), std::string::npos);
  EXPECT_EQ(probe_answer(model, "prompt"), probe_answer(model, "prompt"));
}

TEST(ProbeAnswer, TimeoutSurfacesWithoutPartialText) {
  const auto model = script({{{"emit", "partial text"}, {"error", {{"kind", "timeout"}, {"after", 1}}}}});
  try {
    (void)probe_answer(model, "prompt");
    FAIL() << "expected a BackendError";
  } catch (const BackendError& e) {
    EXPECT_EQ(e.kind(), BackendErrorKind::timeout);
    EXPECT_TRUE(e.retryable());
  }
}

TEST(BackendError, RetryClassification) {
  EXPECT_TRUE(BackendError(BackendErrorKind::connection, "x").retryable());
  EXPECT_TRUE(BackendError(BackendErrorKind::truncated, "x").retryable());
  EXPECT_TRUE(BackendError(BackendErrorKind::status, "x", 503).retryable());
  EXPECT_TRUE(BackendError(BackendErrorKind::status, "x", 429).retryable());
  EXPECT_FALSE(BackendError(BackendErrorKind::status, "x", 400).retryable());
  EXPECT_FALSE(BackendError(BackendErrorKind::protocol, "x").retryable());
}

TEST(WithRetries, RetriesTransientErrorsTwice) {
  RetryPolicy policy{2, std::chrono::milliseconds(0)};
  int calls = 0;
  EXPECT_THROW(with_retries(policy,
                            [&]() -> int {
                              ++calls;
                              throw BackendError(BackendErrorKind::connection, "down");
                            }),
               BackendError);
  EXPECT_EQ(calls, 3);

  calls = 0;
  EXPECT_THROW(with_retries(policy,
                            [&]() -> int {
                              ++calls;
                              throw BackendError(BackendErrorKind::status, "bad", 400);
                            }),
               BackendError);
  EXPECT_EQ(calls, 1);

  calls = 0;
  EXPECT_EQ(with_retries(policy,
                         [&] {
                           if (++calls < 3) throw BackendError(BackendErrorKind::timeout, "slow");
                           return 7;
                         }),
            7);
}

}  // namespace
}  // namespace ttscale
