// Copyright 2026 The promptprobe Authors. All rights reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "promptprobe/vlm.hpp"

#include <gtest/gtest.h>

#include <fstream>

#include "promptprobe/errors.hpp"
#include "promptprobe/hash.hpp"
#include "support.hpp"

namespace promptprobe {
namespace {

using nlohmann::json;
using testing::chat_body;
using testing::CountingVlmBackend;
using testing::ScratchDir;
using testing::ScriptedTransport;

RgbImage sample_image() {
  RgbImage img(6, 4, {10, 20, 30});
  img.set(1, 1, {200, 0, 0});
  return img;
}

PromptVariant sample_prompt(const std::string& text = "the red mug") {
  return make_prompt_variant(text, DetailLevel::standard, "img", "t", Provenance::fixture,
                             "initial.natural_language", "m");
}

TEST(VlmRequest, KeyCoversEveryDeterminingField) {
  VlmRequest base{"initial.natural_language", "instr", "", "hash", "model", {}};
  const std::string key = base.cache_key();
  EXPECT_EQ(key.size(), 64u);
  EXPECT_EQ(base.cache_key(), key);

  auto changed = [&](auto mutate) {
    VlmRequest r = base;
    mutate(r);
    return r.cache_key() != key;
  };
  EXPECT_TRUE(changed([](VlmRequest& r) { r.template_id = "other"; }));
  EXPECT_TRUE(changed([](VlmRequest& r) { r.instruction += " "; }));
  EXPECT_TRUE(changed([](VlmRequest& r) { r.input_text = "x"; }));
  EXPECT_TRUE(changed([](VlmRequest& r) { r.image_hash = "h2"; }));
  EXPECT_TRUE(changed([](VlmRequest& r) { r.model_id = "m2"; }));
  EXPECT_TRUE(changed([](VlmRequest& r) { r.decoding.temperature = 0.7; }));
  EXPECT_TRUE(changed([](VlmRequest& r) { r.decoding.temperature.reset(); }));
  EXPECT_TRUE(changed([](VlmRequest& r) { r.decoding.max_tokens = 64; }));
}

TEST(VlmCache, MissWhenADecodingParameterChanges) {
  ScratchDir dir("cache");
  ExchangeStore store(dir.path(), false);
  VlmSettings settings;
  settings.endpoint = "http://unused";
  CountingVlmBackend backend("a mug");
  const RgbImage img = sample_image();

  VlmClient first(settings, RunMode::cached, &backend, &store);
  EXPECT_EQ(first.generate_initial_prompt(img, DetailLevel::standard, "img", "t").provenance,
            Provenance::live);
  EXPECT_EQ(first.generate_initial_prompt(img, DetailLevel::standard, "img", "t").provenance,
            Provenance::cache);
  EXPECT_EQ(backend.calls(), 1);

  settings.decoding.temperature = 0.2;
  VlmClient second(settings, RunMode::cached, &backend, &store);
  second.generate_initial_prompt(img, DetailLevel::standard, "img", "t");
  EXPECT_EQ(backend.calls(), 2);
  EXPECT_EQ(second.stats().lookups, 1u);
  EXPECT_EQ(second.stats().hits, 0u);

  // A different level is a different template rendering and misses too.
  second.generate_initial_prompt(img, DetailLevel::overdetailed, "img", "t");
  EXPECT_EQ(backend.calls(), 3);
}

TEST(VlmCache, EntriesAreContentAddressedFiles) {
  ScratchDir dir("entries");
  ExchangeStore store(dir.path(), false);
  VlmCache cache(store);
  const VlmRequest req{"t", "i", "", "h", "m", {}};
  EXPECT_FALSE(cache.cache_get(req));
  cache.cache_put(req, {"answer", "2026-01-01T00:00:00Z", "abc"});
  const auto path = store.path_for(req.cache_key());
  EXPECT_EQ(path.filename(), req.cache_key() + ".json");
  ASSERT_TRUE(std::filesystem::exists(path));
  std::ifstream in(path);
  const json entry = json::parse(in);
  EXPECT_EQ(entry.at("key"), req.cache_key());
  EXPECT_EQ(entry.at("request"), req.to_json());
  EXPECT_EQ(cache.cache_get(req)->text, "answer");
}

TEST(Replay, MissRaisesReplayMissWithTheKey) {
  ScratchDir dir("replay");
  ExchangeStore store(dir.path(), true);
  CountingVlmBackend backend;
  VlmClient client({}, RunMode::replay, &backend, &store);
  try {
    client.generate_initial_prompt(sample_image(), DetailLevel::standard, "img", "t");
    FAIL() << "expected ReplayMiss";
  } catch (const ReplayMiss& e) {
    EXPECT_EQ(e.key().size(), 64u);
    EXPECT_NE(std::string(e.what()).find("replay miss: " + e.key()), std::string::npos);
  }
  EXPECT_EQ(backend.calls(), 0);
}

TEST(Replay, ServesRecordedAnswersWithoutTheNetwork) {
  ScratchDir dir("record");
  const RgbImage img = sample_image();
  {
    ExchangeStore store(dir.path(), false);
    CountingVlmBackend backend("the red mug");
    VlmClient client({}, RunMode::live, &backend, &store);
    client.generate_initial_prompt(img, DetailLevel::pragmatic_ambiguity, "img", "t");
    client.enhance_key_object(img, sample_prompt());
    EXPECT_EQ(backend.calls(), 2);
  }
  ScriptedTransport transport;
  ChatCompletionsBackend network(transport, "http://127.0.0.1:9/v1", "token");
  ExchangeStore store(dir.path(), true);
  VlmClient client({}, RunMode::replay, &network, &store);
  const auto p = client.generate_initial_prompt(img, DetailLevel::pragmatic_ambiguity, "img", "t");
  EXPECT_EQ(p.text, "the red mug");
  EXPECT_EQ(p.provenance, Provenance::replay);
  EXPECT_EQ(client.enhance_key_object(img, sample_prompt()).text, "the red mug");
  EXPECT_EQ(transport.calls(), 0);
  EXPECT_EQ(client.stats().hits, 2u);
}

TEST(Replay, CorruptedEntryIsAReplayError) {
  ScratchDir dir("corrupt");
  const RgbImage img = sample_image();
  VlmRequest probe;
  {
    ExchangeStore store(dir.path(), false);
    CountingVlmBackend backend("x");
    VlmClient client({}, RunMode::live, &backend, &store);
    client.generate_initial_prompt(img, DetailLevel::standard, "img", "t");
  }
  for (const auto& entry : std::filesystem::directory_iterator(dir.path())) {
    std::ofstream(entry.path(), std::ios::trunc) << "{not json";
  }
  ExchangeStore store(dir.path(), true);
  VlmClient client({}, RunMode::replay, nullptr, &store);
  EXPECT_THROW(client.generate_initial_prompt(img, DetailLevel::standard, "img", "t"), ReplayError);
}

TEST(Replay, StoreIsReadOnlyAndMustExist) {
  ScratchDir dir("ro");
  EXPECT_THROW(ExchangeStore(dir / "missing", true), ConfigError);
  ExchangeStore store(dir.path(), true);
  EXPECT_THROW(store.put(json{{"a", 1}}, json{{"b", 2}}), Error);
}

TEST(ChatCompletions, PayloadShape) {
  ScriptedTransport transport;
  ChatCompletionsBackend backend(transport, "https://api.example.test/v1/", "sk-test");
  VlmRequest req{"enhance.key_object_extraction", "system text", "the red mug", "h",
                 "gpt-5-2025-08-07", {}};
  const json payload = backend.build_payload(req, sample_image());
  EXPECT_EQ(payload.at("model"), "gpt-5-2025-08-07");
  EXPECT_EQ(payload.at("temperature"), 0.0);
  EXPECT_FALSE(payload.contains("max_tokens"));
  const json& messages = payload.at("messages");
  ASSERT_EQ(messages.size(), 2u);
  EXPECT_EQ(messages[0].at("role"), "system");
  EXPECT_EQ(messages[0].at("content"), "system text");
  const json& user = messages[1].at("content");
  ASSERT_EQ(user.size(), 2u);
  EXPECT_EQ(user[0].at("text"), "Text prompt: the red mug");
  const std::string url = user[1].at("image_url").at("url");
  EXPECT_EQ(url.rfind("data:image/png;base64,", 0), 0u);
  EXPECT_EQ(url.substr(22), base64_encode(encode_png(sample_image())));

  req.input_text.clear();
  req.decoding = {std::nullopt, 32};
  const json initial = backend.build_payload(req, sample_image());
  EXPECT_EQ(initial.at("messages")[1].at("content").size(), 1u);
  EXPECT_FALSE(initial.contains("temperature"));
  EXPECT_EQ(initial.at("max_tokens"), 32);

  transport.push(200, chat_body("red mug"));
  EXPECT_EQ(backend.complete(req, sample_image(), {}).text, "red mug");
  EXPECT_EQ(transport.last_url(), "https://api.example.test/v1/chat/completions");
  ASSERT_EQ(transport.last_headers().size(), 1u);
  EXPECT_EQ(transport.last_headers()[0].second, "Bearer sk-test");
}

TEST(ChatCompletions, ParsesStringAndPartContent) {
  EXPECT_EQ(ChatCompletionsBackend::parse_reply(chat_body("cup")), "cup");
  EXPECT_EQ(ChatCompletionsBackend::parse_reply(
                R"({"choices":[{"message":{"content":[{"type":"text","text":"a "},{"type":"text","text":"cup"}]}}]})"),
            "a cup");
  EXPECT_THROW(ChatCompletionsBackend::parse_reply("{}"), VlmError);
  EXPECT_THROW(ChatCompletionsBackend::parse_reply("nope"), VlmError);
}

TEST(Retry, TransientFailuresBackOffExponentially) {
  ScriptedTransport transport;
  transport.push(503, "busy");
  transport.push_transport_error();
  transport.push(200, chat_body("  the mug  "));
  ChatCompletionsBackend backend(transport, "http://x/v1", "");
  std::vector<double> sleeps;
  VlmClient client({}, RunMode::live, &backend, nullptr,
                   [&](std::chrono::duration<double> d) { sleeps.push_back(d.count()); });
  const auto p = client.generate_initial_prompt(sample_image(), DetailLevel::standard, "i", "t");
  EXPECT_EQ(p.text, "the mug");
  EXPECT_EQ(transport.calls(), 3);
  EXPECT_EQ(sleeps, (std::vector<double>{1.0, 2.0}));
  EXPECT_TRUE(transport.last_headers().empty());  // no token, no header
}

TEST(Retry, GivesUpAfterThreeAttempts) {
  ScriptedTransport transport({429, "slow down"});
  ChatCompletionsBackend backend(transport, "http://x/v1", "k");
  int sleeps = 0;
  VlmClient client({}, RunMode::live, &backend, nullptr,
                   [&](std::chrono::duration<double>) { ++sleeps; });
  EXPECT_THROW(client.generate_initial_prompt(sample_image(), DetailLevel::standard, "i", "t"),
               VlmError);
  EXPECT_EQ(transport.calls(), 3);
  EXPECT_EQ(sleeps, 2);
}

TEST(Retry, ClientErrorsAreNotRetried) {
  ScriptedTransport transport({401, "unauthorized"});
  ChatCompletionsBackend backend(transport, "http://x/v1", "k");
  VlmClient client({}, RunMode::live, &backend, nullptr, [](std::chrono::duration<double>) {});
  EXPECT_THROW(client.generate_initial_prompt(sample_image(), DetailLevel::standard, "i", "t"),
               VlmError);
  EXPECT_EQ(transport.calls(), 1);
}

TEST(VlmClient, EmptyAnswersAreErrors) {
  CountingVlmBackend backend("   ");
  VlmClient client({}, RunMode::live, &backend, nullptr);
  EXPECT_THROW(client.generate_initial_prompt(sample_image(), DetailLevel::standard, "i", "t"),
               VlmError);
  EXPECT_THROW(client.enhance_key_object(sample_image(), sample_prompt()), VlmError);
  EXPECT_THROW(client.enhance_semantic_category(sample_image(), sample_prompt()), VlmError);
}

TEST(VlmClient, RawPassesThroughWithoutACall) {
  CountingVlmBackend backend;
  VlmClient client({}, RunMode::live, &backend, nullptr);
  const EnhancedPrompt e = client.enhance(EnhancementMethod::raw, sample_image(), sample_prompt());
  EXPECT_EQ(e.text, "the red mug");
  EXPECT_FALSE(e.category_valid);
  EXPECT_EQ(backend.calls(), 0);
}

TEST(VlmClient, EnhancementKeyIncludesThePrompt) {
  ScratchDir dir("inputs");
  ExchangeStore store(dir.path(), false);
  CountingVlmBackend backend("mug");
  VlmClient client({}, RunMode::cached, &backend, &store);
  client.enhance_key_object(sample_image(), sample_prompt("the red mug"));
  client.enhance_key_object(sample_image(), sample_prompt("a mug for tea"));
  client.enhance_key_object(sample_image(), sample_prompt("the red mug"));
  EXPECT_EQ(backend.calls(), 2);
}

TEST(FixtureBackend, ScriptedAnswers) {
  const json doc = {
      {"initial", {{{"image_id", "a"}, {"target_id", "t"}, {"detail_level", "standard"}, {"text", "a cup"}}}},
      {"enhance",
       {{{"method", "key_object_extraction"}, {"input_text", "a cup"}, {"text", "cup"}},
        {{"method", "key_object_extraction"}, {"image_id", "b"}, {"input_text", "a cup"}, {"text", "mug"}}}}};
  auto backend = FixtureVlmBackend::from_json(doc);
  VlmClient client({}, RunMode::live, &backend, nullptr);
  const auto p = client.generate_initial_prompt(sample_image(), DetailLevel::standard, "a", "t");
  EXPECT_EQ(p.text, "a cup");
  EXPECT_EQ(p.provenance, Provenance::fixture);
  EXPECT_EQ(client.enhance_key_object(sample_image(), p).text, "cup");
  PromptVariant on_b = p;
  on_b.image_id = "b";
  EXPECT_EQ(client.enhance_key_object(sample_image(), on_b).text, "mug");
  EXPECT_THROW(client.generate_initial_prompt(sample_image(), DetailLevel::overdetailed, "a", "t"),
               VlmError);
}

}  // namespace
}  // namespace promptprobe
