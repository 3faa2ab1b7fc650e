// Copyright 2026 The fastfish Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "fastfish/config.hpp"
#include "fastfish/dataset.hpp"
#include "fastfish/results.hpp"
#include "fastfish/synthetic.hpp"

#include <gtest/gtest.h>

#include <cstring>
#include <filesystem>

namespace ff = fastfish;
using nlohmann::json;

namespace {

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "fastfish_test_io";
  std::filesystem::create_directories(dir);
  return dir / name;
}

ff::EmbeddingDataset tiny() {
  ff::EmbeddingDataset d;
  d.features.resize(3, 2);
  d.features << 1.5f, -2.0f, 0.0f, 3.25f, 1e-3f, 7.0f;
  d.labels = {0, 2, 1};
  d.num_classes = 3;
  d.metadata = R"({"name":"tiny"})";
  return d;
}

template <typename T>
void poke(std::string& bytes, std::size_t at, T value) {
  std::memcpy(bytes.data() + at, &value, sizeof(T));
}

json minimal_config() {
  return json::parse(R"({"dataset": {"train": "a.dalb", "test": "b.dalb"},
                         "strategy": {"name": "bait:binary"},
                         "al": {"initial_labeled": 20, "acquisition_size": 10, "total_budget": 200}})");
}

template <typename Fn>
std::vector<std::string> config_problems(Fn&& fn) {
  try {
    fn();
  } catch (const ff::ConfigError& e) {
    return e.problems();
  }
  return {};
}

}  // namespace

TEST(Dalb, HeaderLayout) {
  const std::string bytes = ff::encode_embeddings(tiny());
  ASSERT_EQ(bytes.size(), 36u + 3 * 2 * 4 + 3 * 4 + 4 + 15);
  EXPECT_EQ(bytes.substr(0, 4), "DALB");
  std::uint32_t version, dim, classes, meta_len;
  std::uint64_t rows;
  std::memcpy(&version, bytes.data() + 4, 4);
  std::memcpy(&rows, bytes.data() + 8, 8);
  std::memcpy(&dim, bytes.data() + 16, 4);
  std::memcpy(&classes, bytes.data() + 20, 4);
  EXPECT_EQ(version, 1u);
  EXPECT_EQ(rows, 3u);
  EXPECT_EQ(dim, 2u);
  EXPECT_EQ(classes, 3u);
  EXPECT_EQ(bytes[24], 0);
  for (int i = 25; i < 36; ++i) EXPECT_EQ(bytes[static_cast<std::size_t>(i)], 0);
  float f;
  std::memcpy(&f, bytes.data() + 36 + 4, 4);  // row 0, column 1
  EXPECT_EQ(f, -2.0f);
  std::uint32_t label;
  std::memcpy(&label, bytes.data() + 36 + 24 + 4, 4);
  EXPECT_EQ(label, 2u);
  std::memcpy(&meta_len, bytes.data() + 36 + 24 + 12, 4);
  EXPECT_EQ(meta_len, 15u);
  EXPECT_EQ(bytes.substr(bytes.size() - 15), R"({"name":"tiny"})");
}

TEST(Dalb, RoundTripIsByteIdentical) {
  const std::string bytes = ff::encode_embeddings(tiny());
  const auto back = ff::decode_embeddings(bytes);
  EXPECT_EQ(back.labels, tiny().labels);
  EXPECT_EQ(back.metadata, tiny().metadata);
  EXPECT_EQ(ff::encode_embeddings(back), bytes);
  const auto path = scratch("tiny.dalb");
  ff::write_embeddings(tiny(), path);
  EXPECT_EQ(ff::encode_embeddings(ff::read_embeddings(path)), bytes);
  const auto synth = ff::gen_synthetic(50, 3, 4, 2.0, 0.1, 9);
  EXPECT_EQ(ff::encode_embeddings(ff::decode_embeddings(ff::encode_embeddings(synth))), ff::encode_embeddings(synth));
}

TEST(Dalb, RejectsBadMagicVersionAndTruncation) {
  std::string bytes = ff::encode_embeddings(tiny());
  std::string bad = bytes;
  bad[0] = 'X';
  EXPECT_THROW(ff::decode_embeddings(bad), ff::FormatError);
  bad = bytes;
  poke<std::uint32_t>(bad, 4, 2);
  EXPECT_THROW(ff::decode_embeddings(bad), ff::FormatError);
  for (std::size_t cut : {10u, 36u, 50u, 70u, 80u}) {
    try {
      ff::decode_embeddings(bytes.substr(0, cut));
      ADD_FAILURE() << "accepted truncation at " << cut;
    } catch (const ff::FormatError& e) {
      EXPECT_LE(e.offset(), cut);
    }
  }
  EXPECT_THROW(ff::decode_embeddings(bytes + "x"), ff::FormatError);
}

TEST(Dalb, RejectsOutOfRangeLabelAndEmptyDataset) {
  std::string bytes = ff::encode_embeddings(tiny());
  poke<std::uint32_t>(bytes, 36 + 24 + 4, 3);  // label == K
  try {
    ff::decode_embeddings(bytes);
    ADD_FAILURE() << "label K accepted";
  } catch (const ff::ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("record 1"), std::string::npos) << e.what();
  }
  std::string empty = ff::encode_embeddings(tiny()).substr(0, 36);
  poke<std::uint64_t>(empty, 8, 0);
  EXPECT_THROW(ff::decode_embeddings(empty), ff::FormatError);
  ff::EmbeddingDataset none = tiny();
  none.features.resize(0, 2);
  none.labels.clear();
  EXPECT_THROW(ff::validate(none), ff::ValidationError);
}

TEST(Dalb, RejectsNonFiniteFeature) {
  std::string bytes = ff::encode_embeddings(tiny());
  poke<float>(bytes, 36 + 8, std::numeric_limits<float>::quiet_NaN());
  EXPECT_THROW(ff::decode_embeddings(bytes), ff::ValidationError);
}

TEST(Dalb, TakeRows) {
  const auto sub = ff::take_rows(tiny(), std::vector<ff::Index>{2, 0});
  EXPECT_EQ(sub.labels, (std::vector<int>{1, 0}));
  EXPECT_EQ(sub.features(0, 1), 7.0f);
  EXPECT_THROW(ff::take_rows(tiny(), std::vector<ff::Index>{3}), ff::IndexError);
}

TEST(Synthetic, DeterministicAndBalanced) {
  const auto a = ff::gen_synthetic(400, 5, 4, 3.0, 0.0, 2);
  EXPECT_EQ(ff::encode_embeddings(a), ff::encode_embeddings(ff::gen_synthetic(400, 5, 4, 3.0, 0.0, 2)));
  EXPECT_NE(ff::encode_embeddings(a), ff::encode_embeddings(ff::gen_synthetic(400, 5, 4, 3.0, 0.0, 3)));
  std::vector<int> count(4, 0);
  for (int y : a.labels) ++count[static_cast<std::size_t>(y)];
  for (int c : count) EXPECT_EQ(c, 100);
  const auto noisy = ff::gen_synthetic(4000, 5, 4, 3.0, 0.2, 2);
  EXPECT_EQ(noisy.size(), 4000);
  const json meta = json::parse(noisy.metadata);
  EXPECT_EQ(meta["k"], 4);
  EXPECT_EQ(meta["separation"], 3.0);
}

TEST(Config, DefaultsAndStrategyGrammar) {
  const auto c = ff::parse_config(minimal_config(), "/data");
  EXPECT_EQ(c.train_path, std::filesystem::path("/data/a.dalb"));
  EXPECT_EQ(c.seeds.size(), 10u);
  EXPECT_EQ(c.classifier.epochs, 200);
  EXPECT_EQ(c.classifier.batch_size, 128);
  EXPECT_DOUBLE_EQ(c.classifier.learning_rate, 0.2);
  EXPECT_DOUBLE_EQ(c.classifier.weight_decay, 1e-4);
  EXPECT_EQ(ff::strategy_id(c.strategy), "bait:binary");
  EXPECT_EQ(ff::strategy_id(ff::parse_strategy("bait:topc")), "bait:topc:2");
  EXPECT_EQ(ff::strategy_id(ff::parse_strategy("bait:topc:3")), "bait:topc:3");
  EXPECT_EQ(ff::strategy_id(ff::parse_strategy("bait:diag")), "bait:diag");
  EXPECT_EQ(ff::strategy_id(ff::parse_strategy("bait:exact")), "bait:exact");
  for (const char* s : {"random", "margin", "badge", "typiclust"}) EXPECT_EQ(ff::strategy_id(ff::parse_strategy(s)), s);
  EXPECT_THROW(ff::parse_strategy("coreset"), ff::InvalidParameter);
  EXPECT_THROW(ff::parse_strategy("bait:sampled"), ff::InvalidParameter);
}

TEST(Config, CollectsEveryProblem) {
  json doc = minimal_config();
  doc["al"]["acquisition_size"] = 0;
  doc["al"]["bogus"] = 1;
  doc["classifier"] = {{"learning_rate", -1}};
  const auto problems = config_problems([&] { ff::parse_config(doc); });
  ASSERT_GE(problems.size(), 3u);
  std::string all;
  for (const auto& p : problems) all += p + "\n";
  EXPECT_NE(all.find("acquisition_size"), std::string::npos) << all;
  EXPECT_NE(all.find("al.bogus"), std::string::npos) << all;
  EXPECT_NE(all.find("learning_rate"), std::string::npos) << all;
}

TEST(Config, BudgetMustBeReachable) {
  json doc = minimal_config();
  doc["al"]["total_budget"] = 205;
  EXPECT_FALSE(config_problems([&] { ff::parse_config(doc); }).empty());
  doc["al"]["total_budget"] = 20;
  EXPECT_NO_THROW(ff::parse_config(doc));
}

TEST(Config, DottedKeysAndHashOrderInvariance) {
  const json dotted = json::parse(R"({"dataset.train": "a.dalb", "dataset.test": "b.dalb",
      "strategy.name": "bait:binary", "al.initial_labeled": 20, "al.acquisition_size": 10, "al.total_budget": 200})");
  const auto a = ff::parse_config(minimal_config());
  const auto b = ff::parse_config(dotted);
  EXPECT_EQ(ff::config_hash(a), ff::config_hash(b));
  const json reordered = json::parse(R"({"al": {"total_budget": 200, "acquisition_size": 10, "initial_labeled": 20},
      "strategy": {"name": "bait:binary"}, "dataset": {"test": "b.dalb", "train": "a.dalb"}})");
  EXPECT_EQ(ff::config_hash(a), ff::config_hash(ff::parse_config(reordered)));
  EXPECT_EQ(ff::config_hash(a).size(), 16u);
  json other = minimal_config();
  other["strategy"]["name"] = "random";
  EXPECT_NE(ff::config_hash(a), ff::config_hash(ff::parse_config(other)));
  // canonical form parses back to the same config
  EXPECT_EQ(ff::config_hash(ff::parse_config(ff::to_json(a))), ff::config_hash(a));
}

TEST(Config, BaitParams) {
  json doc = minimal_config();
  doc["strategy"] = {{"name", "bait"}, {"params", {{"fim", "topc"}, {"c", 3}, {"mode", "forward_only"}, {"lambda", 0.5}}}};
  const auto c = ff::parse_config(doc);
  EXPECT_EQ(ff::strategy_id(c.strategy), "bait:topc:3");
  const auto& b = std::get<ff::strategy::Bait>(c.strategy);
  EXPECT_EQ(b.mode, ff::GreedyMode::ForwardOnly);
  EXPECT_DOUBLE_EQ(b.lambda, 0.5);
  doc["strategy"]["params"]["nope"] = true;
  EXPECT_FALSE(config_problems([&] { ff::parse_config(doc); }).empty());
}

TEST(Results, RoundTrip) {
  ff::ExperimentConfig cfg = ff::parse_config(minimal_config());
  ff::ResultsHeader h;
  h.config_hash = ff::config_hash(cfg);
  h.strategy = "bait:binary";
  h.config = ff::to_json(cfg);
  std::vector<ff::CycleRecord> recs(2);
  recs[0] = {0, 20, 0.5, 0.01, {3, 4}, "bait:binary", 1};
  recs[1] = {1, 22, 0.625, 0.0, {}, "bait:binary", 1};
  const std::string text = ff::encode_results(h, recs);
  const auto back = ff::decode_results(text);
  EXPECT_EQ(back.records, recs);
  EXPECT_EQ(back.header.config_hash, h.config_hash);
  EXPECT_EQ(ff::encode_results(back.header, back.records), text);
  const auto path = scratch("r.jsonl");
  ff::write_results(h, recs, path);
  EXPECT_EQ(ff::read_results(path).records, recs);
}

TEST(Results, RejectsMalformed) {
  EXPECT_THROW(ff::decode_results(""), ff::ValidationError);
  EXPECT_THROW(ff::decode_results(R"({"type":"cycle","cycle":0})"), ff::ValidationError);
  EXPECT_THROW(ff::decode_results(R"({"type":"header","version":99,"config_hash":"x","strategy":"r","config":{}})"),
               ff::ValidationError);
  EXPECT_THROW(ff::decode_results("not json"), ff::ValidationError);
}
