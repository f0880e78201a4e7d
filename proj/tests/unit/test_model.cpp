// Copyright 2026 The sdkd Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "sdkd/errors.hpp"
#include "sdkd/model.hpp"

namespace sdkd {
namespace {

ModelConfig tiny(Variant v, std::size_t vocab = 20) {
  ModelConfig c = ModelConfig::desk_preset(vocab, v);
  c.model_dim = 16;
  c.ffn_dim = 32;
  c.dropout_rate = 0;
  return c;
}

TokenMatrix random_tokens(std::size_t batch, std::size_t length, std::size_t vocab, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> id(4, static_cast<int>(vocab) - 1);
  std::vector<std::vector<int>> rows(batch, std::vector<int>(length));
  for (auto& r : rows)
    for (auto& x : r) x = id(rng);
  return TokenMatrix::from_rows(rows, 0);
}

TEST(ModelConfig, PresetsAndValidation) {
  const auto paper = ModelConfig::paper_preset(100, Variant::kScenario);
  EXPECT_EQ(paper.model_dim, 256u);
  EXPECT_EQ(paper.num_blocks, 2u);
  EXPECT_EQ(paper.num_heads, 4u);
  EXPECT_EQ(paper.ffn_dim, 1024u);
  const auto desk = ModelConfig::desk_preset(100, Variant::kConventional);
  EXPECT_EQ(desk.model_dim, 64u);
  EXPECT_EQ(desk.num_heads, 2u);
  EXPECT_EQ(desk.ffn_dim, 128u);
  auto bad = desk;
  bad.num_heads = 3;
  EXPECT_THROW(bad.validate(), ContractError);
}

TEST(InitParams, NormalStatistics) {
  ModelConfig c = ModelConfig::desk_preset(200, Variant::kConventional);
  const auto p = init_params<double>(c, 1);
  const auto& table = p.at("encoder.embedding").values();
  ASSERT_GE(table.size(), 10000u);
  double sum = 0, sq = 0;
  for (std::size_t i = 0; i < 10000; ++i) {
    sum += table[i];
    sq += table[i] * table[i];
  }
  const double mean = sum / 10000;
  const double sd = std::sqrt(sq / 10000 - mean * mean);
  EXPECT_GE(sd, 0.009);
  EXPECT_LE(sd, 0.011);
}

TEST(InitParams, DeterministicAndDistinctTables) {
  const auto c = tiny(Variant::kScenario);
  const auto a = init_params<float>(c, 1);
  const auto b = init_params<float>(c, 1);
  EXPECT_EQ(parameter_fingerprint(a), parameter_fingerprint(b));
  EXPECT_NE(parameter_fingerprint(a), parameter_fingerprint(init_params<float>(c, 2)));
  const auto enc = a.at("encoder.embedding").values();
  const auto dec = a.at("decoder.embedding").values();
  EXPECT_FALSE(std::equal(enc.begin(), enc.end(), dec.begin()));
}

TEST(InitParams, FloatAndDoubleAgree) {
  const auto c = tiny(Variant::kConventional);
  const auto f = init_params<float>(c, 5);
  const auto d = init_params<double>(c, 5);
  for (std::size_t i = 0; i < f.size(); ++i) {
    const auto fv = f.entries()[i].second.values();
    const auto dv = d.entries()[i].second.values();
    for (std::size_t k = 0; k < fv.size(); ++k) ASSERT_EQ(fv[k], static_cast<float>(dv[k]));
  }
}

TEST(InitParams, VariantsDifferOnlyByMergeProjection) {
  const auto conv = init_params<float>(tiny(Variant::kConventional), 1);
  const auto scen = init_params<float>(tiny(Variant::kScenario), 1);
  const auto merge = merge_parameter_names(tiny(Variant::kScenario));
  ASSERT_EQ(merge.size(), 4u);
  std::size_t merge_count = 0;
  for (const auto& name : merge) merge_count += scen.at(name).numel();
  EXPECT_EQ(merge_count, 2 * (2 * 16 * 16 + 16));
  EXPECT_EQ(scen.parameter_count() - conv.parameter_count(), merge_count);
  EXPECT_EQ(scen.size() - conv.size(), merge.size());
  for (const auto& [name, t] : conv.entries()) {
    ASSERT_TRUE(scen.contains(name)) << name;
    EXPECT_EQ(scen.at(name).shape(), t.shape()) << name;
  }
}

TEST(InitParams, LanguageModelHasNoEncoderOrCrossAttention) {
  const auto lm = init_params<float>(tiny(Variant::kLanguageModel), 1);
  for (const auto& [name, t] : lm.entries()) {
    EXPECT_EQ(name.find("encoder"), std::string::npos) << name;
    EXPECT_EQ(name.find("cross_attn"), std::string::npos) << name;
  }
}

TEST(Transformer, EncodeShapeAndPaddingIsolation) {
  const auto c = tiny(Variant::kConventional);
  const Transformer<double> model(c, init_params<double>(c, 3));
  const auto short_rows = TokenMatrix::from_rows({{5, 6, 7}}, 0);
  const auto padded = TokenMatrix::from_rows({{5, 6, 7}, {8, 9, 10, 11, 12}}, 0);
  const auto m1 = model.encode(short_rows);
  EXPECT_EQ(m1.states.shape(), (Shape{1, 3, 16}));
  const auto m2 = model.encode(padded);
  for (std::size_t i = 0; i < 3 * 16; ++i) EXPECT_NEAR(m1.states.at(i), m2.states.at(i), 1e-12);
}

TEST(Transformer, DistributionsNormalizedAndHiddensPerBlock) {
  const auto c = tiny(Variant::kScenario);
  const Transformer<double> model(c, init_params<double>(c, 4));
  const auto h = model.encode(random_tokens(2, 5, 20, 1));
  const auto f = model.encode(random_tokens(2, 4, 20, 2));
  const auto y = random_tokens(2, 6, 20, 3);
  const auto out = model.decode(y, &h, &f);
  ASSERT_EQ(out.hiddens.size(), c.num_blocks);
  for (const auto& hid : out.hiddens) EXPECT_EQ(hid.shape(), (Shape{2, 6, 16}));
  const auto v = out.distributions.values();
  for (std::size_t row = 0; row < 12; ++row) {
    double s = 0;
    for (std::size_t k = 0; k < 20; ++k) s += v[row * 20 + k];
    EXPECT_NEAR(s, 1.0, 1e-5);
  }
}

TEST(Transformer, CausalMaskIsExact) {
  const auto c = tiny(Variant::kConventional);
  const Transformer<double> model(c, init_params<double>(c, 4));
  const auto h = model.encode(random_tokens(1, 5, 20, 1));
  auto y = random_tokens(1, 6, 20, 3);
  const auto base = model.decode(y, &h, nullptr).distributions;
  for (std::size_t j = 0; j < 6; ++j) {
    auto changed = y;
    changed.ids[j] = changed.ids[j] == 4 ? 5 : 4;
    const auto out = model.decode(changed, &h, nullptr).distributions;
    for (std::size_t pos = 0; pos < j; ++pos)
      for (std::size_t k = 0; k < 20; ++k) ASSERT_EQ(out.at(pos * 20 + k), base.at(pos * 20 + k)) << j << " " << pos;
  }
}

TEST(Transformer, SharedEncoderGivesIdenticalContexts) {
  const auto c = tiny(Variant::kScenario);
  const Transformer<double> model(c, init_params<double>(c, 9));
  const auto tokens = random_tokens(2, 5, 20, 7);
  const auto h = model.encode(tokens);
  const auto f = model.encode(tokens);
  const auto query = model.encode(random_tokens(2, 3, 20, 8)).states;
  const auto ctx = model.dual_context_attention(0, query, h, f);
  const auto a = ctx.history_context.values();
  const auto b = ctx.future_context.values();
  EXPECT_TRUE(std::equal(a.begin(), a.end(), b.begin()));
  EXPECT_EQ(ctx.concatenated.shape(), (Shape{2, 3, 32}));
  EXPECT_EQ(ctx.merged.shape(), (Shape{2, 3, 16}));
}

TEST(Transformer, VariantContracts) {
  const auto conv = tiny(Variant::kConventional);
  const Transformer<float> student(conv, init_params<float>(conv, 1));
  const auto h = student.encode(random_tokens(1, 4, 20, 1));
  const auto y = random_tokens(1, 3, 20, 2);
  EXPECT_THROW(student.decode(y, &h, &h), ContractError);
  EXPECT_THROW(student.decode(y, nullptr, nullptr), ContractError);

  const auto scen = tiny(Variant::kScenario);
  const Transformer<float> teacher(scen, init_params<float>(scen, 1));
  EXPECT_THROW(teacher.decode(y, &h, nullptr), ContractError);

  const auto lmc = tiny(Variant::kLanguageModel);
  const Transformer<float> lm(lmc, init_params<float>(lmc, 1));
  EXPECT_NO_THROW(lm.decode(y, nullptr, nullptr));
  EXPECT_THROW(lm.decode(y, &h, nullptr), ContractError);
}

TEST(Transformer, OutOfRangeTokenRejected) {
  const auto c = tiny(Variant::kConventional);
  const Transformer<float> model(c, init_params<float>(c, 1));
  EXPECT_THROW(model.encode(TokenMatrix::from_rows({{5, 20}}, 0)), VocabularyError);
}

TEST(Transformer, DropoutOnlyInTraining) {
  auto c = tiny(Variant::kConventional);
  c.dropout_rate = 0.5;
  const Transformer<float> model(c, init_params<float>(c, 1));
  const auto x = random_tokens(1, 6, 20, 4);
  const auto a = model.encode(x).states;
  const auto b = model.encode(x).states;
  EXPECT_TRUE(std::equal(a.values().begin(), a.values().end(), b.values().begin()));
  std::mt19937_64 rng(1);
  const auto t = model.encode(x, ForwardOptions{true, &rng}).states;
  EXPECT_FALSE(std::equal(a.values().begin(), a.values().end(), t.values().begin()));
}

}  // namespace
}  // namespace sdkd
