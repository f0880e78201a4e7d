// Copyright 2026 The sdkd Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include "sdkd/errors.hpp"
#include "sdkd/inference.hpp"

namespace sdkd {
namespace {

constexpr int kX = 0, kY = 1, kEnd = 2;

// Table-driven scorer over a 3-token vocabulary.
StepScorer table_scorer(std::map<std::vector<int>, std::vector<double>> probs) {
  return [probs = std::move(probs)](const std::vector<int>& prefix) {
    auto it = probs.find(prefix);
    std::vector<double> p = it == probs.end() ? std::vector<double>{0.1, 0.1, 0.8} : it->second;
    for (auto& v : p) v = std::log(v);
    return p;
  };
}

StepScorer delayed_reward() {
  return table_scorer({{{}, {0.6, 0.4, 1e-9}}, {{kX}, {0.3, 0.3, 0.4}}, {{kY}, {0.005, 0.005, 0.99}}});
}

DecodeConfig config(std::size_t width, std::size_t max_length = 5) {
  DecodeConfig c;
  c.strategy = width > 1 ? DecodeStrategy::kBeam : DecodeStrategy::kGreedy;
  c.beam_width = width;
  c.max_length = max_length;
  return c;
}

TEST(Greedy, FollowsArgmaxAndStopsAtEos) {
  const auto h = greedy_search(delayed_reward(), config(1), kEnd);
  EXPECT_EQ(h.tokens, (std::vector<int>{kX, kEnd}));
  EXPECT_TRUE(h.finished);
  EXPECT_NEAR(h.log_prob, std::log(0.6 * 0.4), 1e-12);
}

TEST(Greedy, MaxLengthOneYieldsSingleToken) {
  const auto h = greedy_search(delayed_reward(), config(1, 1), kEnd);
  EXPECT_EQ(h.tokens.size(), 1u);
  EXPECT_TRUE(h.truncated);
}

TEST(Beam, FindsDelayedReward) {
  const auto narrow = beam_search(delayed_reward(), config(1), kEnd);
  EXPECT_EQ(narrow.tokens, (std::vector<int>{kX, kEnd}));
  const auto wide = beam_search(delayed_reward(), config(2), kEnd);
  EXPECT_EQ(wide.tokens, (std::vector<int>{kY, kEnd}));
  EXPECT_NEAR(wide.log_prob, std::log(0.4 * 0.99), 1e-12);
}

TEST(Beam, MatchesExhaustiveEnumeration) {
  const auto scorer = delayed_reward();
  double best = -INFINITY;
  std::function<void(std::vector<int>, double)> walk = [&](std::vector<int> prefix, double lp) {
    if (!prefix.empty() && prefix.back() == kEnd) {
      best = std::max(best, lp);
      return;
    }
    if (prefix.size() == 3) return;
    const auto s = scorer(prefix);
    for (int k = 0; k < 3; ++k) {
      auto next = prefix;
      next.push_back(k);
      walk(next, lp + s[k]);
    }
  };
  walk({}, 0);
  EXPECT_NEAR(beam_search(scorer, config(3, 3), kEnd).log_prob, best, 1e-12);
}

TEST(Beam, TruncatedWhenNothingFinishes) {
  const auto never_ends = table_scorer({{{}, {0.5, 0.5 - 1e-9, 1e-9}}});
  const auto stuck = [&](const std::vector<int>&) { return never_ends({}); };
  const auto h = beam_search(stuck, config(2, 3), kEnd);
  EXPECT_EQ(h.tokens.size(), 3u);
  EXPECT_TRUE(h.truncated);
  EXPECT_FALSE(h.finished);
}

TEST(DecodeConfig, Validation) {
  DecodeConfig c;
  c.beam_width = 0;
  EXPECT_THROW(c.validate(), ContractError);
  c = {};
  c.max_length = 0;
  EXPECT_THROW(c.validate(), ContractError);
  EXPECT_THROW(decode_strategy_from_string("sample"), UsageError);
}

// Embeddings dominate the residual stream; every other weight is zero, so
// the output projection alone maps the current token to its successor.
Transformer<float> successor_model(const std::map<int, int>& successor) {
  ModelConfig c = ModelConfig::desk_preset(6, Variant::kConventional);
  c.model_dim = 16;
  c.ffn_dim = 16;
  c.num_blocks = 1;
  c.dropout_rate = 0;
  auto params = init_params<float>(c, 1);
  for (auto& [name, t] : params.entries()) {
    if (name.ends_with(".gain")) continue;
    for (auto& v : t.mutable_values()) v = 0;
  }
  auto emb = params.at("decoder.embedding").mutable_values();
  auto out = params.at("output.weight").mutable_values();
  for (const auto& [from, to] : successor) {
    emb[static_cast<std::size_t>(from) * 16 + static_cast<std::size_t>(from)] = 100;
    out[static_cast<std::size_t>(from) * 6 + static_cast<std::size_t>(to)] = 10;
  }
  return Transformer<float>(c, std::move(params));
}

TEST(ModelDecode, HandBuiltParametersForceSequence) {
  constexpr int a = 4, b = 5;
  const auto model = successor_model({{Vocabulary::kBos, a}, {a, b}, {b, Vocabulary::kEos}});
  const auto g = greedy_decode(model, {a, b}, config(1, 10));
  EXPECT_EQ(g.tokens, (std::vector<int>{a, b, Vocabulary::kEos}));
  EXPECT_TRUE(g.finished);
  EXPECT_EQ(beam_decode(model, {a, b}, config(4, 10)).tokens, g.tokens);
  EXPECT_EQ(greedy_decode(model, {a, b}, config(1, 10)).tokens, g.tokens);
  EXPECT_EQ(greedy_decode(model, {b}, config(1, 1)).tokens, (std::vector<int>{a}));
}

TEST(ModelDecode, ScorerExcludesPadAndBos) {
  const auto model = successor_model({{Vocabulary::kBos, 4}});
  const auto scores = model_scorer(model, {})({});
  EXPECT_TRUE(std::isinf(scores[Vocabulary::kPad]));
  EXPECT_TRUE(std::isinf(scores[Vocabulary::kBos]));
  double total = 0;
  for (double s : scores) total += std::exp(s);
  EXPECT_NEAR(total, 1.0, 1e-9);
}

}  // namespace
}  // namespace sdkd
