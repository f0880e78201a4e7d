// Copyright 2026 The sdkd Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "sdkd/corpus.hpp"
#include "sdkd/embeddings.hpp"
#include "sdkd/errors.hpp"
#include "sdkd/informativeness.hpp"
#include "sdkd/vocabulary.hpp"
#include "synthetic_corpus.hpp"

namespace sdkd {
namespace {

TokenSeq words(std::size_t n, const std::string& w = "x") { return TokenSeq(n, w); }

Dialogue numbered_turns(std::size_t n) {
  Dialogue d;
  for (std::size_t i = 1; i <= n; ++i) d.push_back({"t" + std::to_string(i)});
  return d;
}

TEST(Tokenize, LowercasesAndSplitsPunctuation) {
  EXPECT_EQ(tokenize("Hello, world!"), (TokenSeq{"hello", ",", "world", "!"}));
  EXPECT_TRUE(tokenize("").empty());
  EXPECT_EQ(tokenize("  a\tB  "), (TokenSeq{"a", "b"}));
}

TEST(ReadCorpus, EouAndJsonl) {
  std::istringstream eou("Hi there __eou__ How are you? __eou__\n\nok __eou__\n");
  const auto a = read_dialogues(eou, CorpusFormat::kEou);
  ASSERT_EQ(a.size(), 2u);
  EXPECT_EQ(a[0].size(), 2u);
  EXPECT_EQ(a[0][1], (TokenSeq{"how", "are", "you", "?"}));

  std::istringstream jl(R"({"turns": ["A b", "c"]})" "\n");
  const auto b = read_dialogues(jl, CorpusFormat::kJsonl);
  ASSERT_EQ(b.size(), 1u);
  EXPECT_EQ(b[0][0], (TokenSeq{"a", "b"}));

  std::istringstream bad("{\"turns\": 3}\n");
  EXPECT_THROW(read_dialogues(bad, CorpusFormat::kJsonl), FormatError);
  EXPECT_THROW(corpus_format_from_string("xml"), UsageError);
}

TEST(Window, CountsAndContents) {
  const WindowShape shape;
  const auto seven = window_dialogue(numbered_turns(7), shape);
  ASSERT_EQ(seven.size(), 1u);
  EXPECT_EQ(seven[0].history, (std::vector<TokenSeq>{{"t1"}, {"t2"}, {"t3"}}));
  EXPECT_EQ(seven[0].response, (TokenSeq{"t4"}));
  EXPECT_EQ(seven[0].future, (std::vector<TokenSeq>{{"t5"}, {"t6"}, {"t7"}}));
  EXPECT_EQ(window_dialogue(numbered_turns(9), shape).size(), 3u);
  EXPECT_TRUE(window_dialogue(numbered_turns(6), shape).empty());
}

TEST(Window, CountMatchesEnumeration) {
  for (std::size_t n = 0; n < 15; ++n) {
    for (std::size_t h = 1; h <= 3; ++h) {
      const WindowShape shape{h, 1, 2, 1};
      const std::size_t expected = n >= shape.span() ? n - shape.span() + 1 : 0;
      EXPECT_EQ(window_dialogue(numbered_turns(n), shape).size(), expected);
    }
  }
}

DialogueExample sized(std::size_t history, std::size_t response, std::size_t future) {
  return {{words(history)}, words(response), {words(future)}};
}

TEST(LengthFilter, InclusiveBounds) {
  const LengthBounds b;
  EXPECT_FALSE(b.accepts(sized(30, 4, 30)));
  EXPECT_TRUE(b.accepts(sized(25, 25, 80)));
  EXPECT_TRUE(b.accepts(sized(25, 5, 25)));
  EXPECT_FALSE(b.accepts(sized(81, 10, 30)));
  EXPECT_FALSE(b.accepts(sized(30, 26, 30)));
  EXPECT_FALSE(b.accepts(sized(30, 10, 24)));
  const auto kept = length_filter({sized(30, 4, 30), sized(30, 10, 30)});
  ASSERT_EQ(kept.size(), 1u);
  for (const auto& ex : kept) EXPECT_TRUE(b.accepts(ex));
}

TEST(LengthFilter, HistoryLengthSumsTurns) {
  DialogueExample ex{{words(10), words(10), words(10)}, words(6), {words(30)}};
  EXPECT_EQ(ex.history_length(), 30u);
  EXPECT_TRUE(LengthBounds{}.accepts(ex));
}

TEST(ExamplesIo, RoundTrip) {
  const std::vector<DialogueExample> examples{sized(3, 2, 1), {{{"a", "b"}, {"c"}}, {"d"}, {{"e"}}}};
  std::stringstream s;
  write_examples(s, examples);
  EXPECT_EQ(read_examples(s), examples);
}

TEST(Vocabulary, FrequencyCap) {
  const std::vector<TokenSeq> corpus{{"a", "a", "a", "b", "b", "c"}};
  const auto six = Vocabulary::build(corpus, 6);
  EXPECT_EQ(six.size(), 6u);
  EXPECT_EQ(six.id_of("a"), 4);
  EXPECT_EQ(six.id_of("b"), 5);
  EXPECT_EQ(six.id_of("c"), Vocabulary::kUnk);
  const auto seven = Vocabulary::build(corpus, 7);
  EXPECT_EQ(seven.id_of("c"), 6);
  const auto four = Vocabulary::build(corpus, 4);
  EXPECT_EQ(four.size(), 4u);
  EXPECT_EQ(four.id_of("a"), Vocabulary::kUnk);
  EXPECT_EQ(six.id_of("never-seen"), Vocabulary::kUnk);
  EXPECT_THROW(six.token_of(6), VocabularyError);
}

TEST(Vocabulary, ReservedIdsAndRoundTrip) {
  const Vocabulary v = Vocabulary::build(std::vector<TokenSeq>{{"x", "y"}}, 100);
  EXPECT_EQ(v.id_of(v.token_of(Vocabulary::kPad)), 0);
  EXPECT_EQ(v.id_of(v.token_of(Vocabulary::kEos)), 3);
  std::stringstream s;
  v.write(s);
  EXPECT_EQ(Vocabulary::read(s).tokens(), v.tokens());
  EXPECT_EQ(v.decode(v.encode({"x", "y"})), (TokenSeq{"x", "y"}));
}

TEST(Encoding, TurnsJoinedWithEosAndHistoryKeepsTail) {
  const Vocabulary v = Vocabulary::from_tokens({"<pad>", "<unk>", "<bos>", "<eos>", "a", "b"});
  EXPECT_EQ(encode_turns(v, {{"a"}, {"b", "a"}}), (std::vector<int>{4, 3, 5, 4}));
  const DialogueExample ex{{{"a", "a", "a"}, {"b", "b"}}, {"a", "b", "a"}, {{"b"}}};
  const auto e = encode_example(v, ex, 3);
  EXPECT_EQ(e.history, (std::vector<int>{3, 5, 5}));
  EXPECT_EQ(e.response.size(), 2u);
}

TEST(Batchify, SizesAndDeterminism) {
  std::vector<EncodedExample> ex;
  for (int i = 0; i < 10; ++i) ex.push_back({{4, 5}, {4 + i % 2}, {5}});
  const auto a = batchify(ex, 4, 7, true);
  ASSERT_EQ(a.size(), 3u);
  EXPECT_EQ(a[0].size(), 4u);
  EXPECT_EQ(a[1].size(), 4u);
  EXPECT_EQ(a[2].size(), 2u);
  const auto b = batchify(ex, 4, 7, true);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].example_indices, b[i].example_indices);
  std::set<std::size_t> seen;
  for (const auto& batch : a) seen.insert(batch.example_indices.begin(), batch.example_indices.end());
  EXPECT_EQ(seen.size(), 10u);
  EXPECT_FALSE(batchify(ex, 4, 7, false)[0].future.has_value());
}

TEST(Batch, TeacherForcingShift) {
  const std::vector<EncodedExample> ex{{{4}, {5, 6}, {}}, {{4, 4}, {7}, {}}};
  const auto b = make_batch(ex, {0, 1}, false);
  EXPECT_EQ(b.response_input.id(0, 0), Vocabulary::kBos);
  EXPECT_EQ(b.response_input.id(0, 1), 5);
  EXPECT_EQ(b.response_target.id(0, 1), 6);
  EXPECT_EQ(b.response_target.id(0, 2), Vocabulary::kEos);
  EXPECT_EQ(b.response_target.id(1, 1), Vocabulary::kEos);
  EXPECT_FALSE(b.response_target.is_valid(1, 2));
  EXPECT_EQ(b.target_tokens(), 5u);
}

std::vector<TokenSeq> interchangeable_corpus() {
  std::vector<TokenSeq> corpus;
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> ctx(0, 9);
  for (int i = 0; i < 400; ++i) {
    const std::string c = "c" + std::to_string(ctx(rng));
    const std::string hub = i % 2 ? "x" : "y";
    corpus.push_back({c, "pre", hub, "post", c});
    corpus.push_back({"r" + std::to_string(ctx(rng)), "q" + std::to_string(ctx(rng)), "s" + std::to_string(ctx(rng))});
  }
  return corpus;
}

TEST(Embeddings, DistributionalSimilarity) {
  const auto corpus = interchangeable_corpus();
  SkipGramOptions opt;
  opt.dim = 16;
  opt.epochs = 5;
  const auto table = train_word_embeddings(corpus, opt);
  const double xy = cosine(*table.find("x"), *table.find("y"));
  double random_mean = 0;
  int pairs = 0;
  for (int a = 0; a < 10; ++a)
    for (int b = 0; b < 10; ++b) {
      if (a == b) continue;
      random_mean += cosine(*table.find("r" + std::to_string(a)), *table.find("q" + std::to_string(b)));
      ++pairs;
    }
  EXPECT_GT(xy, random_mean / pairs);
}

TEST(Embeddings, DeterministicAndSmallCorpusRejected) {
  const auto corpus = interchangeable_corpus();
  SkipGramOptions opt;
  opt.dim = 8;
  opt.epochs = 1;
  const auto a = train_word_embeddings(corpus, opt);
  const auto b = train_word_embeddings(corpus, opt);
  ASSERT_EQ(a.tokens(), b.tokens());
  for (const auto& t : a.tokens()) EXPECT_EQ(*a.find(t), *b.find(t));
  EXPECT_THROW(train_word_embeddings({{"a", "b"}}, opt), DataError);
}

TEST(Embeddings, TextFormatRoundTrip) {
  EmbeddingTable t(2);
  t.set("a", {1.5, -2});
  t.set("b", {0, 0.25});
  std::stringstream s;
  t.write(s);
  const auto r = EmbeddingTable::read(s);
  EXPECT_EQ(*r.find("a"), (std::vector<double>{1.5, -2}));
  EXPECT_EQ(r.find("z"), nullptr);
  std::istringstream bad("2 3\na 1 2 3\n");
  EXPECT_THROW(EmbeddingTable::read(bad), FormatError);
}

TEST(Clustering, ThresholdBehaviour) {
  EXPECT_EQ(single_pass_cluster({{1, 0}, {1, 0}}, 0.8), (std::vector<std::size_t>{0, 0}));
  EXPECT_EQ(single_pass_cluster({{1, 0}, {0, 1}}, 0.8), (std::vector<std::size_t>{0, 1}));
  const double c = 0.79;
  const std::vector<double> v{c, std::sqrt(1 - c * c)};
  EXPECT_NEAR(cosine(std::vector<double>{1, 0}, v), 0.79, 1e-12);
  EXPECT_EQ(single_pass_cluster({{1, 0}, v}, 0.8), (std::vector<std::size_t>{0, 1}));
  EXPECT_EQ(single_pass_cluster({{1, 0}, v}, 0.78), (std::vector<std::size_t>{0, 0}));
  EXPECT_THROW(single_pass_cluster({{1, 0}}, 0.0), ContractError);
}

TEST(WordOverlap, StrictThreshold) {
  EXPECT_DOUBLE_EQ(word_overlap_ratio({"a", "b", "c", "d", "e"}, {"a", "b", "c", "d", "f"}), 0.8);
  EXPECT_FALSE(word_overlap_equivalent({"a", "b", "c", "d", "e"}, {"a", "b", "c", "d", "f"}));
  EXPECT_TRUE(word_overlap_equivalent({"a", "b", "c", "d", "e"}, {"a", "b", "c", "d", "e"}));
}

TEST(Informativeness, ExactMatchSharedResponse) {
  const std::vector<DialogueExample> ex{{{{"h1"}}, {"same"}, {{"f1"}}},
                                        {{{"h2"}}, {"same"}, {{"f2"}}},
                                        {{{"h3"}}, {"unique"}, {{"f3"}}}};
  const auto split = classify_uninformative(ex, SamenessStrategy::kExactMatch);
  EXPECT_EQ(split.uninformative, (std::vector<std::size_t>{0, 1}));
  EXPECT_EQ(split.other, (std::vector<std::size_t>{2}));
}

TEST(Informativeness, SharedFutureMarksResponses) {
  const std::vector<DialogueExample> ex{{{{"h1"}}, {"r1"}, {{"bye"}}}, {{{"h2"}}, {"r2"}, {{"bye"}}}};
  EXPECT_EQ(classify_uninformative(ex, SamenessStrategy::kExactMatch).uninformative.size(), 2u);
}

TEST(Informativeness, SentenceClusterWithEmbeddings) {
  EmbeddingTable emb(2);
  emb.set("ok", {1, 0});
  emb.set("fine", {0.99, 0.01});
  emb.set("rain", {0, 1});
  emb.set("sun", {-1, 0.2});
  emb.set("snow", {0.1, -1});
  emb.set("f1", {1, 0});
  emb.set("f2", {-0.5, 0.866});
  emb.set("f3", {-0.5, -0.866});
  const std::vector<DialogueExample> ex{{{{"rain"}}, {"ok"}, {{"f1"}}},
                                        {{{"snow"}}, {"fine"}, {{"f2"}}},
                                        {{{"sun"}}, {"rain"}, {{"f3"}}}};
  ClusterSettings settings;
  settings.embeddings = &emb;
  const auto split = classify_uninformative(ex, SamenessStrategy::kSentenceCluster, settings);
  EXPECT_EQ(split.uninformative, (std::vector<std::size_t>{0, 1}));
  EXPECT_THROW(classify_uninformative(ex, SamenessStrategy::kSentenceCluster), ContractError);
}

TEST(Informativeness, PartitionProperty) {
  testing::SyntheticSpec spec;
  spec.examples = 120;
  spec.noise_words = 3;
  spec.history_length = 1;
  spec.future_length = 1;
  const auto ex = testing::synthetic_dialogues(spec);
  for (auto strategy : {SamenessStrategy::kExactMatch, SamenessStrategy::kWordOverlap}) {
    const auto split = classify_uninformative(ex, strategy);
    std::set<std::size_t> all(split.uninformative.begin(), split.uninformative.end());
    for (auto i : split.other) EXPECT_TRUE(all.insert(i).second) << "index in both sets";
    EXPECT_EQ(all.size(), ex.size());
  }
}

}  // namespace
}  // namespace sdkd
