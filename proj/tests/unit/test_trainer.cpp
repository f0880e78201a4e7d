// Copyright 2026 The sdkd Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include "sdkd/errors.hpp"
#include "sdkd/trainer.hpp"
#include "tiny_setup.hpp"

namespace sdkd {
namespace {

using testing::encoded_synthetic;
using testing::short_run;
using testing::tiny_model;

class TrainerTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    testing::SyntheticSpec spec;
    spec.examples = 48;
    spec.history_length = 4;
    spec.future_length = 4;
    corpus_ = new testing::EncodedCorpus(encoded_synthetic(spec, 16));
    teacher_ = new TrainedModel(train_teacher(corpus_->data, tiny_model(vocab(), Variant::kScenario), short_run(30)));
  }
  static void TearDownTestSuite() {
    delete teacher_;
    delete corpus_;
  }
  static std::size_t vocab() { return corpus_->vocab.size(); }

  static testing::EncodedCorpus* corpus_;
  static TrainedModel* teacher_;
};

testing::EncodedCorpus* TrainerTest::corpus_ = nullptr;
TrainedModel* TrainerTest::teacher_ = nullptr;

TEST_F(TrainerTest, DeterministicLossCurves) {
  const auto cfg = tiny_model(vocab(), Variant::kScenario);
  const auto a = train_teacher(corpus_->data, cfg, short_run(8));
  const auto b = train_teacher(corpus_->data, cfg, short_run(8));
  ASSERT_EQ(a.log.size(), 8u);
  for (std::size_t i = 0; i < a.log.size(); ++i) EXPECT_EQ(a.log[i].loss.total, b.log[i].loss.total);
  EXPECT_EQ(parameter_fingerprint(a.params), parameter_fingerprint(b.params));
}

TEST_F(TrainerTest, TeacherLossDecreases) {
  ASSERT_EQ(teacher_->log.size(), 30u);
  EXPECT_LT(teacher_->log.back().loss.nll, teacher_->log.front().loss.nll);
  ASSERT_TRUE(teacher_->best_valid_loss.has_value());
}

TEST_F(TrainerTest, ZeroLambdaMatchesBaseline) {
  const auto cfg = tiny_model(vocab(), Variant::kConventional);
  auto training = short_run(10);
  const auto baseline = train_student(corpus_->data, nullptr, cfg, training);
  training.lambda1 = 0;
  const auto teacher = teacher_->model();
  const auto distilled = train_student(corpus_->data, &teacher, cfg, training);
  ASSERT_EQ(baseline.log.size(), distilled.log.size());
  for (std::size_t i = 0; i < baseline.log.size(); ++i)
    EXPECT_NEAR(baseline.log[i].loss.total, distilled.log[i].loss.total, 1e-6);
}

TEST_F(TrainerTest, StudentLeavesTeacherUntouched) {
  const auto teacher = teacher_->model();
  const auto before = parameter_fingerprint(teacher.params());
  const auto student = train_student(corpus_->data, &teacher, tiny_model(vocab(), Variant::kConventional), short_run(5));
  EXPECT_EQ(parameter_fingerprint(teacher.params()), before);
  EXPECT_GT(student.log.front().loss.il_prediction, 0.0);
}

TEST_F(TrainerTest, HardTransferScopes) {
  const auto scfg = tiny_model(vocab(), Variant::kConventional);
  auto student = init_params<float>(scfg, 7);
  EXPECT_TRUE(hard_transfer_init(student, scfg, teacher_->params, teacher_->config, HardTransferScope::kNone).empty());
  const auto emb = hard_transfer_init(student, scfg, teacher_->params, teacher_->config, HardTransferScope::kWordEmb);
  EXPECT_EQ(emb, (std::set<std::string>{"decoder.embedding", "encoder.embedding"}));
  auto other = scfg;
  other.model_dim = 32;
  other.ffn_dim = 64;
  auto wrong = init_params<float>(other, 1);
  EXPECT_THROW(hard_transfer_init(wrong, other, teacher_->params, teacher_->config, HardTransferScope::kWordEmb),
               ContractError);
}

TEST_F(TrainerTest, FrozenScopeBitwiseUnchanged) {
  const auto teacher = teacher_->model();
  auto training = short_run(20);
  training.hard_transfer_scope = HardTransferScope::kEncoder;
  const auto student = train_student(corpus_->data, &teacher, tiny_model(vocab(), Variant::kConventional), training);
  ASSERT_FALSE(student.frozen.empty());
  for (const auto& name : student.frozen) {
    const auto a = student.params.at(name).values();
    const auto b = teacher_->params.at(name).values();
    EXPECT_TRUE(std::equal(a.begin(), a.end(), b.begin())) << name;
  }
  EXPECT_TRUE(student.frozen.count("encoder.embedding"));
  EXPECT_FALSE(student.frozen.count("output.weight"));
}

TEST_F(TrainerTest, LanguageModelTeacher) {
  const auto lm = train_lm_teacher(corpus_->data, tiny_model(vocab(), Variant::kLanguageModel), short_run(5));
  for (const auto& [name, t] : lm.params.entries()) EXPECT_EQ(name.find("cross_attn"), std::string::npos);
  const auto teacher = teacher_->model();
  const auto lm_model = lm.model();
  const auto student = train_student(corpus_->data, &teacher, tiny_model(vocab(), Variant::kConventional),
                                     short_run(3), &lm_model);
  ASSERT_TRUE(student.log.front().loss.lm_prediction.has_value());
  EXPECT_GT(*student.log.front().loss.lm_prediction, 0.0);
}

TEST_F(TrainerTest, VariantAndDataContracts) {
  EXPECT_THROW(train_teacher(corpus_->data, tiny_model(vocab(), Variant::kConventional), short_run(1)), ContractError);
  EXPECT_THROW(train_lm_teacher(corpus_->data, tiny_model(vocab(), Variant::kScenario), short_run(1)), ContractError);
  EXPECT_THROW(train_teacher(TrainingData{}, tiny_model(vocab(), Variant::kScenario), short_run(1)), DataError);
  const auto teacher = teacher_->model();
  auto mismatched = tiny_model(vocab(), Variant::kConventional);
  mismatched.model_dim = 32;
  mismatched.ffn_dim = 64;
  EXPECT_THROW(train_student(corpus_->data, &teacher, mismatched, short_run(1)), ContractError);
  EXPECT_THROW(train_student(corpus_->data, &teacher, tiny_model(vocab() - 1, Variant::kConventional), short_run(1)),
               ContractError);
}

TEST(TrainingConfig, Validation) {
  EXPECT_NO_THROW(TrainingConfig{}.validate());
  TrainingConfig c;
  c.epochs = 0;
  EXPECT_THROW(c.validate(), ContractError);
  c.max_steps = 3;
  EXPECT_NO_THROW(c.validate());
  c.temperature = 0;
  EXPECT_THROW(c.validate(), ContractError);
  EXPECT_THROW(hard_transfer_from_string("decoder"), UsageError);
  EXPECT_EQ(hard_transfer_from_string(to_string(HardTransferScope::kWordEmb)), HardTransferScope::kWordEmb);
}

TEST(StepsToReach, FirstEvaluationAtOrBelowTarget) {
  std::vector<StepLog> log(4);
  for (std::size_t i = 0; i < log.size(); ++i) log[i].step = i + 1;
  log[1].valid_loss = 2.0;
  log[3].valid_loss = 1.0;
  EXPECT_EQ(steps_to_reach(log, 1.5), 4u);
  EXPECT_EQ(steps_to_reach(log, 2.0), 2u);
  EXPECT_FALSE(steps_to_reach(log, 0.5).has_value());
}

}  // namespace
}  // namespace sdkd
