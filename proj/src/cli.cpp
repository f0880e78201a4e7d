// Copyright 2026 The sdkd Authors
// SPDX-License-Identifier: Apache-2.0

#include "sdkd/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <map>
#include <random>
#include <sstream>

#include "sdkd/checkpoint.hpp"
#include "sdkd/corpus.hpp"
#include "sdkd/embeddings.hpp"
#include "sdkd/errors.hpp"
#include "sdkd/inference.hpp"
#include "sdkd/informativeness.hpp"
#include "sdkd/metrics.hpp"
#include "sdkd/run_config.hpp"
#include "sdkd/trainer.hpp"
#include "sdkd/vocabulary.hpp"

namespace sdkd {

namespace {

namespace fs = std::filesystem;

struct Context {
  RunConfig config;
  std::ostream& out;
  std::ostream& err;
};

// ---- path and file helpers ----

void require(const std::string& value, const char* flag) {
  if (value.empty()) throw UsageError(std::string("missing required ") + flag);
}

void require_file(const std::string& path, const char* flag) {
  require(path, flag);
  if (!fs::is_regular_file(path)) throw IoError(std::string(flag) + ": no such file '" + path + "'");
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  return in;
}

std::ofstream open_out(const std::string& path) {
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  return out;
}

std::vector<DialogueExample> load_examples(const std::string& path) {
  auto in = open_in(path);
  try {
    return read_examples(in);
  } catch (const Error& e) {
    throw DataError(path + ": " + e.what());
  }
}

Vocabulary load_vocabulary(const std::string& path) {
  auto in = open_in(path);
  return Vocabulary::read(in);
}

Vocabulary checkpoint_vocabulary(const Checkpoint& ck, const std::string& path) {
  if (ck.vocabulary.empty()) throw FormatError(path + ": checkpoint carries no vocabulary");
  return Vocabulary::from_tokens(ck.vocabulary);
}

std::string hex(std::uint64_t v) {
  std::ostringstream s;
  s << std::hex << std::setw(16) << std::setfill('0') << v;
  return s.str();
}

// ---- subcommands ----

void cmd_prepare_data(Context& ctx) {
  const auto& c = ctx.config;
  require_file(c.paths.corpus, "--corpus");
  require(c.paths.out, "--out");
  const auto format = corpus_format_from_string(c.data.format);
  auto in = open_in(c.paths.corpus);
  const auto dialogues = read_dialogues(in, format);
  LengthBounds bounds;
  if (!c.data.filter) {
    const LengthRange any{0, std::numeric_limits<std::size_t>::max()};
    bounds = LengthBounds{any, any, any};
  }
  auto examples = prepare_examples(dialogues, c.data.window, bounds);
  if (examples.empty()) throw DataError("no examples survive windowing and length filtering");
  std::mt19937_64 rng(c.training.seed);
  std::shuffle(examples.begin(), examples.end(), rng);
  const auto n = examples.size();
  const auto n_test = static_cast<std::size_t>(static_cast<double>(n) * c.data.test_fraction);
  const auto n_valid = static_cast<std::size_t>(static_cast<double>(n) * c.data.valid_fraction);
  const auto n_train = n - n_test - n_valid;
  if (n_train == 0) throw DataError("split leaves no training examples");
  const auto begin = examples.begin();
  const std::vector<DialogueExample> train(begin, begin + static_cast<std::ptrdiff_t>(n_train));
  const std::vector<DialogueExample> valid(begin + static_cast<std::ptrdiff_t>(n_train),
                                           begin + static_cast<std::ptrdiff_t>(n_train + n_valid));
  const std::vector<DialogueExample> test(begin + static_cast<std::ptrdiff_t>(n_train + n_valid), examples.end());

  fs::create_directories(c.paths.out);
  const fs::path dir(c.paths.out);
  auto write = [&](const char* name, const std::vector<DialogueExample>& part) {
    auto f = open_out((dir / name).string());
    write_examples(f, part);
  };
  write("train.jsonl", train);
  write("valid.jsonl", valid);
  write("test.jsonl", test);
  const auto vocab = Vocabulary::build(train, c.data.vocab_size);
  auto vf = open_out((dir / "vocab.txt").string());
  vocab.write(vf);
  ctx.out << "dialogues " << dialogues.size() << " examples " << n << " train " << n_train << " valid " << n_valid
          << " test " << n_test << " vocab " << vocab.size() << "\n";
}

struct PreparedData {
  Vocabulary vocab;
  TrainingData data;
};

PreparedData load_training_data(const RunConfig& c) {
  require(c.paths.data, "--data");
  const fs::path dir(c.paths.data);
  for (const char* name : {"train.jsonl", "vocab.txt"}) {
    if (!fs::is_regular_file(dir / name)) throw IoError("--data: '" + (dir / name).string() + "' not found");
  }
  PreparedData p{load_vocabulary((dir / "vocab.txt").string()), {}};
  p.data.train = encode_examples(p.vocab, load_examples((dir / "train.jsonl").string()), c.data.max_length);
  if (fs::is_regular_file(dir / "valid.jsonl")) {
    p.data.valid = encode_examples(p.vocab, load_examples((dir / "valid.jsonl").string()), c.data.max_length);
  }
  return p;
}

StepCallback log_writer(std::ofstream& log) {
  return [&log](const StepLog& s) { log << s.to_json().dump() << "\n"; };
}

std::string log_path(const RunConfig& c) { return c.paths.log.empty() ? c.paths.out + ".log.jsonl" : c.paths.log; }

void save_trained(const Context& ctx, const TrainedModel& m, const Vocabulary& vocab, const std::string& kind) {
  Checkpoint ck;
  ck.model = m.config;
  ck.training = ctx.config.training;
  ck.params = m.params.clone();
  ck.vocabulary = vocab.tokens();
  ck.metadata = {{"kind", kind},
                 {"steps", m.steps},
                 {"best_step", m.best_step},
                 {"frozen", std::vector<std::string>(m.frozen.begin(), m.frozen.end())},
                 {"run_config", ctx.config.to_json()}};
  if (m.best_valid_loss) ck.metadata["best_valid_loss"] = *m.best_valid_loss;
  save_checkpoint(ck, ctx.config.paths.out);
  ctx.out << kind << " trained for " << m.steps << " steps";
  if (m.best_valid_loss) ctx.out << ", best validation loss " << *m.best_valid_loss << " at step " << m.best_step;
  ctx.out << "; checkpoint " << ctx.config.paths.out << "\n";
}

ModelConfig configured_model(const RunConfig& c, std::size_t vocab_size, Variant variant) {
  ModelConfig m = c.model;
  m.vocab_size = vocab_size;
  m.variant = variant;
  return m;
}

void cmd_train_plain(Context& ctx, Variant variant) {
  const auto& c = ctx.config;
  require(c.paths.out, "--out");
  auto prepared = load_training_data(c);
  const auto model = configured_model(c, prepared.vocab.size(), variant);
  model.validate();
  auto log = open_out(log_path(c));
  const auto trained = variant == Variant::kScenario
                           ? train_teacher(prepared.data, model, c.training, log_writer(log))
                           : train_lm_teacher(prepared.data, model, c.training, log_writer(log));
  save_trained(ctx, trained, prepared.vocab, variant == Variant::kScenario ? "teacher" : "language_model");
}

void cmd_train_student(Context& ctx, bool baseline) {
  const auto& c = ctx.config;
  require(c.paths.out, "--out");
  if (!baseline) require_file(c.paths.teacher, "--teacher");
  if (!c.paths.lm_teacher.empty()) require_file(c.paths.lm_teacher, "--lm-teacher");
  auto prepared = load_training_data(c);

  std::optional<Checkpoint> teacher_ck, lm_ck;
  std::optional<Transformer<float>> teacher, lm;
  ModelConfig model = configured_model(c, prepared.vocab.size(), Variant::kConventional);
  if (!baseline) {
    teacher_ck = load_checkpoint(c.paths.teacher);
    if (teacher_ck->model.vocab_size != prepared.vocab.size()) {
      throw ContractError("teacher vocabulary size " + std::to_string(teacher_ck->model.vocab_size) +
                          " differs from the corpus vocabulary size " + std::to_string(prepared.vocab.size()));
    }
    if (teacher_ck->vocabulary != prepared.vocab.tokens()) {
      throw ContractError("teacher vocabulary differs from the corpus vocabulary");
    }
    // The student inherits the teacher's architecture.
    model = teacher_ck->model.with_variant(Variant::kConventional);
    teacher.emplace(teacher_ck->transformer());
  }
  if (!c.paths.lm_teacher.empty()) {
    lm_ck = load_checkpoint(c.paths.lm_teacher);
    if (lm_ck->model.vocab_size != prepared.vocab.size()) throw ContractError("lm teacher vocabulary size differs");
    lm.emplace(lm_ck->transformer());
  }
  const std::uint64_t teacher_file_hash = baseline ? 0 : file_fingerprint(c.paths.teacher);
  auto log = open_out(log_path(c));
  const auto trained = train_student(prepared.data, teacher ? &*teacher : nullptr, model, c.training,
                                     lm ? &*lm : nullptr, log_writer(log));
  if (!baseline && file_fingerprint(c.paths.teacher) != teacher_file_hash) {
    throw ContractError("teacher checkpoint changed on disk during student training");
  }
  save_trained(ctx, trained, prepared.vocab, baseline ? "baseline" : "student");
}

std::vector<int> encode_history(const Vocabulary& vocab, const std::vector<TokenSeq>& turns, std::size_t max_length) {
  auto ids = encode_turns(vocab, turns);
  if (ids.size() > max_length) ids.erase(ids.begin(), ids.end() - static_cast<std::ptrdiff_t>(max_length));
  return ids;
}

void cmd_generate(Context& ctx) {
  const auto& c = ctx.config;
  require_file(c.paths.checkpoint, "--checkpoint");
  require_file(c.paths.corpus, "--corpus");
  require(c.paths.out, "--out");
  const auto ck = load_checkpoint(c.paths.checkpoint);
  const auto vocab = checkpoint_vocabulary(ck, c.paths.checkpoint);
  const auto model = ck.transformer();
  auto in = open_in(c.paths.corpus);
  const auto histories = read_dialogues(in, corpus_format_from_string(c.data.format));
  auto out = open_out(c.paths.out);
  for (const auto& turns : histories) {
    const auto h = generate(model, encode_history(vocab, turns, c.data.max_length), c.decode);
    out << join_tokens(vocab.decode(h.tokens)) << "\n";
  }
  ctx.out << "generated " << histories.size() << " responses into " << c.paths.out << "\n";
}

std::optional<EmbeddingTable> maybe_embeddings(const RunConfig& c) {
  if (c.paths.embeddings.empty()) return std::nullopt;
  require_file(c.paths.embeddings, "--embeddings");
  auto in = open_in(c.paths.embeddings);
  return EmbeddingTable::read(in);
}

void cmd_evaluate(Context& ctx) {
  const auto& c = ctx.config;
  require_file(c.paths.checkpoint, "--checkpoint");
  require_file(c.paths.corpus, "--corpus");
  const auto embeddings = maybe_embeddings(c);
  const auto ck = load_checkpoint(c.paths.checkpoint);
  const auto vocab = checkpoint_vocabulary(ck, c.paths.checkpoint);
  const auto examples = load_examples(c.paths.corpus);
  auto report = evaluate_model(ck.transformer(), vocab, examples, c.data.max_length, c.decode,
                               embeddings ? &*embeddings : nullptr);
  report.corpus_id = c.paths.corpus;
  report.model_id = c.paths.checkpoint + "#" + hex(file_fingerprint(c.paths.checkpoint));
  report.run_config = c.to_json();
  const std::string text = report.to_json().dump(2);
  if (c.paths.out.empty()) {
    ctx.out << text << "\n";
  } else {
    auto out = open_out(c.paths.out);
    out << text << "\n";
    ctx.out << "report written to " << c.paths.out << "\n";
  }
}

void cmd_analyze_robustness(Context& ctx) {
  const auto& c = ctx.config;
  require_file(c.paths.checkpoint, "--checkpoint");
  require_file(c.paths.corpus, "--corpus");
  const auto ck = load_checkpoint(c.paths.checkpoint);
  const auto vocab = checkpoint_vocabulary(ck, c.paths.checkpoint);
  const auto encoded = encode_examples(vocab, load_examples(c.paths.corpus), c.data.max_length);
  auto model = ck.transformer();
  const auto series = perturbation_analysis(model, encoded, c.analysis.sigmas, c.analysis.samples, c.training.seed);
  std::ostringstream lines;
  for (const auto& p : series) {
    auto j = p.to_json();
    j.erase("samples");
    lines << j.dump() << "\n";
  }
  if (c.paths.out.empty()) {
    ctx.out << lines.str();
  } else {
    auto out = open_out(c.paths.out);
    out << lines.str();
    ctx.out << "perturbation series written to " << c.paths.out << "\n";
  }
}

void cmd_analyze_wordfreq(Context& ctx) {
  const auto& c = ctx.config;
  require_file(c.paths.checkpoint, "--checkpoint");
  require_file(c.paths.corpus, "--corpus");
  const auto ck = load_checkpoint(c.paths.checkpoint);
  const auto vocab = checkpoint_vocabulary(ck, c.paths.checkpoint);
  const auto model = ck.transformer();
  const auto examples = load_examples(c.paths.corpus);
  std::vector<TokenSeq> generated, references;
  for (const auto& ex : examples) {
    const auto h = generate(model, encode_history(vocab, ex.history, c.data.max_length), c.decode);
    generated.push_back(vocab.decode(h.tokens));
    references.push_back(ex.response);
  }
  const nlohmann::json result = {{"similarity", word_distribution_similarity(generated, references, c.analysis.top_k)},
                                 {"top_k", c.analysis.top_k},
                                 {"examples", examples.size()},
                                 {"model_id", c.paths.checkpoint},
                                 {"corpus_id", c.paths.corpus}};
  if (c.paths.out.empty()) {
    ctx.out << result.dump(2) << "\n";
  } else {
    auto out = open_out(c.paths.out);
    out << result.dump(2) << "\n";
    ctx.out << "word distribution similarity " << result["similarity"].get<double>() << "\n";
  }
}

void cmd_classify_informative(Context& ctx) {
  const auto& c = ctx.config;
  require_file(c.paths.corpus, "--corpus");
  require(c.paths.out, "--out");
  const auto strategy = sameness_from_string(c.analysis.strategy);
  auto embeddings = maybe_embeddings(c);
  const auto examples = load_examples(c.paths.corpus);
  ClusterSettings clusters;
  if (strategy == SamenessStrategy::kSentenceCluster) {
    if (!embeddings) {
      std::vector<TokenSeq> sentences;
      for (const auto& ex : examples) {
        sentences.insert(sentences.end(), ex.history.begin(), ex.history.end());
        sentences.push_back(ex.response);
        sentences.insert(sentences.end(), ex.future.begin(), ex.future.end());
      }
      SkipGramOptions options;
      options.seed = c.training.seed;
      embeddings = train_word_embeddings(sentences, options);
    }
    clusters.embeddings = &*embeddings;
  }
  const auto split = classify_uninformative(examples, strategy, clusters);
  fs::create_directories(c.paths.out);
  auto write = [&](const char* name, const std::vector<std::size_t>& indices) {
    std::vector<DialogueExample> part;
    for (std::size_t i : indices) part.push_back(examples[i]);
    auto f = open_out((fs::path(c.paths.out) / name).string());
    write_examples(f, part);
  };
  write("uninformative.jsonl", split.uninformative);
  write("other.jsonl", split.other);
  ctx.out << "uninformative " << split.uninformative.size() << " other " << split.other.size() << "\n";
}

// ---- argument wiring ----

struct FlagSpec {
  const char* flag;
  const char* key;
  const char* help;
};

constexpr FlagSpec kModelFlags[] = {
    {"--model-dim", "model.model_dim", "model width"},
    {"--blocks", "model.num_blocks", "encoder and decoder blocks"},
    {"--heads", "model.num_heads", "attention heads"},
    {"--ffn-dim", "model.ffn_dim", "feed-forward width"},
    {"--dropout", "model.dropout_rate", "dropout rate"},
};

constexpr FlagSpec kTrainingFlags[] = {
    {"--lr", "training.learning_rate", "learning rate"},
    {"--clip", "training.grad_clip_norm", "global gradient norm clip"},
    {"--batch-size", "training.batch_size", "examples per batch"},
    {"--epochs", "training.epochs", "passes over the training set"},
    {"--max-steps", "training.max_steps", "stop after this many updates (0 = epochs only)"},
    {"--eval-interval", "training.eval_interval", "steps between validation passes"},
    {"--max-length", "data.max_length", "token cap per encoded side"},
    {"--data", "paths.data", "directory written by prepare-data"},
    {"--out", "paths.out", "checkpoint to write"},
    {"--log", "paths.log", "line-delimited JSON training log"},
};

constexpr FlagSpec kStudentFlags[] = {
    {"--teacher", "paths.teacher", "scenario teacher checkpoint"},
    {"--lm-teacher", "paths.lm_teacher", "language-model teacher checkpoint"},
    {"--lambda1", "training.lambda1", "imitation weight"},
    {"--alpha", "training.alpha", "representation imitation threshold"},
    {"--lambda-lm", "training.lambda_lm", "language-model imitation weight"},
    {"--temperature", "training.temperature", "imitation softmax temperature"},
    {"--hard-transfer", "training.hard_transfer_scope", "none | word-emb | encoder"},
};

constexpr FlagSpec kDecodeFlags[] = {
    {"--strategy", "decode.strategy", "greedy | beam"},
    {"--beam-width", "decode.beam_width", "beam width"},
    {"--max-response", "decode.max_length", "generated token cap"},
    {"--length-penalty", "decode.length_penalty", "length normalization exponent"},
};

struct Parsed {
  std::string config_file;
  std::vector<Assignment> flags;
};

template <std::size_t N>
void add_flags(CLI::App* app, Parsed& parsed, const FlagSpec (&specs)[N]) {
  for (const auto& s : specs) {
    app->add_option_function<std::string>(
        s.flag, [&parsed, key = std::string(s.key)](const std::string& v) { parsed.flags.emplace_back(key, v); },
        std::string(s.help) + " [" + s.key + "]");
  }
}

void add_common(CLI::App* app, Parsed& parsed) {
  app->add_option("--config", parsed.config_file, "JSON file of dotted configuration keys");
  app->add_option_function<std::string>(
      "--seed", [&parsed](const std::string& v) { parsed.flags.emplace_back("seed", v); }, "seed for all randomness");
  app->add_option_function<std::string>(
      "--preset", [&parsed](const std::string& v) { parsed.flags.emplace_back("preset", v); }, "paper | desk");
  app->add_option_function<std::vector<std::string>>(
      "--set",
      [&parsed](const std::vector<std::string>& items) {
        for (const auto& item : items) {
          const auto eq = item.find('=');
          if (eq == std::string::npos || eq == 0) throw UsageError("--set expects key=value, got '" + item + "'");
          parsed.flags.emplace_back(item.substr(0, eq), item.substr(eq + 1));
        }
      },
      "override any configuration key (key=value)");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Scenario-teacher distillation for dialogue response generation", "sdkd"};
  app.require_subcommand(1, 1);
  Parsed parsed;
  bool baseline = false;
  std::string window;

  std::map<std::string, CLI::App*> subs;
  auto sub = [&](const char* name, const char* help) {
    auto* s = app.add_subcommand(name, help);
    add_common(s, parsed);
    subs[name] = s;
    return s;
  };

  auto* prepare = sub("prepare-data", "window, filter and split a raw corpus; build the vocabulary");
  add_flags(prepare, parsed,
            (const FlagSpec[]){{"--corpus", "paths.corpus", "raw corpus"},
                               {"--format", "data.format", "eou | jsonl"},
                               {"--out", "paths.out", "output directory"},
                               {"--vocab-size", "data.vocab_size", "vocabulary cap including reserved tokens"},
                               {"--valid-fraction", "data.valid_fraction", "validation share"},
                               {"--test-fraction", "data.test_fraction", "test share"},
                               {"--stride", "data.stride", "window stride"}});
  prepare->add_option("--window", window, "history-response-future turn counts, e.g. 3-1-3");
  prepare->add_flag_function(
      "--no-filter", [&parsed](std::int64_t) { parsed.flags.emplace_back("data.filter", "false"); },
      "keep examples outside the length bounds");

  for (const char* name : {"train-teacher", "train-lm"}) {
    auto* s = sub(name, std::string(name) == "train-teacher" ? "train the scenario teacher on history and future"
                                                               : "train a decoder-only language model on responses");
    add_flags(s, parsed, kModelFlags);
    add_flags(s, parsed, kTrainingFlags);
  }
  auto* student = sub("train-student", "train the history-only student by imitation");
  add_flags(student, parsed, kModelFlags);
  add_flags(student, parsed, kTrainingFlags);
  add_flags(student, parsed, kStudentFlags);
  student->add_flag("--baseline", baseline, "plain likelihood training without a teacher");

  auto* gen = sub("generate", "generate one response per history");
  add_flags(gen, parsed,
            (const FlagSpec[]){{"--checkpoint", "paths.checkpoint", "model checkpoint"},
                               {"--corpus", "paths.corpus", "histories, one dialogue per record"},
                               {"--format", "data.format", "eou | jsonl"},
                               {"--out", "paths.out", "one response per line"},
                               {"--max-length", "data.max_length", "history token cap"}});
  add_flags(gen, parsed, kDecodeFlags);

  auto* eval = sub("evaluate", "write the metrics report for a checkpoint");
  add_flags(eval, parsed,
            (const FlagSpec[]){{"--checkpoint", "paths.checkpoint", "model checkpoint"},
                               {"--corpus", "paths.corpus", "examples file from prepare-data"},
                               {"--embeddings", "paths.embeddings", "word embedding text file"},
                               {"--out", "paths.out", "report JSON"},
                               {"--max-length", "data.max_length", "token cap per encoded side"}});
  add_flags(eval, parsed, kDecodeFlags);

  auto* robust = sub("analyze-robustness", "perplexity under Gaussian parameter noise");
  add_flags(robust, parsed,
            (const FlagSpec[]){{"--checkpoint", "paths.checkpoint", "model checkpoint"},
                               {"--corpus", "paths.corpus", "examples file"},
                               {"--sigmas", "analysis.sigmas", "comma-separated ascending noise levels from 0"},
                               {"--samples", "analysis.samples", "noise draws per level"},
                               {"--out", "paths.out", "line-delimited JSON series"}});

  auto* wordfreq = sub("analyze-wordfreq", "cosine between generated and reference word frequencies");
  add_flags(wordfreq, parsed,
            (const FlagSpec[]){{"--checkpoint", "paths.checkpoint", "model checkpoint"},
                               {"--corpus", "paths.corpus", "examples file"},
                               {"--top-k", "analysis.top_k", "most frequent reference words kept"},
                               {"--out", "paths.out", "result JSON"}});
  add_flags(wordfreq, parsed, kDecodeFlags);

  auto* classify = sub("classify-informative", "split examples into Uninformative and Other");
  add_flags(classify, parsed,
            (const FlagSpec[]){{"--corpus", "paths.corpus", "examples file"},
                               {"--strategy", "analysis.strategy", "exact-match | word-overlap | sentence-cluster"},
                               {"--embeddings", "paths.embeddings", "word embeddings (trained on the corpus if absent)"},
                               {"--out", "paths.out", "output directory"}});

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return 2;
  }

  try {
    std::vector<Assignment> assignments;
    if (!parsed.config_file.empty()) assignments = read_config_file(parsed.config_file);
    if (!window.empty()) {
      std::size_t h = 0, r = 0, f = 0;
      char d1 = 0, d2 = 0;
      std::istringstream ws(window);
      if (!(ws >> h >> d1 >> r >> d2 >> f) || d1 != '-' || d2 != '-' || h == 0 || r == 0 || f == 0) {
        throw UsageError("--window expects h-r-f with positive counts, got '" + window + "'");
      }
      assignments.emplace_back("data.history_turns", std::to_string(h));
      assignments.emplace_back("data.response_turns", std::to_string(r));
      assignments.emplace_back("data.future_turns", std::to_string(f));
    }
    assignments.insert(assignments.end(), parsed.flags.begin(), parsed.flags.end());
    Context ctx{build_run_config(assignments), out, err};
    ctx.config.validate();

    const std::string name = app.get_subcommands().front()->get_name();
    if (name == "prepare-data") cmd_prepare_data(ctx);
    else if (name == "train-teacher") cmd_train_plain(ctx, Variant::kScenario);
    else if (name == "train-lm") cmd_train_plain(ctx, Variant::kLanguageModel);
    else if (name == "train-student") cmd_train_student(ctx, baseline);
    else if (name == "generate") cmd_generate(ctx);
    else if (name == "evaluate") cmd_evaluate(ctx);
    else if (name == "analyze-robustness") cmd_analyze_robustness(ctx);
    else if (name == "analyze-wordfreq") cmd_analyze_wordfreq(ctx);
    else if (name == "classify-informative") cmd_classify_informative(ctx);
    return 0;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

int run(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, std::cout, std::cerr);
}

}  // namespace sdkd
