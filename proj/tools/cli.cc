// Copyright 2026 The VernQA Authors
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


#include "cli.h"

#include <pthread.h>
#include <signal.h>

#include <cstdint>
#include <fstream>
#include <iomanip>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"
#include "vernqa/corpus.h"
#include "vernqa/error.h"
#include "vernqa/evalkit.h"
#include "vernqa/pipeline.h"
#include "vernqa/service.h"
#include "vernqa/simindex.h"
#include "vernqa/summarizer.h"
#include "vernqa/textpipe.h"
#include "vernqa/tinybert.h"
#include "vernqa/trainer.h"

namespace vernqa::cli {
namespace {

using json = nlohmann::json;

// A flag value that parsed but is not meaningful. Reported like a parse error.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Context {
  std::ostream& out;
  std::ostream& err;
  std::string config_path;
  bool json_output = false;

  ServiceConfig config() const {
    return config_path.empty() ? ServiceConfig{} : ServiceConfig::load(config_path);
  }
  void emit(const json& j) const { out << j.dump(2) << '\n'; }
};

// Copies a parsed flag (or its environment variable) over `target`, which
// holds the config-file value or the default.
template <class T, class U>
void overlay(const CLI::Option* opt, const T& value, U& target) {
  if (opt != nullptr && opt->count() > 0) target = value;
}

AdapterSpec parse_dict(const std::string& spec) {
  const auto a = spec.find(':');
  const auto b = a == std::string::npos ? a : spec.find(':', a + 1);
  if (b == std::string::npos || a == 0 || b == a + 1 || b + 1 == spec.size()) {
    throw UsageError("--dict expects SRC:TGT:PATH, got '" + spec + "'");
  }
  return {normalize_lang(spec.substr(0, a)), normalize_lang(spec.substr(a + 1, b - a - 1)),
          spec.substr(b + 1)};
}

// --vocab / --checkpoint / --index / --dict, shared by every subcommand that
// loads trained artifacts.
struct ArtifactFlags {
  std::string vocab, checkpoint, index;
  std::vector<std::string> dicts;
  CLI::Option* vocab_opt = nullptr;
  CLI::Option* checkpoint_opt = nullptr;
  CLI::Option* index_opt = nullptr;
  CLI::Option* dict_opt = nullptr;

  void add(CLI::App* app, bool with_index) {
    vocab_opt = app->add_option("--vocab", vocab, "Vocabulary file (artifacts.vocab)")
                    ->envname("VERNQA_VOCAB");
    checkpoint_opt =
        app->add_option("--checkpoint", checkpoint, "Model checkpoint (artifacts.checkpoint)")
            ->envname("VERNQA_CHECKPOINT");
    if (with_index) {
      index_opt = app->add_option("--index", index, "Similarity index (artifacts.index)")
                      ->envname("VERNQA_INDEX");
      dict_opt = app->add_option("--dict", dicts,
                                 "Dictionary adapter SRC:TGT:PATH, repeatable (artifacts.adapters)");
    }
  }

  void apply(PipelinePaths& paths) const {
    overlay(vocab_opt, vocab, paths.vocab);
    overlay(checkpoint_opt, checkpoint, paths.checkpoint);
    overlay(index_opt, index, paths.index);
    if (dict_opt != nullptr && dict_opt->count() > 0) {
      paths.adapters.clear();
      for (const std::string& d : dicts) paths.adapters.push_back(parse_dict(d));
    }
  }
};

void require_path(const std::string& value, const char* flag) {
  if (value.empty()) throw UsageError(std::string(flag) + " is required (flag, env or config)");
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open for writing: " + path);
  f << text;
  if (!f) throw IoError("write failed: " + path);
}

std::string read_text(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open: " + path);
  std::ostringstream buf;
  buf << f.rdbuf();
  return buf.str();
}

// ---------------------------------------------------------------- corpus

struct DedupeFlags {
  std::string input, output;
};

int run_dedupe(const Context& ctx, const DedupeFlags& f) {
  const Corpus in = load_corpus(f.input);
  const Corpus out = dedupe(in);
  save_corpus(out, f.output);
  const std::size_t removed = in.size() - out.size();
  if (ctx.json_output) {
    ctx.emit({{"input_pairs", in.size()},
              {"output_pairs", out.size()},
              {"removed", removed},
              {"output", f.output}});
  } else {
    ctx.out << "wrote " << out.size() << " pairs to " << f.output << " (" << removed
            << " duplicates removed)\n";
  }
  return kExitOk;
}

struct SplitFlags {
  std::string input, train_output, test_output;
  double test_fraction = 0.2;
  std::uint64_t seed = 0;
};

int run_split(const Context& ctx, const SplitFlags& f) {
  const CorpusSplit s = split(load_corpus(f.input), f.test_fraction, f.seed);
  save_corpus(s.train, f.train_output);
  save_corpus(s.test, f.test_output);
  if (ctx.json_output) {
    ctx.emit({{"train_pairs", s.train.size()},
              {"test_pairs", s.test.size()},
              {"seed", f.seed},
              {"train_output", f.train_output},
              {"test_output", f.test_output}});
  } else {
    ctx.out << "train: " << s.train.size() << " pairs -> " << f.train_output << '\n'
            << "test: " << s.test.size() << " pairs -> " << f.test_output << '\n';
  }
  return kExitOk;
}

struct SynthFlags {
  std::size_t count = 64;
  std::string output;
};

int run_synth(const Context& ctx, const SynthFlags& f) {
  const Corpus c = synthetic_corpus(f.count);
  save_corpus(c, f.output);
  if (ctx.json_output) {
    ctx.emit({{"pairs", c.size()}, {"output", f.output}});
  } else {
    ctx.out << "wrote " << c.size() << " pairs to " << f.output << '\n';
  }
  return kExitOk;
}

// ---------------------------------------------------------------- vocab

struct VocabFlags {
  std::string corpus, output;
  std::size_t max_size = kDefaultVocabMaxSize;
  std::size_t min_freq = kDefaultMinFreq;
};

int run_vocab(const Context& ctx, const VocabFlags& f) {
  const Vocabulary v = build_vocab(load_corpus(f.corpus), f.max_size, f.min_freq);
  v.save(f.output);
  if (ctx.json_output) {
    ctx.emit({{"size", v.size()}, {"hash", v.content_hash()}, {"output", f.output}});
  } else {
    ctx.out << "wrote " << v.size() << " tokens to " << f.output << " (hash "
            << v.content_hash() << ")\n";
  }
  return kExitOk;
}

// ---------------------------------------------------------------- train

struct TrainFlags {
  std::string corpus, vocab, output, resume;
  EncoderConfig model;
  TrainConfig train;
  std::uint64_t seed = 0;
  bool stop_at_fit = false;
};

int run_train(const Context& ctx, TrainFlags f) {
  const Corpus corpus = load_corpus(f.corpus);
  const Vocabulary vocab = Vocabulary::load(f.vocab);
  f.train.shuffle_seed = f.seed;
  f.train.checkpoint_path = f.output;

  Checkpoint ckpt;
  if (!f.resume.empty()) {
    ckpt = load_checkpoint(f.resume);
    if (ckpt.vocab_hash != vocab.content_hash()) {
      throw InvalidArgument("vocabulary " + f.vocab + " does not match checkpoint " + f.resume);
    }
  } else {
    f.model.vocab_size = vocab.size();
    f.model.seed = f.seed;
    f.model.validate();
    ckpt.params = init_params(f.model);
    ckpt.optimizer = OptimizerState::for_params(ckpt.params);
    ckpt.vocab_hash = vocab.content_hash();
  }
  ckpt.train_config = f.train;

  json epochs = json::array();
  bool stopped_early = false;
  train(ckpt.params, ckpt.optimizer, corpus, vocab, f.train, [&](const EpochReport& r) {
    epochs.push_back({{"epoch", r.epoch},
                      {"mean_loss", r.mean_loss},
                      {"diag_accuracy", r.diag_accuracy},
                      {"batches", r.batches}});
    if (!ctx.json_output) {
      ctx.out << "epoch " << r.epoch << "  loss " << std::fixed << std::setprecision(6)
              << r.mean_loss << "  diag_acc " << std::setprecision(4) << r.diag_accuracy << '\n'
              << std::defaultfloat;
    }
    if (f.stop_at_fit && r.diag_accuracy >= 1.0) {
      stopped_early = epochs.size() < f.train.epochs;
      return false;
    }
    return true;
  });
  save_checkpoint(ckpt, f.output);

  if (ctx.json_output) {
    ctx.emit({{"checkpoint", f.output},
              {"parameter_count", ckpt.params.parameter_count()},
              {"epochs_completed", ckpt.optimizer.epochs_completed},
              {"stopped_early", stopped_early},
              {"epochs", epochs}});
  } else {
    ctx.out << "wrote " << f.output << " (" << ckpt.params.parameter_count() << " parameters, "
            << ckpt.optimizer.epochs_completed << " epochs)\n";
  }
  return kExitOk;
}

// ---------------------------------------------------------------- index

struct IndexBuildFlags {
  std::string corpus, output, side = "answer";
  ArtifactFlags artifacts;
};

int run_index_build(const Context& ctx, const IndexBuildFlags& f) {
  PipelinePaths paths = ctx.config().artifacts;
  f.artifacts.apply(paths);
  require_path(paths.vocab, "--vocab");
  require_path(paths.checkpoint, "--checkpoint");
  const Vocabulary vocab = Vocabulary::load(paths.vocab);
  const Checkpoint ckpt = load_checkpoint(paths.checkpoint);
  if (ckpt.vocab_hash != vocab.content_hash()) {
    throw InvalidArgument("vocabulary " + paths.vocab + " does not match checkpoint " +
                          paths.checkpoint);
  }
  const IndexSide side = f.side == "question" ? IndexSide::kQuestion : IndexSide::kAnswer;
  const Index index = build_corpus_index(ckpt.params, vocab, load_corpus(f.corpus), side);
  save_index(index, f.output);
  if (ctx.json_output) {
    ctx.emit({{"count", index.size()},
              {"dimension", index.dimension()},
              {"side", f.side},
              {"output", f.output}});
  } else {
    ctx.out << "wrote " << index.size() << " x " << index.dimension() << " index to " << f.output
            << '\n';
  }
  return kExitOk;
}

struct QuantizeFlags {
  std::string input, output;
};

int run_quantize(const Context& ctx, const QuantizeFlags& f) {
  const AnyIndex in = load_index(f.input);
  const Index* exact = std::get_if<Index>(&in);
  if (exact == nullptr) throw InvalidArgument(f.input + " is already quantized");
  const QuantizedIndex q = QuantizedIndex::quantize(*exact);
  save_index(q, f.output);
  if (ctx.json_output) {
    ctx.emit({{"count", q.size()}, {"dimension", q.dimension()}, {"output", f.output}});
  } else {
    ctx.out << "wrote int8 index of " << q.size() << " vectors to " << f.output << '\n';
  }
  return kExitOk;
}

// ---------------------------------------------------------------- ask

struct AskFlags {
  std::string question, lang, composer;
  std::size_t top_k = 0, max_sentences = 0;
  CLI::Option* lang_opt = nullptr;
  CLI::Option* top_k_opt = nullptr;
  CLI::Option* composer_opt = nullptr;
  CLI::Option* max_sentences_opt = nullptr;
  ArtifactFlags artifacts;
};

ComposerMode composer_flag(const std::string& name) {
  try {
    return parse_composer_mode(name);
  } catch (const InvalidArgument& e) {
    throw UsageError(std::string("--composer: ") + e.what());
  }
}

int run_ask(const Context& ctx, const AskFlags& f) {
  ServiceConfig cfg = ctx.config();
  f.artifacts.apply(cfg.artifacts);
  overlay(f.lang_opt, f.lang, cfg.default_lang);
  overlay(f.top_k_opt, f.top_k, cfg.top_k_default);
  if (f.composer_opt != nullptr && f.composer_opt->count() > 0) {
    cfg.compose.mode = composer_flag(f.composer);
  }
  overlay(f.max_sentences_opt, f.max_sentences, cfg.compose.max_sentences);
  require_path(cfg.artifacts.vocab, "--vocab");
  require_path(cfg.artifacts.checkpoint, "--checkpoint");
  require_path(cfg.artifacts.index, "--index");

  const auto pipeline = Pipeline::load(cfg.artifacts, cfg.compose);
  const AnswerBundle a = pipeline->ask(f.question, cfg.default_lang, cfg.top_k_default);
  if (ctx.json_output) {
    json hits = json::array();
    for (const RetrievedAnswer& h : a.hits) {
      hits.push_back({{"answer_id", h.hit.answer_id}, {"score", h.hit.score}, {"text", h.text}});
    }
    ctx.emit({{"answer", a.final_text},
              {"lang", a.query_lang},
              {"english_query", a.english_query},
              {"composer_mode", a.composer_mode},
              {"hits", hits}});
  } else {
    ctx.out << a.final_text << '\n';
  }
  return kExitOk;
}

// ---------------------------------------------------------------- summarize

struct SummarizeFlags {
  std::string text, file, k_rule;
  std::size_t max_sentences = 0, max_iters = 0;
  std::uint64_t seed = 0;
  CLI::Option* text_opt = nullptr;
  CLI::Option* file_opt = nullptr;
  CLI::Option* k_rule_opt = nullptr;
  CLI::Option* max_sentences_opt = nullptr;
  CLI::Option* max_iters_opt = nullptr;
  CLI::Option* seed_opt = nullptr;
  ArtifactFlags artifacts;
};

int run_summarize(const Context& ctx, const SummarizeFlags& f) {
  ServiceConfig cfg = ctx.config();
  f.artifacts.apply(cfg.artifacts);
  if (f.k_rule_opt->count() > 0) {
    try {
      cfg.summary.k_rule = KRule::parse(f.k_rule);
    } catch (const InvalidArgument& e) {
      throw UsageError(std::string("--k-rule: ") + e.what());
    }
  }
  overlay(f.max_sentences_opt, f.max_sentences, cfg.summary.max_sentences);
  overlay(f.max_iters_opt, f.max_iters, cfg.summary.kmeans_max_iters);
  overlay(f.seed_opt, f.seed, cfg.summary.kmeans_seed);
  require_path(cfg.artifacts.vocab, "--vocab");
  require_path(cfg.artifacts.checkpoint, "--checkpoint");

  if (f.text_opt->count() == 0 && f.file_opt->count() == 0) {
    throw UsageError("one of --text or --file is required");
  }
  const std::string text = f.file_opt->count() > 0 ? read_text(f.file) : f.text;
  const SentenceSet sentences = split_sentences(text);
  if (sentences.empty()) throw InvalidArgument("nothing to summarize");

  const Vocabulary vocab = Vocabulary::load(cfg.artifacts.vocab);
  const Checkpoint ckpt = load_checkpoint(cfg.artifacts.checkpoint);
  if (ckpt.vocab_hash != vocab.content_hash()) {
    throw InvalidArgument("vocabulary " + cfg.artifacts.vocab + " does not match checkpoint " +
                          cfg.artifacts.checkpoint);
  }
  const SentenceEmbedder embed = [&](const std::string& s) {
    return encode(ckpt.params, encode_text(vocab, s, ckpt.params.config.max_len), Head::kAnswer);
  };
  const Summary summary = summarize(sentences, embed, cfg.summary);
  if (ctx.json_output) {
    json out = json::array();
    for (const Sentence& s : summary.sentences) out.push_back(s.text);
    ctx.emit({{"summary_sentences", out}, {"k_used", summary.k_used}});
  } else {
    for (const Sentence& s : summary.sentences) ctx.out << s.text << '\n';
  }
  return kExitOk;
}

// ---------------------------------------------------------------- eval

struct EvalFlags {
  std::string corpus, output;
  std::vector<std::size_t> k_list{1, 5};
  bool string_fallback = false;
  ArtifactFlags artifacts;
};

int run_eval_cmd(const Context& ctx, const EvalFlags& f) {
  for (std::size_t k : f.k_list) {
    if (k == 0) throw UsageError("--k values must be >= 1");
  }
  PipelinePaths paths = ctx.config().artifacts;
  f.artifacts.apply(paths);
  require_path(paths.vocab, "--vocab");
  require_path(paths.checkpoint, "--checkpoint");
  require_path(paths.index, "--index");
  const auto pipeline = Pipeline::load(paths);
  EvalOptions opts;
  opts.string_fallback = f.string_fallback;
  const EvalReport report = run_eval(*pipeline, load_corpus(f.corpus), f.k_list, opts);
  if (!f.output.empty()) write_text(f.output, report.to_json() + "\n");
  if (ctx.json_output) {
    ctx.out << report.to_json() << '\n';
  } else {
    ctx.out << report.to_table();
  }
  return kExitOk;
}

// ---------------------------------------------------------------- serve

struct ServeFlags {
  std::string host, data_dir;
  int port = 0;
  CLI::Option* host_opt = nullptr;
  CLI::Option* port_opt = nullptr;
  CLI::Option* data_dir_opt = nullptr;
  ArtifactFlags artifacts;
};

int run_serve(const Context& ctx, const ServeFlags& f) {
  ServiceConfig cfg = ctx.config();
  f.artifacts.apply(cfg.artifacts);
  overlay(f.host_opt, f.host, cfg.host);
  overlay(f.port_opt, f.port, cfg.port);
  overlay(f.data_dir_opt, f.data_dir, cfg.data_dir);

  // Block the signals before the server spawns threads so only the waiter
  // below receives them.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  std::unique_ptr<Service> service = Service::from_config(cfg);
  int port = cfg.port;
  if (port == 0) {
    port = service->bind_ephemeral();
    if (port < 0) throw IoError("cannot bind " + cfg.host);
  }
  std::thread waiter([&] {
    int sig = 0;
    sigwait(&signals, &sig);
    service->stop();
  });
  ctx.out << "listening on http://" << cfg.host << ':' << port << std::endl;
  const bool ok = cfg.port == 0 ? service->listen_after_bind() : service->listen();
  pthread_kill(waiter.native_handle(), SIGTERM);
  waiter.join();
  if (!ok) throw IoError("cannot listen on " + cfg.host + ":" + std::to_string(cfg.port));
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"VernQA: multilingual medical question answering", "vernqa"};
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);

  Context ctx{out, err, {}, false};
  app.add_option("--config", ctx.config_path, "JSON config file (same format as serve)")
      ->envname("VERNQA_CONFIG");

  auto add_json = [&](CLI::App* sub) {
    sub->add_flag("--json", ctx.json_output, "Machine-readable output");
  };

  DedupeFlags dd;
  CLI::App* dedupe_cmd = app.add_subcommand("corpus-dedupe", "Drop duplicate QA pairs");
  dedupe_cmd->add_option("--input", dd.input, "Input corpus (JSONL)")->required();
  dedupe_cmd->add_option("--output", dd.output, "Output corpus (JSONL)")->required();
  add_json(dedupe_cmd);

  SplitFlags sp;
  CLI::App* split_cmd = app.add_subcommand("corpus-split", "Seeded train/test split");
  split_cmd->add_option("--input", sp.input, "Input corpus (JSONL)")->required();
  split_cmd->add_option("--train-output", sp.train_output, "Train corpus path")->required();
  split_cmd->add_option("--test-output", sp.test_output, "Test corpus path")->required();
  split_cmd->add_option("--test-fraction", sp.test_fraction, "Fraction held out")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  split_cmd->add_option("--seed", sp.seed, "Shuffle seed")->capture_default_str();
  add_json(split_cmd);

  SynthFlags sy;
  CLI::App* synth_cmd = app.add_subcommand("corpus-synth", "Write the built-in demo corpus");
  synth_cmd->add_option("--count", sy.count, "Number of pairs")
      ->check(CLI::Range(std::size_t{1}, std::size_t{64}))
      ->capture_default_str();
  synth_cmd->add_option("--output", sy.output, "Output corpus (JSONL)")->required();
  add_json(synth_cmd);

  VocabFlags vf;
  CLI::App* vocab_cmd = app.add_subcommand("vocab-build", "Build a vocabulary from a corpus");
  vocab_cmd->add_option("--corpus", vf.corpus, "Corpus (JSONL)")->required();
  vocab_cmd->add_option("--output", vf.output, "Vocabulary file")->required();
  vocab_cmd->add_option("--max-size", vf.max_size, "Cap including special tokens")
      ->check(CLI::Range(std::size_t{4}, std::size_t{1} << 24))
      ->capture_default_str();
  vocab_cmd->add_option("--min-freq", vf.min_freq, "Minimum token frequency")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  add_json(vocab_cmd);

  TrainFlags tf;
  tf.train.epochs = 10;
  CLI::App* train_cmd = app.add_subcommand("train", "Train the dual encoder");
  train_cmd->add_option("--corpus", tf.corpus, "Training corpus (JSONL)")->required();
  train_cmd->add_option("--vocab", tf.vocab, "Vocabulary file")->required();
  train_cmd->add_option("--output", tf.output, "Checkpoint to write")->required();
  train_cmd->add_option("--resume", tf.resume, "Continue from this checkpoint");
  train_cmd->add_option("--epochs", tf.train.epochs, "Epochs to run")->capture_default_str();
  train_cmd->add_option("--batch-size", tf.train.batch_size, "Batch size")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  train_cmd->add_option("--lr", tf.train.learning_rate, "Adam learning rate")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  train_cmd->add_option("--seed", tf.seed, "Initialization and shuffle seed")
      ->capture_default_str();
  train_cmd->add_option("--d-model", tf.model.d_model, "Hidden width")->capture_default_str();
  train_cmd->add_option("--layers", tf.model.n_layers, "Transformer layers")
      ->capture_default_str();
  train_cmd->add_option("--heads", tf.model.n_heads, "Attention heads")->capture_default_str();
  train_cmd->add_option("--d-ff", tf.model.d_ff, "Feed-forward width")->capture_default_str();
  train_cmd->add_option("--max-len", tf.model.max_len, "Sequence length")->capture_default_str();
  train_cmd->add_option("--d-embed", tf.model.d_embed, "Embedding size")->capture_default_str();
  train_cmd->add_flag("--stop-at-fit", tf.stop_at_fit,
                      "Stop after the first epoch with in-batch accuracy 1.0");
  add_json(train_cmd);

  IndexBuildFlags ib;
  CLI::App* index_cmd = app.add_subcommand("index-build", "Embed a corpus into an index");
  index_cmd->add_option("--corpus", ib.corpus, "Corpus (JSONL)")->required();
  index_cmd->add_option("--output", ib.output, "Index file")->required();
  index_cmd->add_option("--side", ib.side, "Text embedded per pair")
      ->check(CLI::IsMember({"answer", "question"}))
      ->capture_default_str();
  ib.artifacts.add(index_cmd, false);
  add_json(index_cmd);

  QuantizeFlags qf;
  CLI::App* quant_cmd = app.add_subcommand("index-quantize", "Convert an index to int8");
  quant_cmd->add_option("--input", qf.input, "Exact index file")->required();
  quant_cmd->add_option("--output", qf.output, "Quantized index file")->required();
  add_json(quant_cmd);

  AskFlags af;
  CLI::App* ask_cmd = app.add_subcommand("ask", "Answer one question");
  ask_cmd->add_option("--q,--question", af.question, "Question text")->required();
  af.lang_opt =
      ask_cmd->add_option("--lang", af.lang, "Question language (default_lang)")
          ->envname("VERNQA_LANG");
  af.top_k_opt = ask_cmd->add_option("--top-k", af.top_k, "Hits retrieved (top_k_default)")
                     ->check(CLI::PositiveNumber);
  af.composer_opt = ask_cmd->add_option("--composer", af.composer,
                                        "top1 | stitch | generator (composer.mode)");
  af.max_sentences_opt =
      ask_cmd->add_option("--max-sentences", af.max_sentences,
                          "Sentence cap for stitch (composer.max_sentences)")
          ->check(CLI::PositiveNumber);
  af.artifacts.add(ask_cmd, true);
  add_json(ask_cmd);

  SummarizeFlags sf;
  CLI::App* sum_cmd = app.add_subcommand("summarize", "Extractive summary of a text");
  sf.text_opt = sum_cmd->add_option("--text", sf.text, "Text to summarize");
  sf.file_opt = sum_cmd->add_option("--file", sf.file, "File to summarize");
  sf.text_opt->excludes(sf.file_opt);
  sf.k_rule_opt =
      sum_cmd->add_option("--k-rule", sf.k_rule, "sqrt | fixed:K | ratio:R (summary.k_rule)");
  sf.max_sentences_opt =
      sum_cmd->add_option("--max-sentences", sf.max_sentences, "Cap (summary.max_sentences)")
          ->check(CLI::PositiveNumber);
  sf.max_iters_opt = sum_cmd->add_option("--max-iters", sf.max_iters,
                                         "Lloyd iteration cap (summary.max_iters)")
                         ->check(CLI::PositiveNumber);
  sf.seed_opt = sum_cmd->add_option("--seed", sf.seed, "k-means seed (summary.seed)");
  sf.artifacts.add(sum_cmd, false);
  add_json(sum_cmd);

  EvalFlags ef;
  CLI::App* eval_cmd = app.add_subcommand("eval", "Strict accuracy, recall@k and MRR");
  eval_cmd->add_option("--corpus", ef.corpus, "Evaluation corpus (JSONL)")->required();
  eval_cmd->add_option("--k", ef.k_list, "Recall cutoffs, comma separated")
      ->delimiter(',')
      ->capture_default_str();
  eval_cmd->add_flag("--string-fallback", ef.string_fallback,
                     "Also accept hits whose text equals the gold answer");
  eval_cmd->add_option("--output", ef.output, "Also write the JSON report here");
  ef.artifacts.add(eval_cmd, true);
  add_json(eval_cmd);

  ServeFlags vf2;
  CLI::App* serve_cmd = app.add_subcommand("serve", "Run the HTTP service");
  vf2.host_opt = serve_cmd->add_option("--host", vf2.host, "Bind address (host)")
                     ->envname("VERNQA_HOST");
  vf2.port_opt = serve_cmd->add_option("--port", vf2.port, "Port, 0 for ephemeral (port)")
                     ->check(CLI::Range(0, 65535))
                     ->envname("VERNQA_PORT");
  vf2.data_dir_opt =
      serve_cmd->add_option("--data-dir", vf2.data_dir, "Session and EHR storage (data_dir)")
          ->envname("VERNQA_DATA_DIR");
  vf2.artifacts.add(serve_cmd, true);

  std::vector<const char*> argv{"vernqa"};
  for (const std::string& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  CLI::App* sub = app.get_subcommands().front();
  try {
    if (sub == dedupe_cmd) return run_dedupe(ctx, dd);
    if (sub == split_cmd) return run_split(ctx, sp);
    if (sub == synth_cmd) return run_synth(ctx, sy);
    if (sub == vocab_cmd) return run_vocab(ctx, vf);
    if (sub == train_cmd) return run_train(ctx, tf);
    if (sub == index_cmd) return run_index_build(ctx, ib);
    if (sub == quant_cmd) return run_quantize(ctx, qf);
    if (sub == ask_cmd) return run_ask(ctx, af);
    if (sub == sum_cmd) return run_summarize(ctx, sf);
    if (sub == eval_cmd) return run_eval_cmd(ctx, ef);
    if (sub == serve_cmd) return run_serve(ctx, vf2);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n\n" << sub->help();
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace vernqa::cli
