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

#ifndef VERNQA_TESTS_SUPPORT_FIXTURES_H_
#define VERNQA_TESTS_SUPPORT_FIXTURES_H_

// Fixtures shared by the unit tests and the acceptance runner.

#include <chrono>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "support/oracles.h"
#include "vernqa/corpus.h"
#include "vernqa/evalkit.h"
#include "vernqa/pipeline.h"
#include "vernqa/rng.h"
#include "vernqa/summarizer.h"
#include "vernqa/trainer.h"

namespace vernqa::testing {

// ---- gradient cases ------------------------------------------------------

struct GradientCase {
  EncoderParams params;
  std::vector<TokenSeq> questions;
  std::vector<TokenSeq> answers;
};

inline TokenSeq random_sequence(Rng& rng, std::size_t vocab, std::size_t max_len) {
  TokenSeq s;
  s.true_len = 2 + rng.below(max_len - 1);
  s.ids.assign(max_len, kPadId);
  s.ids[0] = kClsId;
  for (std::size_t i = 1; i + 1 < s.true_len; ++i)
    s.ids[i] = static_cast<TokenId>(kFirstWordId + rng.below(vocab - kFirstWordId));
  s.ids[s.true_len - 1] = kEosId;
  return s;
}

// d_model 8, one layer, batch of 2..4, head count and widths drawn at
// random. Parameters are jittered away from their init so no gradient is
// structurally zero.
inline GradientCase random_gradient_case(std::uint64_t seed) {
  Rng rng(seed);
  EncoderConfig c;
  c.vocab_size = 12;
  c.d_model = 8;
  c.n_layers = 1;
  const std::size_t heads[] = {1, 2, 4};
  c.n_heads = heads[rng.below(3)];
  c.d_ff = 4 + rng.below(9);
  c.max_len = 6;
  c.d_embed = 2 + rng.below(5);
  c.seed = seed;
  GradientCase g{init_params(c), {}, {}};
  for (auto& t : g.params.tensors())
    for (Eigen::Index i = 0; i < t.value->size(); ++i) t.value->data()[i] += 0.1 * rng.normal();
  const std::size_t b = 2 + rng.below(3);
  for (std::size_t i = 0; i < b; ++i) {
    g.questions.push_back(random_sequence(rng, c.vocab_size, c.max_len));
    g.answers.push_back(random_sequence(rng, c.vocab_size, c.max_len));
  }
  return g;
}

inline GradMismatch check_gradient_case(const GradientCase& g) {
  EncoderParams grads = zero_params(g.params.config);
  batch_objective(g.params, g.questions, g.answers, &grads);
  return finite_difference_check(g.params, grads, [&](const EncoderParams& p) {
    return batch_objective(p, g.questions, g.answers, nullptr).loss;
  });
}

// ---- summarizer ----------------------------------------------------------

struct BlobFixture {
  std::string text;
  std::vector<std::string> sentences;
  std::map<std::string, Eigen::VectorXd> embeddings;
  std::vector<int> blob;  // 0 or 1 per sentence
};

// Six sentences, interleaved between two well-separated blobs.
inline BlobFixture two_blob_fixture() {
  BlobFixture f;
  f.sentences = {"Patient reports high fever.",       "Blood pressure is stable.",
                 "Fever persisted for three days.",   "Heart rate normal on review.",
                 "Temperature peaked at night.",      "Pulse and pressure unchanged."};
  const double offsets[6][2] = {{0.3, -0.2}, {0.1, 0.4}, {-0.4, 0.1},
                                {-0.2, -0.3}, {0.2, 0.3}, {0.35, 0.05}};
  for (std::size_t i = 0; i < 6; ++i) {
    const int b = static_cast<int>(i % 2);
    Eigen::VectorXd v(3);
    v << (b ? -10.0 : 10.0) + offsets[i][0], (b ? 10.0 : -10.0) + offsets[i][1], 0.5 * offsets[i][0];
    f.embeddings[f.sentences[i]] = v;
    f.blob.push_back(b);
    f.text += (i ? " " : "") + f.sentences[i];
  }
  return f;
}

inline SentenceEmbedder map_embedder(const std::map<std::string, Eigen::VectorXd>& m) {
  return [m](const std::string& s) { return m.at(s); };
}

// Stand-in embedder for sentences without a trained model: a fixed random
// projection of hashed tokens, deterministic per sentence.
inline SentenceEmbedder hashed_embedder(std::size_t dim = 8) {
  return [dim](const std::string& s) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim));
    for (const auto& tok : tokenize(s)) {
      Rng rng(std::hash<std::string>{}(tok));
      for (std::size_t i = 0; i < dim; ++i) v(static_cast<Eigen::Index>(i)) += rng.normal();
    }
    return v;
  };
}

// ---- metrics -------------------------------------------------------------

// Ranks 1, 2, 3, absent, 1, and an empty list.
// strict = recall@1 = 2/6, recall@2 = 3/6, recall@3 = recall@10 = 4/6,
// MRR = (1 + 1/2 + 1/3 + 0 + 1 + 0) / 6 = 17/36.
inline std::vector<EvalRecord> six_record_fixture() {
  return {{"q1", "a", {"a", "b", "c"}},
          {"q2", "a", {"b", "a", "c"}},
          {"q3", "a", {"b", "c", "a"}},
          {"q4", "a", {"b", "c", "d"}},
          {"q5", "x", {"x"}},
          {"q6", "a", {}}};
}

inline std::vector<EvalRecord> random_records(Rng& rng, std::size_t n) {
  std::vector<EvalRecord> out;
  for (std::size_t i = 0; i < n; ++i) {
    EvalRecord r{"q" + std::to_string(i), "g", {}};
    const std::size_t len = rng.below(8);
    for (std::size_t j = 0; j < len; ++j) r.ranked_ids.push_back("n" + std::to_string(j));
    if (len > 0 && rng.below(3) != 0) r.ranked_ids[rng.below(len)] = "g";
    out.push_back(std::move(r));
  }
  return out;
}

// ---- overfit experiment --------------------------------------------------

struct OverfitResult {
  std::uint64_t epochs = 0;
  double in_batch_accuracy = 0.0;
  double strict_accuracy = 0.0;
  double seconds = 0.0;
  std::vector<double> losses;
  EncoderParams params;
  Vocabulary vocab;
  Corpus corpus;
};

inline EvalReport evaluate_on_self(const EncoderParams& params, const Vocabulary& vocab,
                                   const Corpus& corpus) {
  const Index index = build_corpus_index(params, vocab, corpus);
  Ranker ranker = [&](const QAPair& p, std::size_t depth) {
    const auto q = to_float(encode(params, encode_text(vocab, p.question, params.config.max_len),
                                   Head::kQuestion));
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& h : index.search_topk(q, depth))
      out.emplace_back(h.answer_id, index.payload(static_cast<std::size_t>(index.find(h.answer_id))));
    return out;
  };
  return run_eval(ranker, corpus, {1, 5});
}

// Trains the default toy config on the 64 synthetic pairs, stopping at the
// first epoch with in-batch diagonal accuracy 1.0 and full-index strict
// accuracy 1.0 on the training set. `min_epochs` keeps training past that
// point (for loss-curve checks).
inline OverfitResult run_overfit(std::uint64_t seed, std::size_t max_epochs,
                                 std::size_t min_epochs = 0) {
  OverfitResult r;
  r.corpus = synthetic_corpus(64);
  r.vocab = build_vocab(r.corpus);
  EncoderConfig cfg;
  cfg.vocab_size = r.vocab.size();
  cfg.seed = seed;
  r.params = init_params(cfg);
  OptimizerState state = OptimizerState::for_params(r.params);
  TrainConfig tc;
  tc.epochs = max_epochs;
  tc.shuffle_seed = seed;
  bool done = false;
  const auto t0 = std::chrono::steady_clock::now();
  train(r.params, state, r.corpus, r.vocab, tc, [&](const EpochReport& e) {
    r.epochs = e.epoch;
    r.losses.push_back(e.mean_loss);
    if (!done && e.diag_accuracy == 1.0) {
      const double strict = evaluate_on_self(r.params, r.vocab, r.corpus).strict_accuracy;
      if (strict == 1.0) {
        done = true;
        r.in_batch_accuracy = e.diag_accuracy;
        r.strict_accuracy = strict;
      }
    }
    return !(done && e.epoch >= min_epochs);
  });
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

// The seed-42 overfit model, trained once per process.
inline const OverfitResult& overfit_model() {
  static const OverfitResult model = run_overfit(42, 500);
  return model;
}

// Pipeline over the overfit model with an answer-side exact index.
inline std::shared_ptr<const Pipeline> overfit_pipeline(TranslatorRegistry registry = {},
                                                        ComposeOptions compose = {}) {
  const OverfitResult& m = overfit_model();
  return std::make_shared<const Pipeline>(m.vocab, m.params,
                                          AnyIndex(build_corpus_index(m.params, m.vocab, m.corpus)),
                                          std::move(registry), std::move(compose));
}

}  // namespace vernqa::testing

#endif  // VERNQA_TESTS_SUPPORT_FIXTURES_H_
