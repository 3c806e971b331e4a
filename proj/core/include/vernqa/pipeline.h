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

#ifndef VERNQA_PIPELINE_H_
#define VERNQA_PIPELINE_H_

// The ask path: inbound translation -> question embedding -> similarity
// lookup -> answer composition -> outbound translation.

#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vernqa/corpus.h"
#include "vernqa/error.h"
#include "vernqa/langbridge.h"
#include "vernqa/simindex.h"
#include "vernqa/summarizer.h"
#include "vernqa/textpipe.h"
#include "vernqa/tinybert.h"

namespace vernqa {

inline constexpr char kPivotLang[] = "en";

// The index holds nothing to answer with. Distinct from internal failures.
class NoAnswerError : public Error {
 public:
  using Error::Error;
};

class EmptyQuestionError : public InvalidArgument {
 public:
  EmptyQuestionError() : InvalidArgument("question is empty") {}
};

struct RetrievedAnswer {
  SearchHit hit;
  std::string text;
};

// Plug-in seam for a generative model that rewrites retrieved answers.
// Implementations must be deterministic for identical inputs and return a
// nonempty string whenever `retrieved` is nonempty.
class Generator {
 public:
  virtual ~Generator() = default;
  virtual std::string generate(std::string_view prompt,
                               std::span<const std::string> retrieved) const = 0;
};

// Default generator: keeps the retrieved sentences that share the most
// distinct tokens with the prompt, emitted in rank-then-position order.
class ExtractiveGenerator final : public Generator {
 public:
  explicit ExtractiveGenerator(std::size_t max_sentences = 3) : max_sentences_(max_sentences) {}
  std::string generate(std::string_view prompt,
                       std::span<const std::string> retrieved) const override;

 private:
  std::size_t max_sentences_;
};

enum class ComposerMode { kTop1, kStitch, kGenerator };

const char* composer_mode_name(ComposerMode mode);
ComposerMode parse_composer_mode(const std::string& name);

struct ComposeOptions {
  ComposerMode mode = ComposerMode::kStitch;
  std::size_t max_sentences = 8;
  std::shared_ptr<const Generator> generator;  // kGenerator; ExtractiveGenerator if null
};

// top1: best answer verbatim. stitch: sentences of all hits, deduplicated by
// normalized text, in rank-then-position order, capped at max_sentences.
// generator: delegates to options.generator. Throws NoAnswerError on no hits.
std::string compose_answer(std::string_view question, std::span<const RetrievedAnswer> hits,
                           const ComposeOptions& options);

struct AnswerBundle {
  std::string final_text;
  std::vector<RetrievedAnswer> hits;
  std::string query_lang;
  std::string english_query;
  std::string english_answer;
  std::string composer_mode;
};

struct AdapterSpec {
  std::string src;
  std::string tgt;
  std::string path;  // dictionary TSV
};

struct PipelinePaths {
  std::string vocab;
  std::string checkpoint;
  std::string index;
  std::vector<AdapterSpec> adapters;
};

// Immutable snapshot of everything needed to answer; safe for concurrent
// ask() calls. Reloading builds a new Pipeline.
class Pipeline {
 public:
  Pipeline(Vocabulary vocab, EncoderParams params, AnyIndex index, TranslatorRegistry registry,
           ComposeOptions compose = {});

  // Throws IoError / CorruptFile / InvalidArgument when an artifact is
  // missing, damaged, or inconsistent with the others.
  static std::shared_ptr<const Pipeline> load(const PipelinePaths& paths,
                                              ComposeOptions compose = {});

  AnswerBundle ask(std::string_view question, std::string_view lang, std::size_t top_k) const;

  // Translation + retrieval only.
  std::vector<RetrievedAnswer> retrieve(std::string_view question, std::string_view lang,
                                        std::size_t top_k) const;

  Eigen::VectorXd embed(std::string_view text, Head head) const;

  // Answer-head sentence embeddings for the summarizer.
  SentenceEmbedder sentence_embedder() const;

  const Vocabulary& vocab() const { return vocab_; }
  const EncoderParams& params() const { return params_; }
  const AnyIndex& index() const { return index_; }
  const TranslatorRegistry& registry() const { return registry_; }
  const ComposeOptions& compose_options() const { return compose_; }

 private:
  std::vector<RetrievedAnswer> search_english(std::string_view english_query,
                                              std::size_t top_k) const;

  Vocabulary vocab_;
  EncoderParams params_;
  AnyIndex index_;
  TranslatorRegistry registry_;
  ComposeOptions compose_;
};

// Which text of each pair is embedded into the index. kAnswer (the default)
// embeds answers with the answer head; kQuestion embeds questions with the
// question head for question-question lookup. Payloads are always answers.
enum class IndexSide { kAnswer, kQuestion };

Index build_corpus_index(const EncoderParams& params, const Vocabulary& vocab,
                         const Corpus& corpus, IndexSide side = IndexSide::kAnswer);

std::vector<float> to_float(const Eigen::VectorXd& v);

}  // namespace vernqa

#endif  // VERNQA_PIPELINE_H_
