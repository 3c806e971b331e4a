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

#include "vernqa/pipeline.h"

#include <algorithm>
#include <set>
#include <unordered_set>

#include "vernqa/text_util.h"
#include "vernqa/trainer.h"

namespace vernqa {

const char* composer_mode_name(ComposerMode mode) {
  switch (mode) {
    case ComposerMode::kTop1:
      return "top1";
    case ComposerMode::kGenerator:
      return "generator";
    default:
      return "stitch";
  }
}

ComposerMode parse_composer_mode(const std::string& name) {
  if (name == "top1") return ComposerMode::kTop1;
  if (name == "stitch") return ComposerMode::kStitch;
  if (name == "generator") return ComposerMode::kGenerator;
  throw InvalidArgument("unknown composer mode '" + name + "' (top1, stitch, generator)");
}

std::string ExtractiveGenerator::generate(std::string_view prompt,
                                          std::span<const std::string> retrieved) const {
  if (retrieved.empty()) return {};
  const auto prompt_tokens = tokenize(prompt);
  const std::set<std::string> wanted(prompt_tokens.begin(), prompt_tokens.end());

  struct Candidate {
    std::size_t overlap, rank, position;
    std::string text;
  };
  std::vector<Candidate> candidates;
  std::unordered_set<std::string> seen;
  for (std::size_t r = 0; r < retrieved.size(); ++r) {
    for (Sentence& s : split_sentences(retrieved[r]).sentences) {
      if (!seen.insert(normalize_text(s.text)).second) continue;
      std::set<std::string> distinct;
      for (auto& t : tokenize(s.text)) {
        if (wanted.count(t)) distinct.insert(std::move(t));
      }
      candidates.push_back({distinct.size(), r, s.position, std::move(s.text)});
    }
  }
  if (candidates.empty()) return retrieved.front();

  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const Candidate& a, const Candidate& b) { return a.overlap > b.overlap; });
  candidates.resize(std::min(candidates.size(), std::max<std::size_t>(1, max_sentences_)));
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    return std::tie(a.rank, a.position) < std::tie(b.rank, b.position);
  });
  std::string out;
  for (const Candidate& c : candidates) {
    if (!out.empty()) out += ' ';
    out += c.text;
  }
  return out;
}

std::string compose_answer(std::string_view question, std::span<const RetrievedAnswer> hits,
                           const ComposeOptions& options) {
  if (hits.empty()) throw NoAnswerError("no answer available");
  switch (options.mode) {
    case ComposerMode::kTop1:
      return hits.front().text;
    case ComposerMode::kGenerator: {
      std::vector<std::string> texts;
      for (const RetrievedAnswer& h : hits) texts.push_back(h.text);
      const ExtractiveGenerator fallback;
      const Generator& g = options.generator ? *options.generator : fallback;
      std::string out = g.generate(question, texts);
      if (out.empty()) throw Error("generator returned an empty answer");
      return out;
    }
    case ComposerMode::kStitch:
      break;
  }
  std::unordered_set<std::string> seen;
  std::string out;
  std::size_t kept = 0;
  for (const RetrievedAnswer& h : hits) {
    for (const Sentence& s : split_sentences(h.text).sentences) {
      if (kept >= options.max_sentences) return out;
      if (!seen.insert(normalize_text(s.text)).second) continue;
      if (!out.empty()) out += ' ';
      out += s.text;
      ++kept;
    }
  }
  return out;
}

std::vector<float> to_float(const Eigen::VectorXd& v) {
  std::vector<float> out(static_cast<std::size_t>(v.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) out[static_cast<std::size_t>(i)] = static_cast<float>(v(i));
  return out;
}

Pipeline::Pipeline(Vocabulary vocab, EncoderParams params, AnyIndex index,
                   TranslatorRegistry registry, ComposeOptions compose)
    : vocab_(std::move(vocab)),
      params_(std::move(params)),
      index_(std::move(index)),
      registry_(std::move(registry)),
      compose_(std::move(compose)) {
  if (vocab_.size() > params_.config.vocab_size) {
    throw InvalidArgument("vocabulary has more tokens than the encoder's vocab_size");
  }
  if (index_size(index_) > 0 && index_dimension(index_) != params_.config.d_embed) {
    throw InvalidArgument("index dimension " + std::to_string(index_dimension(index_)) +
                          " does not match encoder d_embed " +
                          std::to_string(params_.config.d_embed));
  }
}

std::shared_ptr<const Pipeline> Pipeline::load(const PipelinePaths& paths, ComposeOptions compose) {
  Vocabulary vocab = Vocabulary::load(paths.vocab);
  Checkpoint ckpt = load_checkpoint(paths.checkpoint);
  if (ckpt.vocab_hash != vocab.content_hash()) {
    throw InvalidArgument("vocabulary " + paths.vocab + " does not match checkpoint " +
                          paths.checkpoint + " (hash " + vocab.content_hash() + " vs " +
                          ckpt.vocab_hash + ")");
  }
  AnyIndex index = load_index(paths.index);
  TranslatorRegistry registry;
  for (const AdapterSpec& a : paths.adapters) {
    registry.register_adapter(
        a.src, a.tgt, std::make_shared<DictionaryTranslator>(DictionaryTranslator::load_tsv(a.path)));
  }
  return std::make_shared<const Pipeline>(std::move(vocab), std::move(ckpt.params),
                                          std::move(index), std::move(registry),
                                          std::move(compose));
}

Eigen::VectorXd Pipeline::embed(std::string_view text, Head head) const {
  return encode(params_, encode_text(vocab_, text, params_.config.max_len), head);
}

SentenceEmbedder Pipeline::sentence_embedder() const {
  return [this](const std::string& s) { return embed(s, Head::kAnswer); };
}

std::vector<RetrievedAnswer> Pipeline::search_english(std::string_view english_query,
                                                      std::size_t top_k) const {
  if (index_size(index_) == 0) throw NoAnswerError("no answer available: index is empty");
  const std::vector<float> q = to_float(embed(english_query, Head::kQuestion));
  std::vector<RetrievedAnswer> out;
  for (SearchHit& h : search_topk(index_, q, top_k)) {
    std::string text = index_payload(index_, h.answer_id);
    out.push_back({std::move(h), std::move(text)});
  }
  return out;
}

std::vector<RetrievedAnswer> Pipeline::retrieve(std::string_view question, std::string_view lang,
                                                std::size_t top_k) const {
  if (trim(question).empty()) throw EmptyQuestionError();
  return search_english(registry_.translate(question, lang, kPivotLang), top_k);
}

AnswerBundle Pipeline::ask(std::string_view question, std::string_view lang,
                           std::size_t top_k) const {
  if (trim(question).empty()) throw EmptyQuestionError();
  const std::string query_lang = normalize_lang(lang);
  // Fail on an unsupported outbound pair before doing any work.
  if (!registry_.supports(kPivotLang, query_lang)) {
    throw UnsupportedLanguagePair(kPivotLang, query_lang, registry_.pairs());
  }
  AnswerBundle b;
  b.query_lang = query_lang;
  b.english_query = registry_.translate(question, query_lang, kPivotLang);
  b.hits = search_english(b.english_query, top_k);
  b.composer_mode = composer_mode_name(compose_.mode);
  b.english_answer = compose_answer(b.english_query, b.hits, compose_);
  b.final_text = registry_.translate(b.english_answer, kPivotLang, query_lang);
  return b;
}

Index build_corpus_index(const EncoderParams& params, const Vocabulary& vocab, const Corpus& corpus,
                         IndexSide side) {
  std::vector<IndexEntry> entries;
  entries.reserve(corpus.size());
  for (const QAPair& p : corpus.pairs) {
    const bool answers = side == IndexSide::kAnswer;
    const TokenSeq seq = encode_text(vocab, answers ? p.answer : p.question, params.config.max_len);
    entries.push_back(
        {p.id, to_float(encode(params, seq, answers ? Head::kAnswer : Head::kQuestion)), p.answer});
  }
  return Index::build(std::move(entries), params.config.d_embed);
}

}  // namespace vernqa
