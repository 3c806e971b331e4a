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

#include <gtest/gtest.h>

#include "support/fixtures.h"
#include "support/test_util.h"
#include "vernqa/error.h"
#include "vernqa/pipeline.h"

namespace vernqa {
namespace {

std::vector<RetrievedAnswer> hits_of(const std::vector<std::string>& texts) {
  std::vector<RetrievedAnswer> out;
  for (std::size_t i = 0; i < texts.size(); ++i)
    out.push_back({{"id" + std::to_string(i), 1.0 / static_cast<double>(i + 1), i + 1}, texts[i]});
  return out;
}

TEST(Compose, Top1IsVerbatim) {
  ComposeOptions o;
  o.mode = ComposerMode::kTop1;
  const auto h = hits_of({"  Exact text. With two sentences!  ", "Other."});
  EXPECT_EQ(compose_answer("q", h, o), "  Exact text. With two sentences!  ");
}

TEST(Compose, StitchDropsRepeatedSentences) {
  const auto h = hits_of({"Drink water. Rest well.", "Rest well. See a doctor."});
  EXPECT_EQ(compose_answer("q", h, ComposeOptions{}), "Drink water. Rest well. See a doctor.");
  const auto h2 = hits_of({"Rest well.", "rest   WELL."});
  EXPECT_EQ(compose_answer("q", h2, ComposeOptions{}), "Rest well.");
}

TEST(Compose, StitchCapKeepsRankThenPositionOrder) {
  ComposeOptions o;
  o.max_sentences = 4;
  const auto h = hits_of({"A one. A two.", "B one. B two.", "C one. C two."});
  // Enumerated by hand: rank 1 positions 0,1 then rank 2 positions 0,1.
  EXPECT_EQ(compose_answer("q", h, o), "A one. A two. B one. B two.");
}

TEST(Compose, EmptyHitsIsNoAnswer) {
  EXPECT_THROW(compose_answer("q", {}, ComposeOptions{}), NoAnswerError);
}

TEST(Compose, ModeNames) {
  for (auto m : {ComposerMode::kTop1, ComposerMode::kStitch, ComposerMode::kGenerator})
    EXPECT_EQ(parse_composer_mode(composer_mode_name(m)), m);
  EXPECT_THROW(parse_composer_mode("gpt"), InvalidArgument);
}

TEST(Generator, ExtractiveRanksByPromptOverlap) {
  const ExtractiveGenerator g(2);
  const std::vector<std::string> texts = {"Malaria causes fever. Nets help.",
                                          "Dengue fever brings joint pain. Rest is key."};
  // "fever" hits two sentences; "joint pain" makes the dengue one best.
  EXPECT_EQ(g.generate("fever with joint pain", texts),
            "Malaria causes fever. Dengue fever brings joint pain.");
  EXPECT_EQ(g.generate("anything", {}), "");
}

class FixedGenerator final : public Generator {
 public:
  std::string generate(std::string_view prompt, std::span<const std::string> retrieved) const override {
    return std::string(prompt) + " | " + std::to_string(retrieved.size());
  }
};

TEST(Compose, GeneratorModeUsesSuppliedGenerator) {
  ComposeOptions o;
  o.mode = ComposerMode::kGenerator;
  o.generator = std::make_shared<FixedGenerator>();
  EXPECT_EQ(compose_answer("why", hits_of({"a.", "b."}), o), "why | 2");
  o.generator = nullptr;
  EXPECT_EQ(compose_answer("b", hits_of({"a.", "b."}), o), "a. b.");
}

TEST(Pipeline, EmptyIndexIsNoAnswer) {
  const auto& m = testing::overfit_model();
  const Pipeline p(m.vocab, m.params, Index::build({}, m.params.config.d_embed), {});
  EXPECT_THROW(p.ask("what causes malaria?", "en", 5), NoAnswerError);
}

TEST(Pipeline, EmptyQuestionRejected) {
  const auto p = testing::overfit_pipeline();
  EXPECT_THROW(p->ask(" \t ", "en", 5), EmptyQuestionError);
  EXPECT_THROW(p->retrieve("", "en", 5), EmptyQuestionError);
}

TEST(Pipeline, RetrievesEveryTrainingPairAtRankOne) {
  const auto p = testing::overfit_pipeline();
  for (const auto& pair : testing::overfit_model().corpus.pairs) {
    const AnswerBundle b = p->ask(pair.question, "en", 5);
    ASSERT_FALSE(b.hits.empty());
    EXPECT_EQ(b.hits[0].hit.answer_id, pair.id) << pair.question;
    EXPECT_LE(b.hits.size(), 5u);
    EXPECT_EQ(b.hits[0].text, pair.answer);
  }
}

TEST(Pipeline, IdentityFlowEqualsComposerOutput) {
  const auto p = testing::overfit_pipeline();
  const AnswerBundle b = p->ask("How is cholera treated?", "en", 3);
  EXPECT_EQ(b.query_lang, "en");
  EXPECT_EQ(b.english_query, "How is cholera treated?");
  EXPECT_EQ(b.final_text, compose_answer(b.english_query, b.hits, p->compose_options()));
  EXPECT_EQ(b.final_text, b.english_answer);
  EXPECT_EQ(b.composer_mode, "stitch");
}

TEST(Pipeline, TranslatesThroughPivot) {
  TranslatorRegistry r;
  r.register_adapter("es", "en",
                     std::make_shared<DictionaryTranslator>(std::unordered_map<std::string, std::string>{
                         {"cuáles", "what"}, {"son", "are"}, {"los", "the"}, {"síntomas", "symptoms"}, {"de", "of"}}));
  r.register_adapter("en", "es",
                     std::make_shared<DictionaryTranslator>(std::unordered_map<std::string, std::string>{
                         {"symptoms", "síntomas"}, {"of", "de"}}));
  ComposeOptions top1;
  top1.mode = ComposerMode::kTop1;
  const auto p = testing::overfit_pipeline(r, top1);
  const AnswerBundle b = p->ask("Cuáles son los síntomas de malaria?", "ES", 5);
  EXPECT_EQ(b.query_lang, "es");
  EXPECT_EQ(b.english_query, "what are the symptoms of malaria?");
  EXPECT_EQ(b.hits[0].hit.answer_id, "syn-000");
  EXPECT_EQ(b.final_text, r.translate(b.english_answer, "en", "es"));
  EXPECT_NE(b.final_text.find("síntomas de malaria"), std::string::npos) << b.final_text;
}

TEST(Pipeline, MissingOutboundAdapterFailsBeforeRetrieval) {
  TranslatorRegistry r;
  r.register_adapter("es", "en", std::make_shared<IdentityTranslator>());
  const auto p = testing::overfit_pipeline(r);
  EXPECT_THROW(p->ask("fiebre", "es", 5), UnsupportedLanguagePair);
  EXPECT_THROW(p->ask("fever", "xx", 5), UnsupportedLanguagePair);
  EXPECT_NO_THROW(p->retrieve("fiebre", "es", 5));
}

TEST(Pipeline, ConstructorChecksConsistency) {
  const auto& m = testing::overfit_model();
  EncoderParams small = m.params;
  small.config.vocab_size = 4;
  EXPECT_THROW(Pipeline(m.vocab, small, Index::build({}, 32), {}), InvalidArgument);
  EXPECT_THROW(Pipeline(m.vocab, m.params, Index::build({{"a", {1, 2}, "x"}}), {}), InvalidArgument);
}

TEST(Pipeline, LoadFromArtifacts) {
  testing::TempDir dir;
  const auto& m = testing::overfit_model();
  m.vocab.save(dir.file("vocab.txt"));
  save_checkpoint({m.params, OptimizerState::for_params(m.params), TrainConfig{}, m.vocab.content_hash()},
                  dir.file("model.ckpt"));
  save_index(QuantizedIndex::quantize(build_corpus_index(m.params, m.vocab, m.corpus)), dir.file("q.idx"));
  testing::write_file(dir.file("es-en.tsv"), "fiebre\tfever\n");
  PipelinePaths paths{dir.file("vocab.txt"), dir.file("model.ckpt"), dir.file("q.idx"),
                      {{"es", "en", dir.file("es-en.tsv")}}};
  const auto p = Pipeline::load(paths);
  EXPECT_TRUE(p->registry().supports("es", "en"));
  EXPECT_TRUE(std::holds_alternative<QuantizedIndex>(p->index()));
  EXPECT_EQ(p->retrieve("What causes typhoid?", "en", 1)[0].hit.answer_id,
            testing::overfit_pipeline()->retrieve("What causes typhoid?", "en", 1)[0].hit.answer_id);

  // A vocabulary that does not belong to the checkpoint.
  Vocabulary::from_words({"other"}).save(dir.file("wrong.txt"));
  PipelinePaths wrong = paths;
  wrong.vocab = dir.file("wrong.txt");
  EXPECT_THROW(Pipeline::load(wrong), InvalidArgument);
  PipelinePaths missing = paths;
  missing.index = dir.file("nope.idx");
  EXPECT_THROW(Pipeline::load(missing), IoError);
}

TEST(BuildCorpusIndex, QuestionSide) {
  const auto& m = testing::overfit_model();
  const Index q = build_corpus_index(m.params, m.vocab, m.corpus, IndexSide::kQuestion);
  EXPECT_EQ(q.size(), m.corpus.size());
  const auto pos = static_cast<std::size_t>(q.find("syn-005"));
  const auto expected = to_float(encode(m.params, encode_text(m.vocab, m.corpus.pairs[5].question), Head::kQuestion));
  EXPECT_TRUE(std::equal(expected.begin(), expected.end(), q.vector(pos).begin()));
  EXPECT_EQ(q.payload(pos), m.corpus.pairs[5].answer);
}

}  // namespace
}  // namespace vernqa
