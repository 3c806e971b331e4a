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


#include <vector>

#include <benchmark/benchmark.h>

#include "vernqa/corpus.h"
#include "vernqa/textpipe.h"
#include "vernqa/tinybert.h"
#include "vernqa/trainer.h"

namespace vernqa {
namespace {

struct ToyModel {
  Corpus corpus = synthetic_corpus(64);
  Vocabulary vocab = build_vocab(corpus);
  EncoderParams params;
  ToyModel() {
    EncoderConfig cfg;
    cfg.vocab_size = vocab.size();
    cfg.seed = 42;
    params = init_params(cfg);
  }
};

const ToyModel& toy() {
  static const ToyModel model;
  return model;
}

void BM_EncodeQuestion(benchmark::State& state) {
  const ToyModel& m = toy();
  const TokenSeq seq = encode_text(m.vocab, m.corpus.pairs[0].question, m.params.config.max_len);
  for (auto _ : state) benchmark::DoNotOptimize(encode(m.params, seq, Head::kQuestion));
}
BENCHMARK(BM_EncodeQuestion);

// One optimizer step: forward and backward over a batch, then Adam.
void BM_TrainStep(benchmark::State& state) {
  const ToyModel& m = toy();
  const std::size_t batch = static_cast<std::size_t>(state.range(0));
  std::vector<TokenSeq> questions, answers;
  for (std::size_t i = 0; i < batch; ++i) {
    questions.push_back(encode_text(m.vocab, m.corpus.pairs[i].question, m.params.config.max_len));
    answers.push_back(encode_text(m.vocab, m.corpus.pairs[i].answer, m.params.config.max_len));
  }
  EncoderParams params = m.params;
  OptimizerState opt = OptimizerState::for_params(params);
  const TrainConfig cfg;
  for (auto _ : state) {
    EncoderParams grads = zero_params(params.config);
    benchmark::DoNotOptimize(batch_objective(params, questions, answers, &grads));
    adam_update(params, grads, opt, cfg);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_TrainStep)->Arg(4)->Arg(16);

}  // namespace
}  // namespace vernqa
