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

#ifndef VERNQA_TRAINER_H_
#define VERNQA_TRAINER_H_

#include <cstdint>
#include <functional>
#include <span>
#include <string>

#include <Eigen/Core>

#include "vernqa/corpus.h"
#include "vernqa/textpipe.h"
#include "vernqa/tinybert.h"

namespace vernqa {

struct TrainConfig {
  std::size_t batch_size = 16;
  std::size_t epochs = 1;
  double learning_rate = 1e-3;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  std::uint64_t shuffle_seed = 0;
  std::string checkpoint_path;

  void validate() const;
};

// In-batch softmax cross-entropy over dot-product logits.
struct BatchLossReport {
  double loss = 0.0;
  Eigen::MatrixXd logits;        // B x B, logits(i, j) = q_i . a_j
  std::size_t diag_rank_hits = 0;  // rows whose diagonal strictly beats every other entry
};

// S = Q A^T, P = rowwise softmax(S), loss = -(1/B) sum_i log P(i, i).
// Throws InvalidArgument on shape mismatch, B == 0 or non-finite input.
BatchLossReport batch_loss(const Eigen::MatrixXd& questions, const Eigen::MatrixXd& answers);
BatchLossReport batch_loss_from_logits(const Eigen::MatrixXd& logits);

// d loss / d S = (P - I) / B.
Eigen::MatrixXd batch_loss_grad_logits(const Eigen::MatrixXd& logits);

// Encodes questions with the question head and answers with the answer head,
// evaluates batch_loss, and if `grads` is non-null accumulates the exact
// gradient with respect to every parameter into it.
BatchLossReport batch_objective(const EncoderParams& params,
                                std::span<const TokenSeq> questions,
                                std::span<const TokenSeq> answers, EncoderParams* grads);

struct OptimizerState {
  std::uint64_t step = 0;
  std::uint64_t epochs_completed = 0;
  EncoderParams first_moment;
  EncoderParams second_moment;

  static OptimizerState for_params(const EncoderParams& params);
};

void adam_update(EncoderParams& params, const EncoderParams& grads, OptimizerState& state,
                 const TrainConfig& cfg);

struct EpochReport {
  std::uint64_t epoch = 0;  // 1-based
  double mean_loss = 0.0;
  double diag_accuracy = 0.0;
  std::size_t batches = 0;
};

// One pass over `train` in a seeded order derived from (shuffle_seed, epoch).
// The last short batch is kept. Throws Error when the loss becomes non-finite.
EpochReport train_epoch(EncoderParams& params, OptimizerState& state, const Corpus& train,
                        const Vocabulary& vocab, const TrainConfig& cfg);

using EpochCallback = std::function<bool(const EpochReport&)>;  // false stops

// Runs cfg.epochs epochs, calling `on_epoch` after each.
void train(EncoderParams& params, OptimizerState& state, const Corpus& corpus,
           const Vocabulary& vocab, const TrainConfig& cfg, const EpochCallback& on_epoch = {});

inline constexpr char kCheckpointMagic[] = "VQACKPT1";
inline constexpr int kCheckpointMajorVersion = 1;
inline constexpr int kCheckpointMinorVersion = 0;

struct Checkpoint {
  EncoderParams params;
  OptimizerState optimizer;
  TrainConfig train_config;
  std::string vocab_hash;
};

void save_checkpoint(const Checkpoint& ckpt, const std::string& path);

// Throws CorruptFile on bad magic, CRC, truncation or shape mismatch, and
// on a newer major format version.
Checkpoint load_checkpoint(const std::string& path);

}  // namespace vernqa

#endif  // VERNQA_TRAINER_H_
