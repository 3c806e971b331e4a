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

#ifndef VERNQA_TINYBERT_H_
#define VERNQA_TINYBERT_H_

// A small bidirectional transformer encoder: one shared trunk feeding two
// dense projection heads (question, answer). All math is double precision.

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "vernqa/textpipe.h"

namespace vernqa {

struct EncoderConfig {
  std::size_t vocab_size = 0;
  std::size_t d_model = 64;
  std::size_t n_layers = 2;
  std::size_t n_heads = 4;
  std::size_t d_ff = 128;
  std::size_t max_len = kDefaultMaxLen;
  std::size_t d_embed = 32;
  std::uint64_t seed = 0;

  // Throws InvalidArgument when a count is zero or d_model % n_heads != 0.
  void validate() const;

  friend bool operator==(const EncoderConfig&, const EncoderConfig&) = default;
};

enum class Head { kQuestion, kAnswer };

const char* head_name(Head head);
Head parse_head(const std::string& name);  // "question" | "answer"

// Biases and layer-norm vectors are stored as 1 x n matrices so every
// parameter is a MatrixXd and generic code (Adam, checkpoints, gradient
// checks) can walk them uniformly.
struct LayerParams {
  Eigen::MatrixXd wq, wk, wv, wo;   // d_model x d_model
  Eigen::MatrixXd ff_in;            // d_model x d_ff
  Eigen::MatrixXd ff_in_bias;       // 1 x d_ff
  Eigen::MatrixXd ff_out;           // d_ff x d_model
  Eigen::MatrixXd ff_out_bias;      // 1 x d_model
  Eigen::MatrixXd ln1_gain, ln1_bias;
  Eigen::MatrixXd ln2_gain, ln2_bias;
};

struct ProjectionHead {
  Eigen::MatrixXd weight;  // d_model x d_embed
  Eigen::MatrixXd bias;    // 1 x d_embed
};

// The shared trunk: embeddings plus transformer layers. Both heads read the
// same Trunk object.
struct Trunk {
  Eigen::MatrixXd token_embeddings;       // vocab_size x d_model
  Eigen::MatrixXd positional_embeddings;  // max_len x d_model
  std::vector<LayerParams> layers;
};

struct NamedTensor {
  std::string name;
  Eigen::MatrixXd* value;
};

struct ConstNamedTensor {
  std::string name;
  const Eigen::MatrixXd* value;
};

struct EncoderParams {
  EncoderConfig config;
  Trunk trunk;
  ProjectionHead q_head;
  ProjectionHead a_head;

  const ProjectionHead& head(Head h) const { return h == Head::kQuestion ? q_head : a_head; }
  ProjectionHead& head(Head h) { return h == Head::kQuestion ? q_head : a_head; }

  // Every tensor in the canonical order used by checkpoints and optimizers.
  std::vector<NamedTensor> tensors();
  std::vector<ConstNamedTensor> tensors() const;

  std::size_t parameter_count() const;
  bool all_finite() const;
};

// Same shapes as init_params(cfg) would produce, every entry zero.
EncoderParams zero_params(const EncoderConfig& cfg);

// Weights ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in)) drawn in canonical order;
// embedding tables use fan_in = d_model. Biases 0, layer-norm gains 1.
EncoderParams init_params(const EncoderConfig& cfg);

inline constexpr double kLayerNormEps = 1e-5;

// Intermediates of one forward pass, kept for backprop. Only the first
// true_len positions are materialized: PAD positions are masked out of
// attention as keys and out of pooling, so they cannot affect the output.
struct EncodeTrace {
  struct LayerNormTrace {
    Eigen::MatrixXd xhat;
    Eigen::VectorXd inv_std;
  };
  struct LayerTrace {
    LayerNormTrace ln1;
    Eigen::MatrixXd h1, q, k, v;
    std::vector<Eigen::MatrixXd> attn;  // per head, n x n row-stochastic
    Eigen::MatrixXd context;            // concatenated head outputs
    LayerNormTrace ln2;
    Eigen::MatrixXd h2, ff_pre, ff_act;
  };

  std::vector<TokenId> ids;  // first true_len ids
  Head head = Head::kQuestion;
  std::vector<LayerTrace> layers;
  Eigen::RowVectorXd pooled;
};

// Embedding for `seq` through the selected head.
Eigen::VectorXd encode(const EncoderParams& params, const TokenSeq& seq, Head head);

// Masked mean of the final trunk states, before any head.
Eigen::RowVectorXd pooled_trunk(const EncoderParams& params, const TokenSeq& seq);

Eigen::VectorXd encode_traced(const EncoderParams& params, const TokenSeq& seq, Head head,
                              EncodeTrace& trace);

// Accumulates d(objective)/d(params) into `grads` given d(objective)/d(output).
void backprop(const EncoderParams& params, const EncodeTrace& trace,
              const Eigen::VectorXd& d_output, EncoderParams& grads);

}  // namespace vernqa

#endif  // VERNQA_TINYBERT_H_
