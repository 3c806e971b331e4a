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

#include "vernqa/tinybert.h"

#include <cmath>
#include <numbers>

#include "vernqa/error.h"
#include "vernqa/rng.h"

namespace vernqa {

using Eigen::MatrixXd;
using Eigen::RowVectorXd;
using Eigen::VectorXd;

void EncoderConfig::validate() const {
  if (vocab_size < 1 || d_model < 1 || n_layers < 1 || n_heads < 1 || d_ff < 1 ||
      max_len < 1 || d_embed < 1) {
    throw InvalidArgument("encoder config: all sizes must be >= 1");
  }
  if (d_model % n_heads != 0) {
    throw InvalidArgument("encoder config: d_model (" + std::to_string(d_model) +
                          ") must be divisible by n_heads (" + std::to_string(n_heads) +
                          ")");
  }
}

const char* head_name(Head head) { return head == Head::kQuestion ? "question" : "answer"; }

Head parse_head(const std::string& name) {
  if (name == "question") return Head::kQuestion;
  if (name == "answer") return Head::kAnswer;
  throw InvalidArgument("unknown head '" + name + "' (expected question or answer)");
}

std::vector<NamedTensor> EncoderParams::tensors() {
  std::vector<NamedTensor> out;
  out.push_back({"token_embeddings", &trunk.token_embeddings});
  out.push_back({"positional_embeddings", &trunk.positional_embeddings});
  for (std::size_t i = 0; i < trunk.layers.size(); ++i) {
    LayerParams& l = trunk.layers[i];
    const std::string p = "layers." + std::to_string(i) + ".";
    out.push_back({p + "attn.wq", &l.wq});
    out.push_back({p + "attn.wk", &l.wk});
    out.push_back({p + "attn.wv", &l.wv});
    out.push_back({p + "attn.wo", &l.wo});
    out.push_back({p + "ff.in.weight", &l.ff_in});
    out.push_back({p + "ff.in.bias", &l.ff_in_bias});
    out.push_back({p + "ff.out.weight", &l.ff_out});
    out.push_back({p + "ff.out.bias", &l.ff_out_bias});
    out.push_back({p + "ln1.gain", &l.ln1_gain});
    out.push_back({p + "ln1.bias", &l.ln1_bias});
    out.push_back({p + "ln2.gain", &l.ln2_gain});
    out.push_back({p + "ln2.bias", &l.ln2_bias});
  }
  out.push_back({"q_head.weight", &q_head.weight});
  out.push_back({"q_head.bias", &q_head.bias});
  out.push_back({"a_head.weight", &a_head.weight});
  out.push_back({"a_head.bias", &a_head.bias});
  return out;
}

std::vector<ConstNamedTensor> EncoderParams::tensors() const {
  std::vector<ConstNamedTensor> out;
  for (auto& t : const_cast<EncoderParams*>(this)->tensors()) {
    out.push_back({std::move(t.name), t.value});
  }
  return out;
}

std::size_t EncoderParams::parameter_count() const {
  std::size_t n = 0;
  for (const auto& t : tensors()) n += static_cast<std::size_t>(t.value->size());
  return n;
}

bool EncoderParams::all_finite() const {
  for (const auto& t : tensors()) {
    if (!t.value->allFinite()) return false;
  }
  return true;
}

EncoderParams zero_params(const EncoderConfig& cfg) {
  cfg.validate();
  const auto d = static_cast<Eigen::Index>(cfg.d_model);
  const auto ff = static_cast<Eigen::Index>(cfg.d_ff);
  const auto e = static_cast<Eigen::Index>(cfg.d_embed);
  EncoderParams p;
  p.config = cfg;
  p.trunk.token_embeddings = MatrixXd::Zero(static_cast<Eigen::Index>(cfg.vocab_size), d);
  p.trunk.positional_embeddings = MatrixXd::Zero(static_cast<Eigen::Index>(cfg.max_len), d);
  p.trunk.layers.resize(cfg.n_layers);
  for (LayerParams& l : p.trunk.layers) {
    l.wq = l.wk = l.wv = l.wo = MatrixXd::Zero(d, d);
    l.ff_in = MatrixXd::Zero(d, ff);
    l.ff_in_bias = MatrixXd::Zero(1, ff);
    l.ff_out = MatrixXd::Zero(ff, d);
    l.ff_out_bias = MatrixXd::Zero(1, d);
    l.ln1_gain = l.ln1_bias = l.ln2_gain = l.ln2_bias = MatrixXd::Zero(1, d);
  }
  p.q_head.weight = p.a_head.weight = MatrixXd::Zero(d, e);
  p.q_head.bias = p.a_head.bias = MatrixXd::Zero(1, e);
  return p;
}

namespace {

void fill_uniform(MatrixXd& m, double bound, Rng& rng) {
  // Row-major draw order, independent of Eigen's storage order.
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = rng.uniform(-bound, bound);
  }
}

}  // namespace

EncoderParams init_params(const EncoderConfig& cfg) {
  EncoderParams p = zero_params(cfg);
  Rng rng(cfg.seed);
  const double embed_bound = 1.0 / std::sqrt(static_cast<double>(cfg.d_model));
  for (auto& t : p.tensors()) {
    const std::string& name = t.name;
    const bool is_vector = t.value->rows() == 1;
    if (name.ends_with("gain")) {
      t.value->setOnes();
    } else if (is_vector) {
      // biases stay zero
    } else if (name.ends_with("embeddings")) {
      fill_uniform(*t.value, embed_bound, rng);
    } else {
      fill_uniform(*t.value, 1.0 / std::sqrt(static_cast<double>(t.value->rows())), rng);
    }
  }
  return p;
}

namespace {

MatrixXd layer_norm(const MatrixXd& x, const MatrixXd& gain, const MatrixXd& bias,
                    EncodeTrace::LayerNormTrace& tr) {
  const auto n = x.rows();
  const double inv_d = 1.0 / static_cast<double>(x.cols());
  tr.xhat.resize(n, x.cols());
  tr.inv_std.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double mean = x.row(i).sum() * inv_d;
    const RowVectorXd centered = x.row(i).array() - mean;
    const double var = centered.squaredNorm() * inv_d;
    const double inv_std = 1.0 / std::sqrt(var + kLayerNormEps);
    tr.inv_std(i) = inv_std;
    tr.xhat.row(i) = centered * inv_std;
  }
  MatrixXd y = tr.xhat.array().rowwise() * gain.row(0).array();
  y.rowwise() += bias.row(0);
  return y;
}

// Returns dx; accumulates gain/bias gradients.
MatrixXd layer_norm_backward(const MatrixXd& dy, const EncodeTrace::LayerNormTrace& tr,
                             const MatrixXd& gain, MatrixXd& d_gain, MatrixXd& d_bias) {
  d_gain += (dy.array() * tr.xhat.array()).colwise().sum().matrix();
  d_bias += dy.colwise().sum();
  const MatrixXd dxhat = dy.array().rowwise() * gain.row(0).array();
  const double d = static_cast<double>(dy.cols());
  MatrixXd dx(dy.rows(), dy.cols());
  for (Eigen::Index i = 0; i < dy.rows(); ++i) {
    const double sum_dxhat = dxhat.row(i).sum();
    const double sum_dxhat_xhat = dxhat.row(i).dot(tr.xhat.row(i));
    dx.row(i) = (tr.inv_std(i) / d) *
                (d * dxhat.row(i).array() - sum_dxhat - tr.xhat.row(i).array() * sum_dxhat_xhat)
                    .matrix();
  }
  return dx;
}

double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x * std::numbers::sqrt2 / 2.0)); }

double gelu_grad(double x) {
  const double cdf = 0.5 * (1.0 + std::erf(x * std::numbers::sqrt2 / 2.0));
  const double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
  return cdf + x * pdf;
}

void softmax_rows(MatrixXd& s) {
  for (Eigen::Index i = 0; i < s.rows(); ++i) {
    const double mx = s.row(i).maxCoeff();
    s.row(i) = (s.row(i).array() - mx).exp();
    s.row(i) /= s.row(i).sum();
  }
}

void check_sequence(const EncoderConfig& cfg, const TokenSeq& seq) {
  if (seq.ids.size() != cfg.max_len) {
    throw InvalidArgument("sequence length " + std::to_string(seq.ids.size()) +
                          " does not match encoder max_len " + std::to_string(cfg.max_len));
  }
  if (seq.true_len < 1 || seq.true_len > seq.ids.size()) {
    throw InvalidArgument("sequence true_len out of range");
  }
  for (TokenId id : seq.ids) {
    if (id < 0 || static_cast<std::size_t>(id) >= cfg.vocab_size) {
      throw InvalidArgument("token id " + std::to_string(id) + " out of range for vocab_size " +
                            std::to_string(cfg.vocab_size));
    }
  }
}

// Runs the trunk over the unpadded prefix and returns the final hidden states.
MatrixXd run_trunk(const EncoderParams& params, const TokenSeq& seq, EncodeTrace& tr) {
  const EncoderConfig& cfg = params.config;
  check_sequence(cfg, seq);
  const auto n = static_cast<Eigen::Index>(seq.true_len);
  const auto d = static_cast<Eigen::Index>(cfg.d_model);
  const auto dh = d / static_cast<Eigen::Index>(cfg.n_heads);
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

  tr.ids.assign(seq.ids.begin(), seq.ids.begin() + n);
  MatrixXd x(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    x.row(i) = params.trunk.token_embeddings.row(tr.ids[static_cast<std::size_t>(i)]) +
               params.trunk.positional_embeddings.row(i);
  }

  tr.layers.resize(cfg.n_layers);
  for (std::size_t li = 0; li < cfg.n_layers; ++li) {
    const LayerParams& l = params.trunk.layers[li];
    EncodeTrace::LayerTrace& lt = tr.layers[li];

    lt.h1 = layer_norm(x, l.ln1_gain, l.ln1_bias, lt.ln1);
    lt.q.noalias() = lt.h1 * l.wq;
    lt.k.noalias() = lt.h1 * l.wk;
    lt.v.noalias() = lt.h1 * l.wv;
    lt.context.resize(n, d);
    lt.attn.resize(cfg.n_heads);
    for (std::size_t h = 0; h < cfg.n_heads; ++h) {
      const auto off = static_cast<Eigen::Index>(h) * dh;
      MatrixXd s = (lt.q.middleCols(off, dh) * lt.k.middleCols(off, dh).transpose()) * scale;
      softmax_rows(s);
      lt.context.middleCols(off, dh).noalias() = s * lt.v.middleCols(off, dh);
      lt.attn[h] = std::move(s);
    }
    x.noalias() += lt.context * l.wo;

    lt.h2 = layer_norm(x, l.ln2_gain, l.ln2_bias, lt.ln2);
    lt.ff_pre = lt.h2 * l.ff_in;
    lt.ff_pre.rowwise() += l.ff_in_bias.row(0);
    lt.ff_act = lt.ff_pre.unaryExpr([](double v) { return gelu(v); });
    x.noalias() += lt.ff_act * l.ff_out;
    x.rowwise() += l.ff_out_bias.row(0);
  }
  return x;
}

}  // namespace

Eigen::VectorXd encode_traced(const EncoderParams& params, const TokenSeq& seq, Head head,
                              EncodeTrace& trace) {
  const MatrixXd x = run_trunk(params, seq, trace);
  trace.head = head;
  trace.pooled = x.colwise().mean();
  const ProjectionHead& ph = params.head(head);
  RowVectorXd out = trace.pooled * ph.weight + ph.bias.row(0);
  return out.transpose();
}

Eigen::VectorXd encode(const EncoderParams& params, const TokenSeq& seq, Head head) {
  EncodeTrace trace;
  return encode_traced(params, seq, head, trace);
}

Eigen::RowVectorXd pooled_trunk(const EncoderParams& params, const TokenSeq& seq) {
  EncodeTrace trace;
  return run_trunk(params, seq, trace).colwise().mean();
}

void backprop(const EncoderParams& params, const EncodeTrace& trace,
              const Eigen::VectorXd& d_output, EncoderParams& grads) {
  const EncoderConfig& cfg = params.config;
  const auto n = static_cast<Eigen::Index>(trace.ids.size());
  const auto d = static_cast<Eigen::Index>(cfg.d_model);
  const auto dh = d / static_cast<Eigen::Index>(cfg.n_heads);
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

  const ProjectionHead& ph = params.head(trace.head);
  ProjectionHead& gh = grads.head(trace.head);
  const RowVectorXd d_out = d_output.transpose();
  gh.weight.noalias() += trace.pooled.transpose() * d_out;
  gh.bias += d_out;
  const RowVectorXd d_pooled = d_out * ph.weight.transpose();

  MatrixXd dx = d_pooled.replicate(n, 1) / static_cast<double>(n);

  for (std::size_t li = cfg.n_layers; li-- > 0;) {
    const LayerParams& l = params.trunk.layers[li];
    LayerParams& g = grads.trunk.layers[li];
    const EncodeTrace::LayerTrace& lt = trace.layers[li];

    // Feed-forward sublayer.
    g.ff_out.noalias() += lt.ff_act.transpose() * dx;
    g.ff_out_bias += dx.colwise().sum();
    MatrixXd d_pre = dx * l.ff_out.transpose();
    d_pre.array() *= lt.ff_pre.unaryExpr([](double v) { return gelu_grad(v); }).array();
    g.ff_in.noalias() += lt.h2.transpose() * d_pre;
    g.ff_in_bias += d_pre.colwise().sum();
    const MatrixXd d_h2 = d_pre * l.ff_in.transpose();
    dx += layer_norm_backward(d_h2, lt.ln2, l.ln2_gain, g.ln2_gain, g.ln2_bias);

    // Attention sublayer.
    g.wo.noalias() += lt.context.transpose() * dx;
    const MatrixXd d_ctx = dx * l.wo.transpose();
    MatrixXd dq(n, d), dk(n, d), dv(n, d);
    for (std::size_t h = 0; h < cfg.n_heads; ++h) {
      const auto off = static_cast<Eigen::Index>(h) * dh;
      const MatrixXd& a = lt.attn[h];
      const auto d_ctx_h = d_ctx.middleCols(off, dh);
      const MatrixXd d_a = d_ctx_h * lt.v.middleCols(off, dh).transpose();
      dv.middleCols(off, dh).noalias() = a.transpose() * d_ctx_h;
      const Eigen::VectorXd row_dot = (d_a.array() * a.array()).rowwise().sum();
      MatrixXd d_s = a.array() * (d_a.colwise() - row_dot).array();
      d_s *= scale;
      dq.middleCols(off, dh).noalias() = d_s * lt.k.middleCols(off, dh);
      dk.middleCols(off, dh).noalias() = d_s.transpose() * lt.q.middleCols(off, dh);
    }
    g.wq.noalias() += lt.h1.transpose() * dq;
    g.wk.noalias() += lt.h1.transpose() * dk;
    g.wv.noalias() += lt.h1.transpose() * dv;
    MatrixXd d_h1 = dq * l.wq.transpose();
    d_h1.noalias() += dk * l.wk.transpose();
    d_h1.noalias() += dv * l.wv.transpose();
    dx += layer_norm_backward(d_h1, lt.ln1, l.ln1_gain, g.ln1_gain, g.ln1_bias);
  }

  for (Eigen::Index i = 0; i < n; ++i) {
    grads.trunk.token_embeddings.row(trace.ids[static_cast<std::size_t>(i)]) += dx.row(i);
    grads.trunk.positional_embeddings.row(i) += dx.row(i);
  }
}

}  // namespace vernqa
