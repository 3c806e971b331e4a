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

#include "vernqa/trainer.h"

#include <cmath>
#include <sstream>

#include "json.hpp"
#include "vernqa/binio.h"
#include "vernqa/error.h"
#include "vernqa/rng.h"

namespace vernqa {

using Eigen::MatrixXd;
using nlohmann::json;

void TrainConfig::validate() const {
  if (batch_size < 1) throw InvalidArgument("batch_size must be >= 1");
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw InvalidArgument("learning_rate must be finite and non-negative");
  }
}

namespace {

MatrixXd row_softmax(const MatrixXd& s) {
  MatrixXd p(s.rows(), s.cols());
  for (Eigen::Index i = 0; i < s.rows(); ++i) {
    const double mx = s.row(i).maxCoeff();
    p.row(i) = (s.row(i).array() - mx).exp();
    p.row(i) /= p.row(i).sum();
  }
  return p;
}

}  // namespace

BatchLossReport batch_loss_from_logits(const MatrixXd& logits) {
  const Eigen::Index b = logits.rows();
  if (b == 0 || logits.cols() != b) throw InvalidArgument("logits must be square with B >= 1");
  if (!logits.allFinite()) throw InvalidArgument("non-finite logits");
  BatchLossReport r;
  r.logits = logits;
  double total = 0.0;
  for (Eigen::Index i = 0; i < b; ++i) {
    const double mx = logits.row(i).maxCoeff();
    const double lse = mx + std::log((logits.row(i).array() - mx).exp().sum());
    total += lse - logits(i, i);
    bool hit = true;
    for (Eigen::Index j = 0; j < b && hit; ++j) hit = j == i || logits(i, i) > logits(i, j);
    if (hit) ++r.diag_rank_hits;
  }
  r.loss = total / static_cast<double>(b);
  return r;
}

BatchLossReport batch_loss(const MatrixXd& questions, const MatrixXd& answers) {
  if (questions.rows() != answers.rows() || questions.cols() != answers.cols()) {
    throw InvalidArgument("batch_loss: question and answer batches differ in shape");
  }
  if (questions.rows() == 0) throw InvalidArgument("batch_loss: empty batch");
  if (!questions.allFinite() || !answers.allFinite()) {
    throw InvalidArgument("batch_loss: non-finite embedding");
  }
  return batch_loss_from_logits(questions * answers.transpose());
}

MatrixXd batch_loss_grad_logits(const MatrixXd& logits) {
  const auto b = static_cast<double>(logits.rows());
  MatrixXd g = row_softmax(logits);
  g.diagonal().array() -= 1.0;
  return g / b;
}

BatchLossReport batch_objective(const EncoderParams& params, std::span<const TokenSeq> questions,
                                std::span<const TokenSeq> answers, EncoderParams* grads) {
  if (questions.size() != answers.size() || questions.empty()) {
    throw InvalidArgument("batch_objective: need equal, nonempty question/answer batches");
  }
  const std::size_t b = questions.size();
  const auto e = static_cast<Eigen::Index>(params.config.d_embed);
  std::vector<EncodeTrace> q_traces(b), a_traces(b);
  MatrixXd q(static_cast<Eigen::Index>(b), e), a(static_cast<Eigen::Index>(b), e);
  for (std::size_t i = 0; i < b; ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    q.row(r) = encode_traced(params, questions[i], Head::kQuestion, q_traces[i]).transpose();
    a.row(r) = encode_traced(params, answers[i], Head::kAnswer, a_traces[i]).transpose();
  }
  BatchLossReport report = batch_loss(q, a);
  if (grads != nullptr) {
    const MatrixXd g = batch_loss_grad_logits(report.logits);
    const MatrixXd dq = g * a;
    const MatrixXd da = g.transpose() * q;
    // Fixed reduction order keeps accumulation bit-deterministic.
    for (std::size_t i = 0; i < b; ++i) {
      const auto r = static_cast<Eigen::Index>(i);
      backprop(params, q_traces[i], dq.row(r).transpose(), *grads);
      backprop(params, a_traces[i], da.row(r).transpose(), *grads);
    }
  }
  return report;
}

OptimizerState OptimizerState::for_params(const EncoderParams& params) {
  OptimizerState s;
  s.first_moment = zero_params(params.config);
  s.second_moment = zero_params(params.config);
  return s;
}

void adam_update(EncoderParams& params, const EncoderParams& grads, OptimizerState& state,
                 const TrainConfig& cfg) {
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(cfg.adam_beta1, t);
  const double c2 = 1.0 - std::pow(cfg.adam_beta2, t);
  auto p = params.tensors();
  auto g = grads.tensors();
  auto m = state.first_moment.tensors();
  auto v = state.second_moment.tensors();
  for (std::size_t i = 0; i < p.size(); ++i) {
    MatrixXd& mi = *m[i].value;
    MatrixXd& vi = *v[i].value;
    const MatrixXd& gi = *g[i].value;
    mi = cfg.adam_beta1 * mi + (1.0 - cfg.adam_beta1) * gi;
    vi = cfg.adam_beta2 * vi + (1.0 - cfg.adam_beta2) * gi.cwiseAbs2();
    p[i].value->array() -=
        cfg.learning_rate * (mi.array() / c1) / ((vi.array() / c2).sqrt() + cfg.adam_eps);
  }
}

EpochReport train_epoch(EncoderParams& params, OptimizerState& state, const Corpus& train,
                        const Vocabulary& vocab, const TrainConfig& cfg) {
  cfg.validate();
  if (train.empty()) throw InvalidArgument("train_epoch: corpus is empty");
  if (vocab.size() > params.config.vocab_size) {
    throw InvalidArgument("train_epoch: vocabulary larger than encoder vocab_size");
  }
  const std::size_t n = train.size();
  const std::size_t max_len = params.config.max_len;

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(cfg.shuffle_seed + 0x9E3779B97F4A7C15ULL * (state.epochs_completed + 1));
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);

  EpochReport report;
  report.epoch = state.epochs_completed + 1;
  double loss_sum = 0.0;
  std::size_t hits = 0;
  std::vector<TokenSeq> qs, as;
  for (std::size_t start = 0; start < n; start += cfg.batch_size) {
    const std::size_t end = std::min(n, start + cfg.batch_size);
    qs.clear();
    as.clear();
    for (std::size_t i = start; i < end; ++i) {
      const QAPair& p = train.pairs[order[i]];
      qs.push_back(encode_text(vocab, p.question, max_len));
      as.push_back(encode_text(vocab, p.answer, max_len));
    }
    EncoderParams grads = zero_params(params.config);
    const BatchLossReport br = batch_objective(params, qs, as, &grads);
    if (!std::isfinite(br.loss)) {
      std::ostringstream msg;
      msg << "non-finite loss at epoch " << report.epoch << ", batch " << report.batches + 1;
      throw Error(msg.str());
    }
    adam_update(params, grads, state, cfg);
    loss_sum += br.loss;
    hits += br.diag_rank_hits;
    ++report.batches;
  }
  ++state.epochs_completed;
  report.mean_loss = loss_sum / static_cast<double>(report.batches);
  report.diag_accuracy = static_cast<double>(hits) / static_cast<double>(n);
  return report;
}

void train(EncoderParams& params, OptimizerState& state, const Corpus& corpus,
           const Vocabulary& vocab, const TrainConfig& cfg, const EpochCallback& on_epoch) {
  for (std::size_t e = 0; e < cfg.epochs; ++e) {
    const EpochReport r = train_epoch(params, state, corpus, vocab, cfg);
    if (on_epoch && !on_epoch(r)) break;
  }
}

// ---------------------------------------------------------------------------
// Checkpoint file
//
//   "VQACKPT1"
//   u32 header length, header JSON
//   per tensor: u32 name length, name, u8 dtype (1 = f64), u32 ndim,
//               u64 dims[ndim], row-major little-endian payload
//   u32 CRC32 of every preceding byte
//
// Tensor order: model tensors in EncoderParams::tensors() order, then the
// Adam first moments ("adam.m." prefix), then second moments ("adam.v.").

namespace {

constexpr std::uint8_t kDtypeF64 = 1;

json encoder_to_json(const EncoderConfig& c) {
  return {{"vocab_size", c.vocab_size}, {"d_model", c.d_model}, {"n_layers", c.n_layers},
          {"n_heads", c.n_heads},       {"d_ff", c.d_ff},       {"max_len", c.max_len},
          {"d_embed", c.d_embed},       {"seed", c.seed}};
}

EncoderConfig encoder_from_json(const json& j) {
  EncoderConfig c;
  c.vocab_size = j.at("vocab_size").get<std::size_t>();
  c.d_model = j.at("d_model").get<std::size_t>();
  c.n_layers = j.at("n_layers").get<std::size_t>();
  c.n_heads = j.at("n_heads").get<std::size_t>();
  c.d_ff = j.at("d_ff").get<std::size_t>();
  c.max_len = j.at("max_len").get<std::size_t>();
  c.d_embed = j.at("d_embed").get<std::size_t>();
  c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

void put_tensor(ByteWriter& w, const std::string& name, const MatrixXd& m) {
  w.put_string(name);
  w.put_u8(kDtypeF64);
  w.put_u32(2);
  w.put_u64(static_cast<std::uint64_t>(m.rows()));
  w.put_u64(static_cast<std::uint64_t>(m.cols()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) w.put_f64(m(r, c));
  }
}

void get_tensor(ByteReader& rd, const std::string& expected_name, MatrixXd& m) {
  const std::string name = rd.get_string();
  if (name != expected_name) {
    throw CorruptFile("checkpoint tensor '" + name + "' where '" + expected_name +
                      "' was expected");
  }
  if (rd.get_u8() != kDtypeF64) throw CorruptFile("checkpoint tensor '" + name + "': bad dtype");
  if (rd.get_u32() != 2) throw CorruptFile("checkpoint tensor '" + name + "': bad rank");
  const std::uint64_t rows = rd.get_u64();
  const std::uint64_t cols = rd.get_u64();
  if (rows != static_cast<std::uint64_t>(m.rows()) ||
      cols != static_cast<std::uint64_t>(m.cols())) {
    throw CorruptFile("checkpoint tensor '" + name + "': shape does not match config");
  }
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = rd.get_f64();
  }
}

}  // namespace

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  const TrainConfig& tc = ckpt.train_config;
  const json header = {
      {"format_version", std::to_string(kCheckpointMajorVersion) + "." +
                             std::to_string(kCheckpointMinorVersion)},
      {"encoder", encoder_to_json(ckpt.params.config)},
      {"vocab_hash", ckpt.vocab_hash},
      {"optimizer",
       {{"name", "adam"},
        {"learning_rate", tc.learning_rate},
        {"beta1", tc.adam_beta1},
        {"beta2", tc.adam_beta2},
        {"eps", tc.adam_eps},
        {"step", ckpt.optimizer.step},
        {"epochs_completed", ckpt.optimizer.epochs_completed}}},
      {"train",
       {{"batch_size", tc.batch_size}, {"epochs", tc.epochs}, {"shuffle_seed", tc.shuffle_seed}}},
  };
  ByteWriter w;
  w.put_bytes(std::string_view(kCheckpointMagic, 8));
  w.put_string(header.dump());
  for (const auto& t : ckpt.params.tensors()) put_tensor(w, t.name, *t.value);
  for (const auto& t : ckpt.optimizer.first_moment.tensors()) {
    put_tensor(w, "adam.m." + t.name, *t.value);
  }
  for (const auto& t : ckpt.optimizer.second_moment.tensors()) {
    put_tensor(w, "adam.v." + t.name, *t.value);
  }
  w.write_with_crc(path);
}

Checkpoint load_checkpoint(const std::string& path) {
  const std::vector<std::uint8_t> body = read_crc_file(path, std::string_view(kCheckpointMagic, 8));
  ByteReader rd(body);
  json header;
  try {
    header = json::parse(rd.get_string());
  } catch (const json::exception& e) {
    throw CorruptFile(std::string("checkpoint header: ") + e.what());
  }

  Checkpoint ckpt;
  try {
    const std::string version = header.at("format_version").get<std::string>();
    const int major = std::stoi(version.substr(0, version.find('.')));
    if (major > kCheckpointMajorVersion) {
      throw CorruptFile("unsupported version " + version + " (this build reads " +
                        std::to_string(kCheckpointMajorVersion) + ".x)");
    }
    const EncoderConfig cfg = encoder_from_json(header.at("encoder"));
    cfg.validate();
    ckpt.params = zero_params(cfg);
    ckpt.optimizer = OptimizerState::for_params(ckpt.params);
    ckpt.vocab_hash = header.at("vocab_hash").get<std::string>();
    const json& opt = header.at("optimizer");
    ckpt.optimizer.step = opt.at("step").get<std::uint64_t>();
    ckpt.optimizer.epochs_completed = opt.at("epochs_completed").get<std::uint64_t>();
    TrainConfig& tc = ckpt.train_config;
    tc.learning_rate = opt.at("learning_rate").get<double>();
    tc.adam_beta1 = opt.at("beta1").get<double>();
    tc.adam_beta2 = opt.at("beta2").get<double>();
    tc.adam_eps = opt.at("eps").get<double>();
    const json& tr = header.at("train");
    tc.batch_size = tr.at("batch_size").get<std::size_t>();
    tc.epochs = tr.at("epochs").get<std::size_t>();
    tc.shuffle_seed = tr.at("shuffle_seed").get<std::uint64_t>();
    tc.checkpoint_path = path;
  } catch (const json::exception& e) {
    throw CorruptFile(std::string("checkpoint header: ") + e.what());
  } catch (const std::logic_error&) {
    throw CorruptFile("checkpoint header: malformed format_version");
  } catch (const InvalidArgument& e) {
    throw CorruptFile(std::string("checkpoint header: ") + e.what());
  }

  for (auto& t : ckpt.params.tensors()) get_tensor(rd, t.name, *t.value);
  for (auto& t : ckpt.optimizer.first_moment.tensors()) {
    get_tensor(rd, "adam.m." + t.name, *t.value);
  }
  for (auto& t : ckpt.optimizer.second_moment.tensors()) {
    get_tensor(rd, "adam.v." + t.name, *t.value);
  }
  if (rd.remaining() != 0) throw CorruptFile("checkpoint has trailing bytes");
  return ckpt;
}

}  // namespace vernqa
