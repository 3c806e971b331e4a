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

#include <cmath>
#include <filesystem>
#include <limits>

#include "oracles/loss_constants.h"
#include "support/fixtures.h"
#include "support/test_util.h"
#include "vernqa/error.h"
#include "vernqa/trainer.h"

namespace vernqa {
namespace {

using testing::TempDir;

Eigen::MatrixXd logits(std::initializer_list<std::initializer_list<double>> rows) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()),
                    static_cast<Eigen::Index>(rows.begin()->size()));
  Eigen::Index r = 0;
  for (const auto& row : rows) {
    Eigen::Index c = 0;
    for (double v : row) m(r, c++) = v;
    ++r;
  }
  return m;
}

TEST(BatchLoss, SingleElementIsZero) {
  Rng rng(1);
  for (int i = 0; i < 20; ++i) {
    Eigen::MatrixXd q = Eigen::MatrixXd::NullaryExpr(1, 6, [&] { return 5 * rng.normal(); });
    Eigen::MatrixXd a = Eigen::MatrixXd::NullaryExpr(1, 6, [&] { return 5 * rng.normal(); });
    EXPECT_LE(std::abs(batch_loss(q, a).loss), 1e-12);
  }
}

TEST(BatchLoss, UniformLogitsGiveLogB) {
  const auto z = Eigen::MatrixXd::Zero(4, 8);
  EXPECT_NEAR(batch_loss(z, z).loss, testing::loss_oracle::kUniformB4, 1e-9);
  for (int b = 1; b <= 9; ++b) {
    const Eigen::MatrixXd s = Eigen::MatrixXd::Constant(b, b, 3.25);
    EXPECT_NEAR(batch_loss_from_logits(s).loss, std::log(static_cast<double>(b)), 1e-9);
  }
}

TEST(BatchLoss, MatchesIndependentScript) {
  EXPECT_NEAR(batch_loss_from_logits(logits({{2, 0}, {0, 2}})).loss, testing::loss_oracle::kTwoByTwo,
              1e-9);
  EXPECT_NEAR(batch_loss_from_logits(logits({{1, 2, 0.5}, {0, 0, 3}, {-1, 1, 1.5}})).loss,
              testing::loss_oracle::kThree, 1e-9);
}

TEST(BatchLoss, MatchesDefinitionOnRandomLogits) {
  Rng rng(4);
  for (int t = 0; t < 30; ++t) {
    const Eigen::Index b = 1 + static_cast<Eigen::Index>(rng.below(7));
    Eigen::MatrixXd s = Eigen::MatrixXd::NullaryExpr(b, b, [&] { return 3 * rng.normal(); });
    const auto r = batch_loss_from_logits(s);
    EXPECT_NEAR(r.loss, testing::reference_batch_loss(testing::to_mat(s)), 1e-12);
    EXPECT_GE(r.loss, 0.0);
  }
}

TEST(BatchLoss, LargeLogitsStayFinite) {
  const auto r = batch_loss_from_logits(logits({{1000, 0}, {0, 1000}}));
  EXPECT_TRUE(std::isfinite(r.loss));
  EXPECT_NEAR(r.loss, 0.0, 1e-12);
  EXPECT_NEAR(batch_loss_from_logits(logits({{0, 1000}, {0, 1000}})).loss, 500.0, 1e-9);
}

TEST(BatchLoss, LogitsAndDiagonalHits) {
  Eigen::MatrixXd q(3, 2), a(3, 2);
  q << 1, 0, 0, 1, 1, 1;
  a << 1, 0, 0, 1, 0.5, 0.5;
  const auto r = batch_loss(q, a);
  EXPECT_TRUE(r.logits.isApprox(q * a.transpose()));
  // Row 2: logits (1, 1, 1), the diagonal ties so it is not a hit.
  EXPECT_EQ(r.diag_rank_hits, 2u);
}

TEST(BatchLoss, RejectsBadInput) {
  EXPECT_THROW(batch_loss(Eigen::MatrixXd::Zero(2, 3), Eigen::MatrixXd::Zero(3, 3)), InvalidArgument);
  EXPECT_THROW(batch_loss(Eigen::MatrixXd::Zero(0, 3), Eigen::MatrixXd::Zero(0, 3)), InvalidArgument);
  Eigen::MatrixXd bad = Eigen::MatrixXd::Zero(2, 2);
  bad(0, 1) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(batch_loss(bad, bad), InvalidArgument);
}

TEST(BatchLoss, LogitGradientIsSoftmaxMinusIdentityOverB) {
  Rng rng(9);
  for (int t = 0; t < 10; ++t) {
    const Eigen::Index b = 1 + static_cast<Eigen::Index>(rng.below(6));
    Eigen::MatrixXd s = Eigen::MatrixXd::NullaryExpr(b, b, [&] { return 2 * rng.normal(); });
    const Eigen::MatrixXd g = batch_loss_grad_logits(s);
    for (Eigen::Index i = 0; i < b; ++i) {
      for (Eigen::Index j = 0; j < b; ++j) {
        Eigen::MatrixXd up = s, down = s;
        up(i, j) += 1e-5;
        down(i, j) -= 1e-5;
        const double numeric =
            (batch_loss_from_logits(up).loss - batch_loss_from_logits(down).loss) / 2e-5;
        EXPECT_LT(testing::grad_rel_error(g(i, j), numeric), 1e-6);
        const double p = std::exp(s(i, j) - s.row(i).maxCoeff()) /
                         (s.row(i).array() - s.row(i).maxCoeff()).exp().sum();
        EXPECT_NEAR(g(i, j), (p - (i == j ? 1.0 : 0.0)) / static_cast<double>(b), 1e-14);
      }
    }
  }
}

TEST(BatchObjective, GradientsMatchFiniteDifferences) {
  for (std::uint64_t seed = 100; seed < 106; ++seed) {
    const auto worst = testing::check_gradient_case(testing::random_gradient_case(seed));
    EXPECT_LT(worst.rel_error, 1e-4) << "seed " << seed << " " << worst.tensor << "(" << worst.row
                                     << "," << worst.col << ") analytic " << worst.analytic
                                     << " numeric " << worst.numeric;
  }
}

TEST(BatchObjective, AccumulatesIntoGrads) {
  const auto g = testing::random_gradient_case(7);
  EncoderParams once = zero_params(g.params.config), twice = zero_params(g.params.config);
  batch_objective(g.params, g.questions, g.answers, &once);
  batch_objective(g.params, g.questions, g.answers, &twice);
  batch_objective(g.params, g.questions, g.answers, &twice);
  EXPECT_TRUE(twice.q_head.weight.isApprox(2.0 * once.q_head.weight));
  EXPECT_TRUE(twice.trunk.token_embeddings.isApprox(2.0 * once.trunk.token_embeddings));
}

TEST(TrainConfig, Validation) {
  TrainConfig c;
  EXPECT_NO_THROW(c.validate());
  c.batch_size = 0;
  EXPECT_THROW(c.validate(), InvalidArgument);
  c = TrainConfig{};
  c.learning_rate = -1;
  EXPECT_THROW(c.validate(), InvalidArgument);
}

struct SmallSetup {
  Corpus corpus = synthetic_corpus(20);
  Vocabulary vocab = build_vocab(corpus);
  EncoderConfig cfg;
  SmallSetup() {
    cfg.vocab_size = vocab.size();
    cfg.d_model = 16;
    cfg.n_heads = 2;
    cfg.n_layers = 1;
    cfg.d_ff = 32;
    cfg.max_len = 32;
    cfg.d_embed = 8;
    cfg.seed = 3;
  }
};

bool params_equal(const EncoderParams& a, const EncoderParams& b) {
  const auto ta = a.tensors(), tb = b.tensors();
  for (std::size_t i = 0; i < ta.size(); ++i)
    if (!(*ta[i].value == *tb[i].value)) return false;
  return true;
}

TEST(TrainEpoch, DeterministicForSeed) {
  SmallSetup s;
  TrainConfig tc;
  tc.batch_size = 6;
  tc.shuffle_seed = 12;
  EncoderParams a = init_params(s.cfg), b = init_params(s.cfg);
  OptimizerState sa = OptimizerState::for_params(a), sb = OptimizerState::for_params(b);
  const auto ra = train_epoch(a, sa, s.corpus, s.vocab, tc);
  const auto rb = train_epoch(b, sb, s.corpus, s.vocab, tc);
  EXPECT_TRUE(params_equal(a, b));
  EXPECT_EQ(ra.mean_loss, rb.mean_loss);
  EXPECT_EQ(ra.batches, 4u);  // 20 pairs, batches of 6, short final batch kept
  EXPECT_EQ(sa.step, 4u);
  EXPECT_EQ(sa.epochs_completed, 1u);
}

TEST(TrainEpoch, ZeroLearningRateLeavesParams) {
  SmallSetup s;
  TrainConfig tc;
  tc.learning_rate = 0.0;
  EncoderParams p = init_params(s.cfg);
  const EncoderParams before = p;
  OptimizerState st = OptimizerState::for_params(p);
  train_epoch(p, st, s.corpus, s.vocab, tc);
  EXPECT_TRUE(params_equal(p, before));
}

TEST(TrainEpoch, LossDecreasesOverEpochs) {
  SmallSetup s;
  TrainConfig tc;
  tc.batch_size = 5;
  tc.epochs = 60;
  EncoderParams p = init_params(s.cfg);
  OptimizerState st = OptimizerState::for_params(p);
  std::vector<double> losses;
  train(p, st, s.corpus, s.vocab, tc, [&](const EpochReport& r) {
    losses.push_back(r.mean_loss);
    return true;
  });
  ASSERT_EQ(losses.size(), 60u);
  EXPECT_LT(losses.back(), 0.5 * losses.front());
}

TEST(TrainEpoch, CallbackCanStop) {
  SmallSetup s;
  TrainConfig tc;
  tc.epochs = 10;
  EncoderParams p = init_params(s.cfg);
  OptimizerState st = OptimizerState::for_params(p);
  int calls = 0;
  train(p, st, s.corpus, s.vocab, tc, [&](const EpochReport&) { return ++calls < 3; });
  EXPECT_EQ(calls, 3);
  EXPECT_EQ(st.epochs_completed, 3u);
}

TEST(TrainEpoch, NonFiniteLossAborts) {
  SmallSetup s;
  EncoderParams p = init_params(s.cfg);
  p.a_head.weight(0, 0) = std::numeric_limits<double>::infinity();
  OptimizerState st = OptimizerState::for_params(p);
  EXPECT_THROW(train_epoch(p, st, s.corpus, s.vocab, TrainConfig{}), Error);
}

TEST(TrainEpoch, RejectsEmptyCorpusAndOversizedVocab) {
  SmallSetup s;
  EncoderParams p = init_params(s.cfg);
  OptimizerState st = OptimizerState::for_params(p);
  EXPECT_THROW(train_epoch(p, st, Corpus{}, s.vocab, TrainConfig{}), InvalidArgument);
  const Vocabulary big = build_vocab(synthetic_corpus(64), 8192, 1);
  EXPECT_THROW(train_epoch(p, st, s.corpus, big, TrainConfig{}), InvalidArgument);
}

TEST(Overfit, MovingAverageLossIsNonIncreasing) {
  const auto r = testing::run_overfit(42, 300, 300);
  ASSERT_EQ(r.losses.size(), 300u);
  double prev = 0.0;
  for (std::size_t end = 50; end <= r.losses.size(); ++end) {
    double avg = 0.0;
    for (std::size_t i = end - 50; i < end; ++i) avg += r.losses[i] / 50.0;
    if (end > 50) EXPECT_LE(avg, prev + 1e-3) << "window ending at epoch " << end;
    prev = avg;
  }
  EXPECT_EQ(r.strict_accuracy, 1.0);
}

Checkpoint trained_checkpoint(EncoderParams* probe_params = nullptr) {
  SmallSetup s;
  Checkpoint c;
  c.params = init_params(s.cfg);
  c.optimizer = OptimizerState::for_params(c.params);
  c.train_config.batch_size = 7;
  c.train_config.learning_rate = 3e-3;
  c.train_config.shuffle_seed = 99;
  train_epoch(c.params, c.optimizer, s.corpus, s.vocab, c.train_config);
  c.vocab_hash = s.vocab.content_hash();
  if (probe_params) *probe_params = c.params;
  return c;
}

TEST(Checkpoint, RoundTripIsBitIdentical) {
  TempDir dir;
  const Checkpoint c = trained_checkpoint();
  save_checkpoint(c, dir.file("model.ckpt"));
  const Checkpoint back = load_checkpoint(dir.file("model.ckpt"));
  EXPECT_EQ(back.params.config, c.params.config);
  EXPECT_TRUE(params_equal(back.params, c.params));
  EXPECT_TRUE(params_equal(back.optimizer.first_moment, c.optimizer.first_moment));
  EXPECT_TRUE(params_equal(back.optimizer.second_moment, c.optimizer.second_moment));
  EXPECT_EQ(back.optimizer.step, c.optimizer.step);
  EXPECT_EQ(back.optimizer.epochs_completed, 1u);
  EXPECT_EQ(back.vocab_hash, c.vocab_hash);
  EXPECT_EQ(back.train_config.batch_size, 7u);
  EXPECT_EQ(back.train_config.learning_rate, 3e-3);
  EXPECT_EQ(back.train_config.shuffle_seed, 99u);

  SmallSetup s;
  const TokenSeq probe = encode_text(s.vocab, "what are the symptoms of malaria?", s.cfg.max_len);
  for (Head h : {Head::kQuestion, Head::kAnswer})
    EXPECT_TRUE(encode(back.params, probe, h) == encode(c.params, probe, h));

  // Saving the loaded checkpoint reproduces the file byte for byte.
  save_checkpoint(back, dir.file("again.ckpt"));
  EXPECT_EQ(testing::read_file(dir.file("again.ckpt")), testing::read_file(dir.file("model.ckpt")));
}

TEST(Checkpoint, ResumedTrainingMatchesUninterrupted) {
  TempDir dir;
  SmallSetup s;
  TrainConfig tc;
  tc.batch_size = 6;
  tc.epochs = 2;
  EncoderParams straight = init_params(s.cfg);
  OptimizerState st = OptimizerState::for_params(straight);
  train(straight, st, s.corpus, s.vocab, tc);

  EncoderParams p = init_params(s.cfg);
  OptimizerState st2 = OptimizerState::for_params(p);
  tc.epochs = 1;
  train(p, st2, s.corpus, s.vocab, tc);
  save_checkpoint({p, st2, tc, s.vocab.content_hash()}, dir.file("half.ckpt"));
  Checkpoint resumed = load_checkpoint(dir.file("half.ckpt"));
  train(resumed.params, resumed.optimizer, s.corpus, s.vocab, tc);
  EXPECT_TRUE(params_equal(resumed.params, straight));
}

TEST(Checkpoint, EveryFlippedByteIsRejected) {
  TempDir dir;
  SmallSetup s;
  s.cfg.d_model = 4;
  s.cfg.n_heads = 1;
  s.cfg.d_ff = 4;
  s.cfg.max_len = 4;
  s.cfg.d_embed = 2;
  Checkpoint c;
  c.params = init_params(s.cfg);
  c.optimizer = OptimizerState::for_params(c.params);
  save_checkpoint(c, dir.file("ok.ckpt"));
  const std::string bytes = testing::read_file(dir.file("ok.ckpt"));
  for (std::size_t i = 0; i < bytes.size(); i += 7) {
    std::string bad = bytes;
    bad[i] = static_cast<char>(bad[i] ^ 0x5a);
    testing::write_file(dir.file("bad.ckpt"), bad);
    EXPECT_THROW(load_checkpoint(dir.file("bad.ckpt")), CorruptFile) << "byte " << i;
  }
}

TEST(Checkpoint, TruncationIsRejected) {
  TempDir dir;
  const Checkpoint c = trained_checkpoint();
  save_checkpoint(c, dir.file("ok.ckpt"));
  const std::string bytes = testing::read_file(dir.file("ok.ckpt"));
  for (std::size_t keep : {std::size_t{0}, std::size_t{5}, std::size_t{8}, std::size_t{40},
                           bytes.size() / 2, bytes.size() - 1}) {
    testing::write_file(dir.file("cut.ckpt"), bytes.substr(0, keep));
    EXPECT_THROW(load_checkpoint(dir.file("cut.ckpt")), CorruptFile) << keep;
  }
}

TEST(Checkpoint, HigherMajorVersionIsRejected) {
  TempDir dir;
  save_checkpoint(trained_checkpoint(), dir.file("v.ckpt"));
  testing::patch_and_restamp(dir.file("v.ckpt"), "\"format_version\":\"1.0\"",
                             "\"format_version\":\"2.0\"");
  try {
    load_checkpoint(dir.file("v.ckpt"));
    FAIL();
  } catch (const CorruptFile& e) {
    EXPECT_NE(std::string(e.what()).find("unsupported version"), std::string::npos) << e.what();
  }
}

TEST(Checkpoint, MissingFileIsIoError) {
  EXPECT_THROW(load_checkpoint("/nonexistent/vernqa/model.ckpt"), IoError);
}

}  // namespace
}  // namespace vernqa
