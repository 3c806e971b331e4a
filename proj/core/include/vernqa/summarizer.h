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

#ifndef VERNQA_SUMMARIZER_H_
#define VERNQA_SUMMARIZER_H_

// Extractive summaries: cluster sentence embeddings with k-means and keep
// the sentence closest to each cluster center, in document order.

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace vernqa {

struct Sentence {
  std::string text;
  std::size_t position = 0;

  friend bool operator==(const Sentence&, const Sentence&) = default;
};

struct SentenceSet {
  std::vector<Sentence> sentences;

  std::size_t size() const { return sentences.size(); }
  bool empty() const { return sentences.empty(); }
};

// Cuts after '.', '?' or '!' when followed by whitespace or end of text.
// Abbreviations such as "Dr." therefore end a sentence.
SentenceSet split_sentences(std::string_view text);

struct KRule {
  enum class Kind { kSqrt, kFixed, kRatio };
  Kind kind = Kind::kSqrt;
  std::size_t fixed = 0;
  double ratio = 0.0;

  static KRule sqrt() { return {}; }
  static KRule fixed_k(std::size_t k) { return {Kind::kFixed, k, 0.0}; }
  static KRule ratio_of(double r) { return {Kind::kRatio, 0, r}; }
  // "sqrt", "fixed:<k>", "ratio:<r>"
  static KRule parse(const std::string& spec);
  std::string to_string() const;
};

struct SummaryConfig {
  KRule k_rule;
  std::size_t max_sentences = 5;
  std::uint64_t kmeans_seed = 0;
  std::size_t kmeans_max_iters = 100;
};

// k from the rule, then clamped to [1, min(n, max_sentences)].
std::size_t resolve_k(const SummaryConfig& cfg, std::size_t n);

struct KMeansResult {
  std::vector<std::size_t> assignment;  // cluster of each point
  Eigen::MatrixXd centers;              // k x d
  // Sum of squared distances after each assignment step.
  std::vector<double> objective_trace;
  std::size_t iterations = 0;
};

// Seeded k-means++ initialization followed by Lloyd iterations until the
// assignment stops changing or max_iters is reached. A cluster left empty
// is re-seeded with the point farthest from its current center.
KMeansResult kmeans(const Eigen::MatrixXd& points, std::size_t k, std::uint64_t seed,
                    std::size_t max_iters);

using SentenceEmbedder = std::function<Eigen::VectorXd(const std::string&)>;

struct Summary {
  std::vector<Sentence> sentences;  // by original position
  std::size_t k_used = 0;
  std::vector<double> objective_trace;
};

// Throws InvalidArgument on an empty sentence set.
Summary summarize(const SentenceSet& sentences, const SentenceEmbedder& embed,
                  const SummaryConfig& cfg);

}  // namespace vernqa

#endif  // VERNQA_SUMMARIZER_H_
