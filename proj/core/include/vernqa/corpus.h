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

#ifndef VERNQA_CORPUS_H_
#define VERNQA_CORPUS_H_

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace vernqa {

struct QAPair {
  std::string id;
  std::string question;
  std::string answer;
  std::string lang = "en";
  std::string source = "unknown";

  friend bool operator==(const QAPair&, const QAPair&) = default;
};

// An ordered, id-unique collection of QA pairs. Order is file order.
struct Corpus {
  std::string name;
  std::vector<QAPair> pairs;

  std::size_t size() const { return pairs.size(); }
  bool empty() const { return pairs.empty(); }

  friend bool operator==(const Corpus&, const Corpus&) = default;
};

inline constexpr std::size_t kMaxRecordBytes = 64 * 1024;

// Reads a JSONL corpus. Lines starting with '#' and blank lines are skipped.
// Throws IoError, or FormatError naming the offending line (both lines for
// a duplicate id).
Corpus load_corpus(const std::string& path);
Corpus parse_corpus(const std::string& content, const std::string& name);

void save_corpus(const Corpus& corpus, const std::string& path);
std::string serialize_corpus(const Corpus& corpus);

// Drops pairs whose (normalized question, normalized answer) was already
// seen. First occurrence wins.
Corpus dedupe(const Corpus& corpus);

struct CorpusSplit {
  Corpus train;
  Corpus test;
};

// |test| = round(test_fraction * |c|); members chosen by a seeded shuffle.
// Both parts keep the input's relative order.
CorpusSplit split(const Corpus& corpus, double test_fraction, std::uint64_t seed);

// Templated medical QA pairs used for demos and the overfit experiment.
// count <= 64 distinct pairs are available.
Corpus synthetic_corpus(std::size_t count = 64);

}  // namespace vernqa

#endif  // VERNQA_CORPUS_H_
