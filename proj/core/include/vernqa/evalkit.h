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

#ifndef VERNQA_EVALKIT_H_
#define VERNQA_EVALKIT_H_

// Retrieval metrics. Strict accuracy follows the BioASQ factoid convention:
// a question counts only if its rank-1 result is the gold answer.

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "vernqa/corpus.h"

namespace vernqa {

class Pipeline;

struct EvalRecord {
  std::string question_id;
  std::string gold_answer_id;
  std::vector<std::string> ranked_ids;
};

// All three throw InvalidArgument on an empty record set.
double strict_accuracy(std::span<const EvalRecord> records);
double recall_at_k(std::span<const EvalRecord> records, std::size_t k);
double mrr(std::span<const EvalRecord> records);

// 1-based rank of the gold id, 0 when absent.
std::size_t gold_rank(const EvalRecord& record);

struct QueryLog {
  std::string question_id;
  std::string gold_answer_id;
  std::vector<std::string> ranked_ids;
  std::size_t gold_rank = 0;

  friend bool operator==(const QueryLog&, const QueryLog&) = default;
};

struct RecallAt {
  std::size_t k = 0;
  double value = 0.0;

  friend bool operator==(const RecallAt&, const RecallAt&) = default;
};

struct EvalReport {
  std::string corpus;
  std::size_t num_queries = 0;
  double strict_accuracy = 0.0;
  double mrr = 0.0;
  std::vector<RecallAt> recall;  // ascending k
  std::vector<QueryLog> queries;

  // Schema: docs/schemas/eval_report.schema.json
  std::string to_json(int indent = 2) const;
  static EvalReport from_json(const std::string& text);
  std::string to_table() const;

  friend bool operator==(const EvalReport&, const EvalReport&) = default;
};

EvalReport make_report(const std::string& corpus_name, std::vector<EvalRecord> records,
                       std::vector<std::size_t> k_list);

struct EvalOptions {
  // Also accept a hit whose payload text equals the gold answer after
  // corpus normalization (for eval corpora whose ids are not in the index).
  bool string_fallback = false;
};

// (pair, depth) -> ranked (answer_id, payload text) list.
using Ranker = std::function<std::vector<std::pair<std::string, std::string>>(
    const QAPair& pair, std::size_t depth)>;

// Queries every pair of `eval` to depth max(k_list). Throws InvalidArgument
// on an empty corpus or k_list.
EvalReport run_eval(const Ranker& ranker, const Corpus& eval, std::vector<std::size_t> k_list,
                    const EvalOptions& options = {});
EvalReport run_eval(const Pipeline& pipeline, const Corpus& eval, std::vector<std::size_t> k_list,
                    const EvalOptions& options = {});

}  // namespace vernqa

#endif  // VERNQA_EVALKIT_H_
