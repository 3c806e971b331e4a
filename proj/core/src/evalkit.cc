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

#include "vernqa/evalkit.h"

#include <algorithm>
#include <cstdio>
#include <unordered_set>

#include "json.hpp"
#include "vernqa/error.h"
#include "vernqa/pipeline.h"
#include "vernqa/text_util.h"

namespace vernqa {

using nlohmann::json;

namespace {

void require_records(std::span<const EvalRecord> records) {
  if (records.empty()) throw InvalidArgument("evaluation needs at least one record");
}

}  // namespace

std::size_t gold_rank(const EvalRecord& record) {
  for (std::size_t i = 0; i < record.ranked_ids.size(); ++i) {
    if (record.ranked_ids[i] == record.gold_answer_id) return i + 1;
  }
  return 0;
}

double strict_accuracy(std::span<const EvalRecord> records) {
  require_records(records);
  std::size_t hits = 0;
  for (const EvalRecord& r : records) {
    if (!r.ranked_ids.empty() && r.ranked_ids.front() == r.gold_answer_id) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(records.size());
}

double recall_at_k(std::span<const EvalRecord> records, std::size_t k) {
  require_records(records);
  if (k < 1) throw InvalidArgument("recall@k needs k >= 1");
  std::size_t hits = 0;
  for (const EvalRecord& r : records) {
    const std::size_t rank = gold_rank(r);
    if (rank != 0 && rank <= k) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(records.size());
}

double mrr(std::span<const EvalRecord> records) {
  require_records(records);
  double total = 0.0;
  for (const EvalRecord& r : records) {
    const std::size_t rank = gold_rank(r);
    if (rank != 0) total += 1.0 / static_cast<double>(rank);
  }
  return total / static_cast<double>(records.size());
}

EvalReport make_report(const std::string& corpus_name, std::vector<EvalRecord> records,
                       std::vector<std::size_t> k_list) {
  require_records(records);
  if (k_list.empty()) throw InvalidArgument("k list is empty");
  std::sort(k_list.begin(), k_list.end());
  k_list.erase(std::unique(k_list.begin(), k_list.end()), k_list.end());

  EvalReport rep;
  rep.corpus = corpus_name;
  rep.num_queries = records.size();
  rep.strict_accuracy = strict_accuracy(records);
  rep.mrr = mrr(records);
  for (std::size_t k : k_list) rep.recall.push_back({k, recall_at_k(records, k)});
  for (EvalRecord& r : records) {
    const std::size_t rank = gold_rank(r);
    rep.queries.push_back(
        {std::move(r.question_id), std::move(r.gold_answer_id), std::move(r.ranked_ids), rank});
  }
  return rep;
}

std::string EvalReport::to_json(int indent) const {
  json recall_obj = json::object();
  for (const RecallAt& r : recall) recall_obj[std::to_string(r.k)] = r.value;
  json qs = json::array();
  for (const QueryLog& q : queries) {
    qs.push_back({{"question_id", q.question_id},
                  {"gold_answer_id", q.gold_answer_id},
                  {"ranked_ids", q.ranked_ids},
                  {"gold_rank", q.gold_rank}});
  }
  const json j = {{"corpus", corpus},       {"num_queries", num_queries},
                  {"strict_accuracy", strict_accuracy}, {"mrr", mrr},
                  {"recall", recall_obj},   {"queries", qs}};
  return j.dump(indent);
}

EvalReport EvalReport::from_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    EvalReport rep;
    rep.corpus = j.at("corpus").get<std::string>();
    rep.num_queries = j.at("num_queries").get<std::size_t>();
    rep.strict_accuracy = j.at("strict_accuracy").get<double>();
    rep.mrr = j.at("mrr").get<double>();
    for (const auto& [k, v] : j.at("recall").items()) {
      rep.recall.push_back({static_cast<std::size_t>(std::stoull(k)), v.get<double>()});
    }
    std::sort(rep.recall.begin(), rep.recall.end(),
              [](const RecallAt& a, const RecallAt& b) { return a.k < b.k; });
    for (const json& q : j.at("queries")) {
      rep.queries.push_back({q.at("question_id").get<std::string>(),
                             q.at("gold_answer_id").get<std::string>(),
                             q.at("ranked_ids").get<std::vector<std::string>>(),
                             q.at("gold_rank").get<std::size_t>()});
    }
    return rep;
  } catch (const json::exception& e) {
    throw FormatError(std::string("eval report: ") + e.what());
  } catch (const std::logic_error& e) {
    throw FormatError(std::string("eval report: ") + e.what());
  }
}

std::string EvalReport::to_table() const {
  std::string out;
  char line[128];
  std::snprintf(line, sizeof line, "%-18s %10s\n", "metric", "value");
  out += line;
  std::snprintf(line, sizeof line, "%-18s %10zu\n", "queries", num_queries);
  out += line;
  std::snprintf(line, sizeof line, "%-18s %10.4f\n", "strict_accuracy", strict_accuracy);
  out += line;
  for (const RecallAt& r : recall) {
    const std::string name = "recall@" + std::to_string(r.k);
    std::snprintf(line, sizeof line, "%-18s %10.4f\n", name.c_str(), r.value);
    out += line;
  }
  std::snprintf(line, sizeof line, "%-18s %10.4f\n", "mrr", mrr);
  out += line;
  return out;
}

EvalReport run_eval(const Ranker& ranker, const Corpus& eval, std::vector<std::size_t> k_list,
                    const EvalOptions& options) {
  if (eval.empty()) throw InvalidArgument("evaluation corpus is empty");
  if (k_list.empty()) throw InvalidArgument("k list is empty");
  const std::size_t depth = *std::max_element(k_list.begin(), k_list.end());
  if (depth < 1) throw InvalidArgument("k must be >= 1");

  std::vector<EvalRecord> records;
  records.reserve(eval.size());
  for (const QAPair& p : eval.pairs) {
    EvalRecord r{p.id, p.id, {}};
    const std::string gold_text = options.string_fallback ? normalize_text(p.answer) : "";
    std::unordered_set<std::string> seen;
    for (auto& [id, text] : ranker(p, depth)) {
      std::string rid = id;
      if (options.string_fallback && rid != p.id && normalize_text(text) == gold_text) rid = p.id;
      if (seen.insert(rid).second) r.ranked_ids.push_back(std::move(rid));
    }
    records.push_back(std::move(r));
  }
  return make_report(eval.name, std::move(records), std::move(k_list));
}

EvalReport run_eval(const Pipeline& pipeline, const Corpus& eval, std::vector<std::size_t> k_list,
                    const EvalOptions& options) {
  const Ranker ranker = [&pipeline](const QAPair& p, std::size_t depth) {
    std::vector<std::pair<std::string, std::string>> out;
    for (RetrievedAnswer& h : pipeline.retrieve(p.question, p.lang, depth)) {
      out.emplace_back(std::move(h.hit.answer_id), std::move(h.text));
    }
    return out;
  };
  return run_eval(ranker, eval, std::move(k_list), options);
}

}  // namespace vernqa
