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

#include "vernqa/corpus.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "json.hpp"
#include "vernqa/error.h"
#include "vernqa/rng.h"
#include "vernqa/text_util.h"

namespace vernqa {

using nlohmann::json;

namespace {

std::string required_string(const json& obj, const char* key, std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_string()) {
    throw FormatError("line " + std::to_string(line) + ": missing string field '" +
                      key + "'");
  }
  return it->get<std::string>();
}

std::string optional_string(const json& obj, const char* key,
                            const std::string& fallback, std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return fallback;
  if (!it->is_string()) {
    throw FormatError("line " + std::to_string(line) + ": field '" + key +
                      "' must be a string");
  }
  return it->get<std::string>();
}

}  // namespace

Corpus parse_corpus(const std::string& content, const std::string& name) {
  Corpus corpus;
  corpus.name = name;
  std::unordered_map<std::string, std::size_t> id_line;
  std::istringstream in(content);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.size() > kMaxRecordBytes) {
      throw FormatError("line " + std::to_string(line_no) + ": record exceeds " +
                        std::to_string(kMaxRecordBytes) + " bytes");
    }
    if (!line.empty() && line[0] == '#') continue;
    if (trim(line).empty()) continue;

    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw FormatError("line " + std::to_string(line_no) + ": invalid JSON: " +
                        e.what());
    }
    if (!obj.is_object()) {
      throw FormatError("line " + std::to_string(line_no) + ": not a JSON object");
    }
    QAPair p;
    p.id = required_string(obj, "id", line_no);
    p.question = required_string(obj, "question", line_no);
    p.answer = required_string(obj, "answer", line_no);
    p.lang = optional_string(obj, "lang", "en", line_no);
    p.source = optional_string(obj, "source", "unknown", line_no);
    if (p.id.empty()) {
      throw FormatError("line " + std::to_string(line_no) + ": empty id");
    }
    if (trim(p.question).empty() || trim(p.answer).empty()) {
      throw FormatError("line " + std::to_string(line_no) +
                        ": question and answer must be nonempty");
    }
    auto [it, inserted] = id_line.emplace(p.id, line_no);
    if (!inserted) {
      throw FormatError("duplicate id '" + p.id + "' on lines " +
                        std::to_string(it->second) + " and " +
                        std::to_string(line_no));
    }
    corpus.pairs.push_back(std::move(p));
  }
  return corpus;
}

Corpus load_corpus(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open corpus: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError("read failed: " + path);
  return parse_corpus(buf.str(), path);
}

std::string serialize_corpus(const Corpus& corpus) {
  std::string out;
  for (const QAPair& p : corpus.pairs) {
    json obj = {{"id", p.id},
                {"question", p.question},
                {"answer", p.answer},
                {"lang", p.lang},
                {"source", p.source}};
    out += obj.dump();
    out += '\n';
  }
  return out;
}

void save_corpus(const Corpus& corpus, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << serialize_corpus(corpus);
  if (!out) throw IoError("write failed: " + path);
}

Corpus dedupe(const Corpus& corpus) {
  Corpus out;
  out.name = corpus.name;
  std::unordered_set<std::string> seen;
  for (const QAPair& p : corpus.pairs) {
    // Length prefix keeps (question, answer) boundaries unambiguous.
    const std::string q = normalize_text(p.question);
    std::string key = std::to_string(q.size()) + ':' + q + normalize_text(p.answer);
    if (seen.insert(std::move(key)).second) out.pairs.push_back(p);
  }
  return out;
}

CorpusSplit split(const Corpus& corpus, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction >= 0.0 && test_fraction <= 1.0)) {
    throw InvalidArgument("test_fraction must be in [0, 1]");
  }
  const std::size_t n = corpus.size();
  const auto n_test = static_cast<std::size_t>(
      std::llround(test_fraction * static_cast<double>(n)));

  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  Rng rng(seed);
  for (std::size_t i = n; i > 1; --i) {
    std::swap(perm[i - 1], perm[rng.below(i)]);
  }
  std::vector<bool> in_test(n, false);
  for (std::size_t i = 0; i < n_test; ++i) in_test[perm[i]] = true;

  CorpusSplit out;
  out.train.name = corpus.name + ":train";
  out.test.name = corpus.name + ":test";
  for (std::size_t i = 0; i < n; ++i) {
    (in_test[i] ? out.test : out.train).pairs.push_back(corpus.pairs[i]);
  }
  return out;
}

namespace {

struct Condition {
  const char* name;
  const char* symptoms;
  const char* treatment;
  const char* prevention;
  const char* cause;
};

constexpr Condition kConditions[] = {
    {"malaria", "high fever, chills and sweating", "artemisinin combination therapy",
     "sleep under treated bed nets and remove standing water",
     "plasmodium parasites spread by mosquito bites"},
    {"dengue", "sudden fever, severe headache and joint pain",
     "rest, fluids and paracetamol while avoiding aspirin",
     "prevent mosquito breeding around the home", "a virus carried by aedes mosquitoes"},
    {"typhoid", "prolonged fever, weakness and stomach pain",
     "antibiotics such as azithromycin", "drink boiled or treated water",
     "salmonella typhi bacteria in contaminated food or water"},
    {"cholera", "profuse watery diarrhoea and vomiting",
     "oral rehydration salts and sometimes antibiotics",
     "use safe water and wash hands with soap", "vibrio cholerae bacteria"},
    {"tuberculosis", "a cough lasting weeks, night sweats and weight loss",
     "a six month course of several antibiotics",
     "ventilate rooms and complete treatment of known cases",
     "mycobacterium tuberculosis spread through the air"},
    {"anemia", "tiredness, pale skin and shortness of breath",
     "iron supplements and treating the underlying cause",
     "eat iron rich foods such as lentils and leafy greens",
     "low iron, blood loss or poor nutrition"},
    {"diabetes", "frequent urination, thirst and blurred vision",
     "diet changes, exercise and medicines like metformin or insulin",
     "stay active and keep a healthy weight",
     "the body not making or not responding to insulin"},
    {"hypertension", "often no symptoms, sometimes headaches",
     "reducing salt, exercising and blood pressure medicines",
     "limit salt, avoid tobacco and exercise regularly",
     "genetics, high salt intake and stress"},
    {"asthma", "wheezing, chest tightness and breathlessness",
     "inhaled relievers and preventer inhalers", "avoid smoke, dust and known triggers",
     "inflamed and narrowed airways"},
    {"measles", "fever, cough, red eyes and a spreading rash",
     "supportive care with vitamin a supplements",
     "two doses of the measles vaccine", "the highly contagious measles virus"},
    {"jaundice", "yellow skin and eyes with dark urine",
     "treating the liver condition behind it",
     "get hepatitis vaccines and drink safe water",
     "a buildup of bilirubin often from liver disease"},
    {"pneumonia", "cough with phlegm, fever and fast breathing",
     "antibiotics for bacterial cases and oxygen if needed",
     "vaccination and good nutrition for children",
     "bacteria or viruses infecting the lungs"},
    {"scabies", "intense itching that worsens at night",
     "permethrin cream applied to the whole body",
     "wash bedding in hot water and treat close contacts together",
     "tiny mites burrowing into the skin"},
    {"migraine", "throbbing headache with nausea and light sensitivity",
     "pain relievers taken early and rest in a dark room",
     "regular sleep, meals and avoiding personal triggers",
     "changes in brain activity often with a family history"},
    {"dysentery", "bloody diarrhoea with cramps and fever",
     "fluids plus antibiotics or antiparasitic drugs",
     "wash hands and avoid uncooked street food",
     "shigella bacteria or amoeba parasites"},
    {"chickenpox", "an itchy blister rash with mild fever",
     "calamine lotion, fluids and rest", "the varicella vaccine",
     "the varicella zoster virus"},
};

}  // namespace

Corpus synthetic_corpus(std::size_t count) {
  constexpr std::size_t kAspects = 4;
  constexpr std::size_t kAvailable = std::size(kConditions) * kAspects;
  if (count > kAvailable) {
    throw InvalidArgument("synthetic_corpus: at most " + std::to_string(kAvailable) +
                          " pairs available");
  }
  Corpus corpus;
  corpus.name = "synthetic";
  for (std::size_t i = 0; i < count; ++i) {
    // Interleave aspects so small prefixes still cover several conditions.
    const Condition& c = kConditions[i % std::size(kConditions)];
    const std::size_t aspect = i / std::size(kConditions);
    const std::string name = c.name;
    QAPair p;
    p.id = "syn-" + std::string(i < 10 ? "00" : "0") + std::to_string(i);
    p.source = "synthetic";
    switch (aspect) {
      case 0:
        p.question = "What are the symptoms of " + name + "?";
        p.answer = "Common symptoms of " + name + " include " + c.symptoms +
                   ". See a health worker if they persist.";
        break;
      case 1:
        p.question = "How is " + name + " treated?";
        p.answer = "Treatment for " + name + " is usually " + c.treatment +
                   ". Follow the full course prescribed.";
        break;
      case 2:
        p.question = "How can I prevent " + name + "?";
        p.answer = "To prevent " + name + ", " + c.prevention +
                   ". Early action reduces risk.";
        break;
      default:
        p.question = "What causes " + name + "?";
        p.answer = "The cause of " + name + " is " + c.cause + ".";
        break;
    }
    corpus.pairs.push_back(std::move(p));
  }
  return corpus;
}

}  // namespace vernqa
