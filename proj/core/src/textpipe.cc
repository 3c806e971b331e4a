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

#include "vernqa/textpipe.h"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "vernqa/binio.h"
#include "vernqa/error.h"
#include "vernqa/text_util.h"

namespace vernqa {

namespace {

constexpr const char* kSpecials[] = {"<pad>", "<unk>", "<cls>", "<eos>"};

bool is_ascii_punct(char32_t cp) {
  return (cp >= 0x21 && cp <= 0x2F) || (cp >= 0x3A && cp <= 0x40) ||
         (cp >= 0x5B && cp <= 0x60) || (cp >= 0x7B && cp <= 0x7E);
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  const std::string folded = casefold(text);
  std::vector<std::string> tokens;
  std::string current;
  bool current_is_punct = false;
  auto flush = [&] {
    if (!current.empty()) tokens.push_back(std::move(current));
    current.clear();
  };
  std::size_t pos = 0;
  const std::string_view s = folded;
  while (pos < s.size()) {
    const std::size_t start = pos;
    const char32_t cp = next_code_point(s, pos);
    if (is_unicode_space(cp)) {
      flush();
      continue;
    }
    const bool punct = is_ascii_punct(cp);
    if (!current.empty() && punct != current_is_punct) flush();
    current_is_punct = punct;
    current.append(s.substr(start, pos - start));
  }
  flush();
  return tokens;
}

Vocabulary::Vocabulary() {
  for (TokenId i = 0; i < kFirstWordId; ++i) {
    id_to_token_.emplace_back(kSpecials[i]);
    token_to_id_.emplace(kSpecials[i], i);
  }
}

Vocabulary Vocabulary::from_words(const std::vector<std::string>& words) {
  Vocabulary v;
  for (const std::string& w : words) {
    if (w.empty()) throw InvalidArgument("vocabulary token is empty");
    const auto id = static_cast<TokenId>(v.id_to_token_.size());
    if (!v.token_to_id_.emplace(w, id).second) {
      throw InvalidArgument("duplicate vocabulary token '" + w + "'");
    }
    v.id_to_token_.push_back(w);
  }
  return v;
}

Vocabulary Vocabulary::parse(const std::string& content) {
  std::istringstream in(content);
  std::string line;
  std::vector<std::string> lines;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  if (lines.size() < kFirstWordId) {
    throw FormatError("vocabulary file must start with the 4 special tokens");
  }
  for (TokenId i = 0; i < kFirstWordId; ++i) {
    if (lines[i] != kSpecials[i]) {
      throw FormatError("vocabulary line " + std::to_string(i + 1) + ": expected " +
                        kSpecials[i]);
    }
  }
  try {
    return from_words(std::vector<std::string>(lines.begin() + kFirstWordId, lines.end()));
  } catch (const InvalidArgument& e) {
    throw FormatError(e.what());
  }
}

Vocabulary Vocabulary::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open vocabulary: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

std::string Vocabulary::serialize() const {
  std::string out;
  for (const std::string& t : id_to_token_) {
    out += t;
    out += '\n';
  }
  return out;
}

void Vocabulary::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << serialize();
  if (!out) throw IoError("write failed: " + path);
}

std::string Vocabulary::content_hash() const { return fnv1a_hex(serialize()); }

TokenId Vocabulary::id_of(std::string_view token) const {
  auto it = token_to_id_.find(std::string(token));
  return it == token_to_id_.end() ? kUnkId : it->second;
}

bool Vocabulary::contains(std::string_view token) const {
  return token_to_id_.count(std::string(token)) != 0;
}

const std::string& Vocabulary::token_of(TokenId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= id_to_token_.size()) {
    throw InvalidArgument("token id out of range: " + std::to_string(id));
  }
  return id_to_token_[static_cast<std::size_t>(id)];
}

Vocabulary build_vocab(const Corpus& corpus, std::size_t max_size, std::size_t min_freq) {
  if (max_size < 5) throw InvalidArgument("vocabulary max_size must be >= 5");
  if (min_freq < 1) throw InvalidArgument("vocabulary min_freq must be >= 1");

  std::map<std::string, std::size_t> counts;
  for (const QAPair& p : corpus.pairs) {
    for (auto& t : tokenize(p.question)) ++counts[std::move(t)];
    for (auto& t : tokenize(p.answer)) ++counts[std::move(t)];
  }
  std::vector<std::pair<std::string, std::size_t>> ranked;
  for (auto& [tok, n] : counts) {
    if (n >= min_freq) ranked.emplace_back(tok, n);
  }
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  const std::size_t keep = std::min(ranked.size(), max_size - kFirstWordId);
  std::vector<std::string> words;
  words.reserve(keep);
  for (std::size_t i = 0; i < keep; ++i) words.push_back(std::move(ranked[i].first));
  return Vocabulary::from_words(words);
}

TokenSeq encode_text(const Vocabulary& vocab, std::string_view text, std::size_t max_len) {
  if (max_len < 2) throw InvalidArgument("max_len must be >= 2");
  const std::vector<std::string> tokens = tokenize(text);
  const std::size_t room = max_len - 2;
  const std::size_t used = std::min(tokens.size(), room);

  TokenSeq seq;
  seq.ids.assign(max_len, kPadId);
  seq.ids[0] = kClsId;
  for (std::size_t i = 0; i < used; ++i) seq.ids[i + 1] = vocab.id_of(tokens[i]);
  seq.ids[used + 1] = kEosId;
  seq.true_len = used + 2;
  seq.truncated = tokens.size() > room;
  return seq;
}

std::vector<std::string> decode(const Vocabulary& vocab, const TokenSeq& seq) {
  std::vector<std::string> out;
  for (std::size_t i = 1; i + 1 < seq.true_len; ++i) out.push_back(vocab.token_of(seq.ids[i]));
  return out;
}

}  // namespace vernqa
