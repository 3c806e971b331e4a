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

#include "vernqa/langbridge.h"

#include <cctype>
#include <fstream>
#include <sstream>

#include "vernqa/text_util.h"

namespace vernqa {

namespace {

std::string describe_pairs(const std::vector<std::pair<std::string, std::string>>& pairs) {
  if (pairs.empty()) return "none";
  std::string out;
  for (const auto& [s, t] : pairs) {
    if (!out.empty()) out += ", ";
    out += s + "->" + t;
  }
  return out;
}

bool is_word_char(char32_t cp) {
  if (is_unicode_space(cp)) return false;
  if (cp < 0x80) return std::isalnum(static_cast<int>(cp)) || cp == '_';
  return true;
}

}  // namespace

UnsupportedLanguagePair::UnsupportedLanguagePair(
    const std::string& src, const std::string& tgt,
    const std::vector<std::pair<std::string, std::string>>& available)
    : Error("unsupported language pair " + src + "->" + tgt +
            " (available: " + describe_pairs(available) + ")") {}

DictionaryTranslator::DictionaryTranslator(std::unordered_map<std::string, std::string> entries)
    : entries_(std::move(entries)) {}

DictionaryTranslator DictionaryTranslator::parse_tsv(const std::string& content) {
  std::unordered_map<std::string, std::string> entries;
  std::istringstream in(content);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0 || tab + 1 == line.size() ||
        line.find('\t', tab + 1) != std::string::npos) {
      throw FormatError("dictionary line " + std::to_string(line_no) +
                        ": expected source<TAB>target");
    }
    entries[line.substr(0, tab)] = line.substr(tab + 1);
  }
  return DictionaryTranslator(std::move(entries));
}

DictionaryTranslator DictionaryTranslator::load_tsv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open dictionary: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_tsv(buf.str());
}

std::string DictionaryTranslator::translate(std::string_view text) const {
  std::string out;
  out.reserve(text.size());
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t start = pos;
    std::size_t probe = pos;
    if (!is_word_char(next_code_point(text, probe))) {
      out.append(text.substr(start, probe - start));
      pos = probe;
      continue;
    }
    while (pos < text.size()) {
      probe = pos;
      if (!is_word_char(next_code_point(text, probe))) break;
      pos = probe;
    }
    const std::string word(text.substr(start, pos - start));
    auto it = entries_.find(word);
    if (it == entries_.end()) it = entries_.find(casefold(word));
    out += it == entries_.end() ? word : it->second;
  }
  return out;
}

std::string normalize_lang(std::string_view tag) {
  std::string out(tag);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

void TranslatorRegistry::register_adapter(std::string_view src, std::string_view tgt,
                                          std::shared_ptr<const Translator> adapter) {
  adapters_[{normalize_lang(src), normalize_lang(tgt)}] = std::move(adapter);
}

bool TranslatorRegistry::supports(std::string_view src, std::string_view tgt) const {
  const std::string s = normalize_lang(src);
  const std::string t = normalize_lang(tgt);
  return s == t || adapters_.count({s, t}) != 0;
}

std::string TranslatorRegistry::translate(std::string_view text, std::string_view src,
                                          std::string_view tgt) const {
  const std::string s = normalize_lang(src);
  const std::string t = normalize_lang(tgt);
  if (s == t) return std::string(text);
  auto it = adapters_.find({s, t});
  if (it == adapters_.end()) throw UnsupportedLanguagePair(s, t, pairs());
  std::string out = it->second->translate(text);
  if (out.empty() && !text.empty()) {
    throw Error("translator " + s + "->" + t + " returned empty output");
  }
  return out;
}

std::vector<std::pair<std::string, std::string>> TranslatorRegistry::pairs() const {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& [key, _] : adapters_) out.push_back(key);
  return out;
}

}  // namespace vernqa
