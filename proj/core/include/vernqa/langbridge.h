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

#ifndef VERNQA_LANGBRIDGE_H_
#define VERNQA_LANGBRIDGE_H_

// Translation adapters at the pipeline boundary: user language -> English
// before retrieval, English -> user language after composition.

#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "vernqa/error.h"

namespace vernqa {

class UnsupportedLanguagePair : public Error {
 public:
  UnsupportedLanguagePair(const std::string& src, const std::string& tgt,
                          const std::vector<std::pair<std::string, std::string>>& available);
};

// Implementations must be safe to call concurrently.
class Translator {
 public:
  virtual ~Translator() = default;
  virtual std::string translate(std::string_view text) const = 0;
};

class IdentityTranslator final : public Translator {
 public:
  std::string translate(std::string_view text) const override { return std::string(text); }
};

// Word-for-word substitution. Whitespace and punctuation are copied as-is;
// each word is looked up verbatim, then casefolded; unknown words pass
// through unchanged.
class DictionaryTranslator final : public Translator {
 public:
  explicit DictionaryTranslator(std::unordered_map<std::string, std::string> entries);

  // One `source<TAB>target` per line; blank lines and '#' comments skipped.
  static DictionaryTranslator load_tsv(const std::string& path);
  static DictionaryTranslator parse_tsv(const std::string& content);

  std::string translate(std::string_view text) const override;
  std::size_t size() const { return entries_.size(); }

 private:
  std::unordered_map<std::string, std::string> entries_;
};

// Lowercases a language tag.
std::string normalize_lang(std::string_view tag);

class TranslatorRegistry {
 public:
  // Re-registering a pair replaces the previous adapter.
  void register_adapter(std::string_view src, std::string_view tgt,
                        std::shared_ptr<const Translator> adapter);

  // Identity when src == tgt. Throws UnsupportedLanguagePair when no
  // adapter is registered for the pair.
  std::string translate(std::string_view text, std::string_view src, std::string_view tgt) const;

  bool supports(std::string_view src, std::string_view tgt) const;

  // Registered pairs in sorted order.
  std::vector<std::pair<std::string, std::string>> pairs() const;

 private:
  std::map<std::pair<std::string, std::string>, std::shared_ptr<const Translator>> adapters_;
};

}  // namespace vernqa

#endif  // VERNQA_LANGBRIDGE_H_
