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

#ifndef VERNQA_TEXTPIPE_H_
#define VERNQA_TEXTPIPE_H_

#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "vernqa/corpus.h"

namespace vernqa {

using TokenId = std::int32_t;

inline constexpr TokenId kPadId = 0;
inline constexpr TokenId kUnkId = 1;
inline constexpr TokenId kClsId = 2;
inline constexpr TokenId kEosId = 3;
inline constexpr TokenId kFirstWordId = 4;

inline constexpr std::size_t kDefaultMaxLen = 128;
inline constexpr std::size_t kDefaultVocabMaxSize = 8192;
inline constexpr std::size_t kDefaultMinFreq = 2;

// Casefolds, splits on Unicode whitespace, and emits each maximal run of
// ASCII punctuation as its own token.
std::vector<std::string> tokenize(std::string_view text);

// Token <-> id mapping. Ids 0..3 are <pad>, <unk>, <cls>, <eos>; word
// tokens start at 4.
class Vocabulary {
 public:
  // Only the four specials.
  Vocabulary();

  // `words` are assigned ids 4, 5, ... in order. Duplicates or collisions
  // with special strings throw InvalidArgument.
  static Vocabulary from_words(const std::vector<std::string>& words);

  // Line i holds the token with id i; the first four lines must be the
  // special strings.
  static Vocabulary load(const std::string& path);
  static Vocabulary parse(const std::string& content);
  void save(const std::string& path) const;
  std::string serialize() const;

  // FNV-1a of serialize(); recorded in checkpoints to pair them with a vocab.
  std::string content_hash() const;

  std::size_t size() const { return id_to_token_.size(); }
  TokenId id_of(std::string_view token) const;  // kUnkId if absent
  bool contains(std::string_view token) const;
  const std::string& token_of(TokenId id) const;

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
    return a.id_to_token_ == b.id_to_token_;
  }

 private:
  std::vector<std::string> id_to_token_;
  std::unordered_map<std::string, TokenId> token_to_id_;
};

// Most frequent tokens across all questions and answers with frequency
// >= min_freq, ordered by (descending frequency, token), capped so the
// total including specials is <= max_size.
Vocabulary build_vocab(const Corpus& corpus, std::size_t max_size = kDefaultVocabMaxSize,
                       std::size_t min_freq = kDefaultMinFreq);

// Fixed-length encoded text: [CLS] tokens... [EOS] PAD...
struct TokenSeq {
  std::vector<TokenId> ids;
  std::size_t true_len = 0;
  bool truncated = false;

  std::size_t max_len() const { return ids.size(); }
  friend bool operator==(const TokenSeq&, const TokenSeq&) = default;
};

// OOV tokens map to <unk>. When the text does not fit, trailing tokens are
// dropped and EOS is kept in the last slot.
TokenSeq encode_text(const Vocabulary& vocab, std::string_view text,
                     std::size_t max_len = kDefaultMaxLen);

// Token strings strictly between CLS and EOS.
std::vector<std::string> decode(const Vocabulary& vocab, const TokenSeq& seq);

}  // namespace vernqa

#endif  // VERNQA_TEXTPIPE_H_
