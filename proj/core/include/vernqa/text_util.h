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

#ifndef VERNQA_TEXT_UTIL_H_
#define VERNQA_TEXT_UTIL_H_

#include <string>
#include <string_view>

namespace vernqa {

// Unicode White_Space code points.
bool is_unicode_space(char32_t cp);

// Simple one-to-one case folding covering Latin (Basic, Latin-1, Extended-A),
// Greek and Cyrillic. Scripts without case pass through unchanged, as do
// invalid UTF-8 bytes.
std::string casefold(std::string_view text);

// Strips leading and trailing Unicode whitespace.
std::string trim(std::string_view text);

// trim + collapse internal whitespace runs to one ASCII space + casefold.
// This is the equality key for corpus dedup and string-match evaluation.
std::string normalize_text(std::string_view text);

// Decodes one code point starting at text[pos] and advances pos. Invalid
// sequences decode as the single byte value (0x80..0xFF) and advance by one.
char32_t next_code_point(std::string_view text, std::size_t& pos);

void append_utf8(std::string& out, char32_t cp);

}  // namespace vernqa

#endif  // VERNQA_TEXT_UTIL_H_
