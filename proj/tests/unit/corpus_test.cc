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

#include <gtest/gtest.h>

#include <algorithm>
#include <set>
#include <string>

#include "support/test_util.h"
#include "vernqa/corpus.h"
#include "vernqa/error.h"
#include "vernqa/rng.h"
#include "vernqa/text_util.h"

namespace vernqa {
namespace {

using testing::TempDir;

std::string line(const std::string& id, const std::string& q, const std::string& a) {
  return R"({"id":")" + id + R"(","question":")" + q + R"(","answer":")" + a + "\"}\n";
}

QAPair pair(std::string id, std::string q, std::string a) {
  return {std::move(id), std::move(q), std::move(a)};
}

TEST(TextUtil, CasefoldCoversLatinGreekCyrillic) {
  EXPECT_EQ(casefold("FEVER"), "fever");
  EXPECT_EQ(casefold("ÉCOLE"), "école");
  EXPECT_EQ(casefold("ΠΥΡΕΤΌΣ"), "πυρετόσ");
  EXPECT_EQ(casefold("πυρετός"), "πυρετόσ");  // final sigma folds too
  EXPECT_EQ(casefold("ΆΈΉΊΌΎΏ"), "άέήίόύώ");
  EXPECT_EQ(casefold("ЖАР"), "жар");
}

TEST(TextUtil, NormalizeCollapsesWhitespace) {
  EXPECT_EQ(normalize_text("  Chest \t\n Pain   "), "chest pain");
  EXPECT_EQ(normalize_text(""), "");
}

TEST(Corpus, ParsesLinesInFileOrder) {
  const Corpus c = parse_corpus(line("a", "q1", "a1") + line("b", "q2", "a2") + line("c", "q3", "a3"),
                                "fixture");
  ASSERT_EQ(c.size(), 3u);
  EXPECT_EQ(c.pairs[0].id, "a");
  EXPECT_EQ(c.pairs[2].id, "c");
  EXPECT_EQ(c.pairs[1].lang, "en");
  EXPECT_EQ(c.pairs[1].source, "unknown");
}

TEST(Corpus, EmptyFileGivesEmptyCorpus) {
  TempDir dir;
  testing::write_file(dir.file("empty.jsonl"), "");
  EXPECT_TRUE(load_corpus(dir.file("empty.jsonl")).empty());
}

TEST(Corpus, CommentLinesAreSkipped) {
  const Corpus c = parse_corpus("# header\n" + line("a", "q", "a"), "x");
  EXPECT_EQ(c.size(), 1u);
}

TEST(Corpus, DuplicateIdErrorCitesBothLines) {
  const std::string content = line("x", "q1", "a1") + line("dup", "q2", "a2") + line("y", "q3", "a3") +
                              line("z", "q4", "a4") + line("dup", "q5", "a5");
  try {
    parse_corpus(content, "x");
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("'dup'"), std::string::npos) << msg;
    EXPECT_NE(msg.find("lines 2 and 5"), std::string::npos) << msg;
  }
}

TEST(Corpus, MalformedLineNamesLineNumber) {
  try {
    parse_corpus(line("a", "q", "a") + "{not json}\n", "x");
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
  EXPECT_THROW(parse_corpus(R"({"id":"a","question":"q"})", "x"), FormatError);
  EXPECT_THROW(parse_corpus(line("a", "  ", "x"), "x"), FormatError);
}

TEST(Corpus, OversizedRecordRejected) {
  const std::string big(kMaxRecordBytes + 10, 'a');
  EXPECT_THROW(parse_corpus(line("a", big, "x"), "x"), FormatError);
}

TEST(Corpus, MissingFileIsIoError) {
  EXPECT_THROW(load_corpus("/nonexistent/vernqa/corpus.jsonl"), IoError);
}

TEST(Corpus, SaveLoadRoundTrip) {
  TempDir dir;
  Corpus c = synthetic_corpus(10);
  c.pairs[3].lang = "es";
  c.pairs[3].question = "¿Qué es \"fiebre\"?\tcon tab";
  save_corpus(c, dir.file("c.jsonl"));
  Corpus back = load_corpus(dir.file("c.jsonl"));
  EXPECT_EQ(back.pairs, c.pairs);
}

TEST(Dedupe, TrailingSpacesKeepEarlier) {
  Corpus c{"c", {pair("1", "What is fever?", "A high temperature."),
                 pair("2", "What is fever?   ", "A high temperature.  ")}};
  const Corpus d = dedupe(c);
  ASSERT_EQ(d.size(), 1u);
  EXPECT_EQ(d.pairs[0].id, "1");
}

TEST(Dedupe, UniqueCorpusIsFixpoint) {
  const Corpus c = synthetic_corpus(64);
  EXPECT_EQ(dedupe(c), c);
}

TEST(Dedupe, CasefoldDuplicatesMatchPairwiseOracle) {
  Corpus c{"c", {}};
  for (int i = 0; i < 7; ++i)
    c.pairs.push_back(pair("u" + std::to_string(i), "Question " + std::to_string(i), "Answer"));
  c.pairs.insert(c.pairs.begin() + 2, pair("d0", "QUESTION 0", "answer"));
  c.pairs.insert(c.pairs.begin() + 5, pair("d1", "question  3", "  ANSWER"));
  c.pairs.push_back(pair("d2", "Question 6", "answer"));
  ASSERT_EQ(c.size(), 10u);

  // Pairwise oracle: keep i unless an earlier j matches after lowercasing
  // and whitespace collapsing.
  auto canon = [](const std::string& s) {
    std::string out;
    bool space = false;
    for (char ch : s) {
      if (ch == ' ' || ch == '\t') {
        space = !out.empty();
        continue;
      }
      if (space) out += ' ';
      space = false;
      out += static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    }
    return out;
  };
  std::vector<std::string> expected;
  for (std::size_t i = 0; i < c.size(); ++i) {
    bool dup = false;
    for (std::size_t j = 0; j < i; ++j)
      dup |= canon(c.pairs[i].question) == canon(c.pairs[j].question) &&
             canon(c.pairs[i].answer) == canon(c.pairs[j].answer);
    if (!dup) expected.push_back(c.pairs[i].id);
  }
  std::vector<std::string> got;
  for (const auto& p : dedupe(c).pairs) got.push_back(p.id);
  EXPECT_EQ(got.size(), 7u);
  EXPECT_EQ(got, expected);
}

TEST(Dedupe, FieldBoundaryIsRespected) {
  Corpus c{"c", {pair("1", "a b", "c"), pair("2", "a", "b c")}};
  EXPECT_EQ(dedupe(c).size(), 2u);
}

TEST(Dedupe, IdempotentOnRandomCorpora) {
  Rng rng(11);
  const char* words[] = {"Fever", "fever", "RASH", "rash ", " cough"};
  for (int trial = 0; trial < 50; ++trial) {
    Corpus c;
    for (int i = 0; i < 20; ++i)
      c.pairs.push_back(pair(std::to_string(i), words[rng.below(5)], words[rng.below(5)]));
    const Corpus once = dedupe(c);
    EXPECT_EQ(dedupe(once), once);
  }
}

TEST(Split, Boundaries) {
  const Corpus c = synthetic_corpus(10);
  auto s0 = split(c, 0.0, 1);
  EXPECT_EQ(s0.train.pairs, c.pairs);
  EXPECT_TRUE(s0.test.empty());
  auto s1 = split(c, 1.0, 1);
  EXPECT_TRUE(s1.train.empty());
  EXPECT_EQ(s1.test.pairs, c.pairs);
  EXPECT_THROW(split(c, 1.5, 1), InvalidArgument);
  EXPECT_THROW(split(c, -0.1, 1), InvalidArgument);
}

TEST(Split, DeterministicForSeed) {
  Corpus c;
  for (int i = 0; i < 100; ++i) c.pairs.push_back(pair("p" + std::to_string(i), "q", "a"));
  const auto a = split(c, 0.2, 7);
  const auto b = split(c, 0.2, 7);
  EXPECT_EQ(a.train, b.train);
  EXPECT_EQ(a.test, b.test);
  EXPECT_EQ(a.test.size(), 20u);
  EXPECT_NE(split(c, 0.2, 8).test, a.test);
}

TEST(Split, IsOrderPreservingPartition) {
  const Corpus c = synthetic_corpus(64);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto s = split(c, 0.3, seed);
    EXPECT_EQ(s.train.size() + s.test.size(), c.size());
    std::set<std::string> ids;
    for (const auto* part : {&s.train, &s.test}) {
      std::size_t last = 0;
      for (const auto& p : part->pairs) {
        const auto pos = static_cast<std::size_t>(
            std::find(c.pairs.begin(), c.pairs.end(), p) - c.pairs.begin());
        EXPECT_TRUE(part->pairs.front() == p || pos > last);
        last = pos;
        EXPECT_TRUE(ids.insert(p.id).second);
      }
    }
    EXPECT_EQ(ids.size(), c.size());
  }
}

TEST(Synthetic, SixtyFourUniqueTemplatedPairs) {
  const Corpus c = synthetic_corpus(64);
  ASSERT_EQ(c.size(), 64u);
  std::set<std::string> q, a;
  for (const auto& p : c.pairs) {
    q.insert(p.question);
    a.insert(p.answer);
  }
  EXPECT_EQ(q.size(), 64u);
  EXPECT_EQ(a.size(), 64u);
  EXPECT_THROW(synthetic_corpus(65), InvalidArgument);
}

}  // namespace
}  // namespace vernqa
