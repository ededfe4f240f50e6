// Copyright 2026 The TLE Authors.
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

#include "tle/seq.h"

#include <filesystem>
#include <set>

#include <gtest/gtest.h>

#include "tle/io.h"

namespace tle {
namespace {

TEST(AlphabetTest, LettersAndEndToken) {
  const Alphabet a = Alphabet::letters(3);
  EXPECT_EQ(a.size(), 3);
  EXPECT_EQ(a.extended_size(), 4);
  EXPECT_EQ(a.end(), 3);
  EXPECT_EQ(a.symbol(0), "a");
  EXPECT_EQ(a.symbol(2), "c");
  EXPECT_EQ(a.symbol(a.end()), "$");
  EXPECT_EQ(a.index("b"), 1);
  EXPECT_EQ(a.index("$"), 3);
  EXPECT_FALSE(a.contains("d"));
}

TEST(AlphabetTest, RejectsDuplicatesAndEndCollision) {
  EXPECT_THROW(Alphabet({"a", "a"}), std::invalid_argument);
  EXPECT_THROW(Alphabet({"a", "$"}), std::invalid_argument);
  EXPECT_NO_THROW(Alphabet({"a", "$"}, "</s>"));
}

TEST(OutputSequenceTest, ContentStripsTerminator) {
  const auto y = OutputSequence::terminate(TokenSeq{0, 1}, 3);
  EXPECT_TRUE(y.terminated);
  EXPECT_EQ(y.tokens, (TokenSeq{0, 1, 3}));
  ASSERT_EQ(y.content().size(), 2u);
  const auto p = OutputSequence::prefix({0, 1});
  EXPECT_EQ(p.content().size(), 2u);
}

TEST(OutputSequenceTest, Validate) {
  const Alphabet a = Alphabet::letters(2);
  // "ab$" is terminated, "ab" is a prefix.
  EXPECT_TRUE(validate(OutputSequence::terminate(TokenSeq{0, 1}, a.end()), a));
  EXPECT_TRUE(validate(OutputSequence::prefix({0, 1}), a));
  // "a$b": terminator in the middle.
  EXPECT_FALSE(validate({{0, 2, 1}, true}, a));
  EXPECT_FALSE(validate({{0, 2, 1}, false}, a));
  // flagged terminated but no terminator
  EXPECT_FALSE(validate({{0, 1}, true}, a));
  EXPECT_FALSE(validate({{}, true}, a));
  EXPECT_FALSE(validate(OutputSequence::prefix({0, 5}), a));
}

TEST(SequenceFormatTest, RoundTrip) {
  const Alphabet a = Alphabet::letters(3);
  const auto y = OutputSequence::terminate(TokenSeq{2, 0}, a.end());
  EXPECT_EQ(format_sequence(y, a), "c a $");
  EXPECT_EQ(parse_sequence("c a $", a), y);
  EXPECT_EQ(parse_sequence("c a", a), OutputSequence::prefix({2, 0}));
  EXPECT_EQ(parse_sequence("$", a), OutputSequence::terminate(TokenSeq{}, a.end()));
  EXPECT_THROW(parse_sequence("a $ b", a), ParseError);
  EXPECT_THROW(parse_sequence("a z", a), ParseError);
}

TEST(EnumerationTest, CountMatchesGeometricSum) {
  // sum_{l=0}^{L} |C|^l
  EXPECT_EQ(count_outputs(2, 0), 1u);
  EXPECT_EQ(count_outputs(2, 3), 15u);
  EXPECT_EQ(count_outputs(3, 2), 13u);
  EXPECT_EQ(count_outputs(1, 4), 5u);
}

TEST(EnumerationTest, OrderAndUniqueness) {
  const Alphabet a = Alphabet::letters(2);
  const auto all = enumerate_outputs(a, 2);
  ASSERT_EQ(all.size(), 7u);
  std::vector<std::string> shown;
  for (const auto& y : all) shown.push_back(format_sequence(y, a));
  EXPECT_EQ(shown, (std::vector<std::string>{"$", "a $", "b $", "a a $", "a b $",
                                             "b a $", "b b $"}));
  for (int k = 1; k <= 4; ++k) {
    for (int L = 0; L <= 4; ++L) {
      std::set<TokenSeq> seen;
      std::size_t n = 0;
      for_each_output(k, L, [&](const OutputSequence& y) {
        EXPECT_TRUE(y.terminated);
        EXPECT_LE(static_cast<int>(y.content().size()), L);
        seen.insert(y.tokens);
        ++n;
      });
      EXPECT_EQ(n, count_outputs(k, L));
      EXPECT_EQ(seen.size(), n);
    }
  }
}

TEST(EnumerationTest, CapThrowsBudgetExceeded) {
  EXPECT_THROW(for_each_output(4, 10, [](const OutputSequence&) {}, 1000),
               BudgetExceeded);
  EXPECT_NO_THROW(for_each_output(2, 3, [](const OutputSequence&) {}, 15));
  EXPECT_THROW(for_each_output(2, 3, [](const OutputSequence&) {}, 14), BudgetExceeded);
}

TEST(DatasetTest, ParseFormatRoundTrip) {
  const Alphabet a = Alphabet::letters(3);
  const std::string text = "a b c\tc b a\nb\tb\n";
  const Dataset d = parse_dataset(text, a, a);
  ASSERT_EQ(d.size(), 2u);
  EXPECT_EQ(d[0].input, (TokenSeq{0, 1, 2}));
  EXPECT_EQ(d[0].ground_truth, OutputSequence::terminate(TokenSeq{2, 1, 0}, a.end()));
  EXPECT_EQ(format_dataset(d, a, a), text);
}

TEST(DatasetTest, EmptyTargetIsAllowedEmptyInputIsNot) {
  const Alphabet a = Alphabet::letters(2);
  const Dataset d = parse_dataset("a\t\n", a, a);
  ASSERT_EQ(d.size(), 1u);
  EXPECT_TRUE(d[0].ground_truth.content().empty());
  EXPECT_THROW(parse_dataset("\ta\n", a, a), ParseError);
  EXPECT_THROW(parse_dataset("a b\n", a, a), ParseError);
  EXPECT_THROW(parse_dataset("a\tq\n", a, a), ParseError);
}

TEST(DatasetTest, FileRoundTripAndMissingFile) {
  const Alphabet a = Alphabet::letters(4);
  const auto path =
      (std::filesystem::temp_directory_path() / "tle_seq_test.tsv").string();
  const Dataset d = parse_dataset("a b\tb a\nd\td d\n", a, a);
  save_dataset(path, d, a, a);
  const Dataset back = load_dataset(path, a, a);
  ASSERT_EQ(back.size(), d.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    EXPECT_EQ(back[i].input, d[i].input);
    EXPECT_EQ(back[i].ground_truth, d[i].ground_truth);
  }
  std::filesystem::remove(path);
  EXPECT_THROW(load_dataset("/nonexistent/dir/x.tsv", a, a), IoError);
}

TEST(IoTest, Sha256KnownVector) {
  EXPECT_EQ(sha256_hex("abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  EXPECT_EQ(sha256_hex(""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

}  // namespace
}  // namespace tle
