#include <doctest.h>

#include "pausetag/labelderive.hpp"
#include "pausetag/rng.hpp"
#include "testutil.hpp"

using namespace pausetag;

namespace {

PausedSentence example_sentence() {
  PausedSentence sent{{}, "u33"};
  const auto tokens = testutil::example_tokens();
  const auto pauses = testutil::example_pauses();
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    sent.tokens.push_back({tokens[i], pauses[i], is_punct_token(tokens[i])});
  }
  return sent;
}

}  // namespace

TEST_CASE("user_stats on the worked keylog example") {
  const auto pauses = testutil::example_pauses();
  const UserPauseStats stats = user_stats("u33", pauses);

  // oracle: sort-and-index median/MAD, independent of the implementation
  const std::vector<double> as_double(pauses.begin(), pauses.end());
  CHECK(stats.median_ms == doctest::Approx(testutil::median_oracle(as_double)));
  CHECK(stats.mad_ms == doctest::Approx(testutil::mad_oracle(as_double)));
  CHECK(stats.median_ms == 240.0);
  CHECK(stats.mad_ms == 240.0);
  CHECK(stats.n_pauses == 11);
}

TEST_CASE("user_stats small cases") {
  auto s = user_stats("u", {5});
  CHECK(s.median_ms == 5.0);
  CHECK(s.mad_ms == 0.0);

  s = user_stats("u", {1, 2, 3, 4, 5});
  CHECK(s.median_ms == 3.0);
  CHECK(s.mad_ms == 1.0);

  // even length: mean of the two middle values
  s = user_stats("u", {1, 2, 3, 4});
  CHECK(s.median_ms == 2.5);

  CHECK_THROWS_WITH_AS(user_stats("u7", {}), doctest::Contains("u7"),
                       std::invalid_argument);
}

TEST_CASE("bin_pause thresholds") {
  const UserPauseStats stats{"u", 240.0, 240.0, 11};
  CHECK(bin_pause(96, stats, false) == PauseBin::LtMedian);
  CHECK(bin_pause(240, stats, false) == PauseBin::LtMedianHalfMad);
  CHECK(bin_pause(360, stats, false) == PauseBin::LtMedianMad);
  CHECK(bin_pause(479, stats, false) == PauseBin::LtMedianMad);
  CHECK(bin_pause(480, stats, false) == PauseBin::GtMedianMad);
  CHECK(bin_pause(496, stats, false) == PauseBin::GtMedianMad);
  CHECK(bin_pause(0, stats, true) == PauseBin::Outside);
  CHECK(bin_pause(100000, stats, true) == PauseBin::Outside);
}

TEST_CASE("bin_pause with zero MAD") {
  const UserPauseStats stats{"u", 100.0, 0.0, 3};
  CHECK(bin_pause(99, stats, false) == PauseBin::LtMedian);
  CHECK(bin_pause(100, stats, false) == PauseBin::GtMedianMad);
  CHECK(bin_pause(101, stats, false) == PauseBin::GtMedianMad);
}

TEST_CASE("bio_encode worked example") {
  using B = PauseBin;
  const std::vector<B> bins{B::LtMedian,        B::LtMedianMad, B::LtMedian,
                            B::LtMedian,        B::LtMedianHalfMad,
                            B::LtMedianHalfMad, B::GtMedianMad};
  const std::vector<std::string> expected{"B-<m", "B-<m+1",  "B-<m", "I-<m",
                                          "B-<m+.5", "I-<m+.5", "B->m1"};
  CHECK(bio_encode(bins) == expected);
}

TEST_CASE("bio_encode restarts segments after O") {
  using B = PauseBin;
  CHECK(bio_encode({B::LtMedian, B::Outside, B::LtMedian}) ==
        std::vector<std::string>{"B-<m", "O", "B-<m"});
  CHECK(bio_encode({}).empty());
}

TEST_CASE("derive_labels on the worked example sentence") {
  const UserPauseStats stats{"u33", 240.0, 240.0, 11};
  const auto tagged = derive_labels({example_sentence()}, stats);
  REQUIRE(tagged.size() == 1);
  CHECK(tagged[0].task_id == kKeystrokeTask);
  const std::vector<std::string> expected{
      "B-<m", "I-<m", "B->m1", "I->m1", "B-<m", "B->m1",
      "B-<m", "I-<m", "B->m1", "B-<m+.5", "B->m1"};
  CHECK(tagged[0].labels == expected);
  CHECK(tagged[0].tokens.size() == tagged[0].labels.size());
}

TEST_CASE("derive_labels edge cases") {
  const UserPauseStats stats{"u1", 100.0, 10.0, 5};

  PausedSentence single{{{"word", 50, false}}, "u1"};
  auto tagged = derive_labels({single}, stats);
  CHECK(tagged[0].labels == std::vector<std::string>{"B-<m"});

  PausedSentence punct{{{".", 0, true}, {"!", 9000, true}}, "u1"};
  tagged = derive_labels({punct}, stats);
  CHECK(tagged[0].labels == std::vector<std::string>{"O", "O"});

  PausedSentence wrong_user{{{"x", 0, false}}, "u2"};
  CHECK_THROWS_AS(derive_labels({wrong_user}, stats), std::invalid_argument);
}

TEST_CASE("threshold_segment reproduces the 500ms bracketing") {
  const auto spans = threshold_segment(example_sentence(), 500);
  // [Coefficient of determination][is a][measure used in][statisitcal model][analysis]
  const std::vector<std::pair<std::size_t, std::size_t>> expected{
      {0, 3}, {3, 5}, {5, 8}, {8, 10}, {10, 11}};
  CHECK(spans == expected);
}

TEST_CASE("threshold_segment extremes") {
  const auto sent = example_sentence();
  const auto all_single = threshold_segment(sent, 0);
  CHECK(all_single.size() == sent.tokens.size());
  const auto one_span = threshold_segment(sent, 1000000);
  REQUIRE(one_span.size() == 1);
  CHECK(one_span[0] == std::make_pair(std::size_t{0}, sent.tokens.size()));
}

TEST_CASE("pause_word_length_corr") {
  auto tok = [](std::string t, std::int64_t p) {
    return PausedToken{std::move(t), p, false};
  };
  CHECK(pause_word_length_corr({tok("a", 10), tok("ab", 20), tok("abc", 30)}) ==
        doctest::Approx(1.0));
  CHECK(pause_word_length_corr({tok("a", 30), tok("ab", 20), tok("abc", 10)}) ==
        doctest::Approx(-1.0));
  CHECK_THROWS_AS(
      pause_word_length_corr({tok("aa", 10), tok("bb", 20), tok("cc", 30)}),
      std::domain_error);
}

TEST_CASE("pause_distribution") {
  auto tok = [](std::int64_t p) { return PausedToken{"w", p, false}; };

  SUBCASE("counts sum to token count") {
    const std::vector<PausedToken> tokens{tok(0), tok(5), tok(100), tok(3000)};
    std::size_t total = 0;
    for (const auto& row : pause_distribution(tokens)) total += row.count;
    CHECK(total == tokens.size());
  }
  SUBCASE("grouped by tags") {
    const std::vector<PausedToken> tokens{tok(10), tok(10), tok(10)};
    const std::vector<std::string> tags{"DET", "DET", "NOUN"};
    std::size_t det = 0, noun = 0;
    for (const auto& row : pause_distribution(tokens, &tags)) {
      if (row.group == "DET") det += row.count;
      if (row.group == "NOUN") noun += row.count;
    }
    CHECK(det == 2);
    CHECK(noun == 1);
  }
  SUBCASE("empty input") { CHECK(pause_distribution({}).empty()); }
}
