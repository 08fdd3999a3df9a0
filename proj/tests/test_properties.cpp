#include <doctest.h>

#include "pausetag/labelderive.hpp"
#include "testutil.hpp"

using namespace pausetag;

namespace {

PausedSentence random_sentence(Rng& rng) {
  PausedSentence sent{{}, "u"};
  const std::size_t n = 1 + rng.below(15);
  for (std::size_t i = 0; i < n; ++i) {
    const bool punct = rng.bernoulli(0.2);
    sent.tokens.push_back({punct ? "." : "word",
                           static_cast<std::int64_t>(rng.below(4000)), punct});
  }
  return sent;
}

}  // namespace

TEST_CASE("threshold_segment spans partition the sentence") {
  Rng rng(106);
  for (int iter = 0; iter < 1000; ++iter) {
    const PausedSentence sent = random_sentence(rng);
    const auto threshold = static_cast<std::int64_t>(rng.below(4000));
    const auto spans = threshold_segment(sent, threshold);
    std::size_t expect_start = 0;
    for (const auto& [start, end] : spans) {
      CHECK(start == expect_start);
      CHECK(start < end);
      expect_start = end;
    }
    CHECK(expect_start == sent.tokens.size());
  }
}

TEST_CASE("with zero MAD the middle bins never fire") {
  Rng rng(103);
  for (int iter = 0; iter < 1000; ++iter) {
    const std::int64_t median = static_cast<std::int64_t>(rng.below(1000));
    const UserPauseStats stats{"u", static_cast<double>(median), 0.0, 3};
    const std::int64_t p = static_cast<std::int64_t>(rng.below(2000));
    const PauseBin bin = bin_pause(p, stats, false);
    CHECK((bin == PauseBin::LtMedian || bin == PauseBin::GtMedianMad));
    CHECK(bin_pause(median, stats, false) == PauseBin::GtMedianMad);
  }
}

TEST_CASE("derive_labels output length equals token count") {
  Rng rng(109);
  for (int iter = 0; iter < 500; ++iter) {
    std::vector<std::int64_t> pauses;
    for (int i = 0; i < 10; ++i) {
      pauses.push_back(static_cast<std::int64_t>(rng.below(2000)));
    }
    const UserPauseStats stats = user_stats("u", pauses);
    const PausedSentence sent = random_sentence(rng);
    const auto tagged = derive_labels({sent}, stats);
    REQUIRE(tagged.size() == 1);
    CHECK(tagged[0].labels.size() == sent.tokens.size());
    CHECK(tagged[0].tokens.size() == sent.tokens.size());
  }
}
