#include <doctest.h>

#include <sstream>

#include "pausetag/keylog.hpp"
#include "pausetag/rng.hpp"
#include "testutil.hpp"

using namespace pausetag;

TEST_CASE("parse_keylog maps fields") {
  std::istringstream in("u1\ts1\ta\t100\t150\n");
  const auto streams = parse_keylog(in);
  REQUIRE(streams.size() == 1);
  REQUIRE(streams[0].events.size() == 1);
  const KeystrokeEvent& ev = streams[0].events[0];
  CHECK(ev.key == "a");
  CHECK(ev.press_ms == 100);
  CHECK(ev.release_ms == 150);
  CHECK(ev.user_id == "u1");
  CHECK(ev.session_id == "s1");
}

TEST_CASE("parse_keylog rejects malformed input") {
  SUBCASE("release before press") {
    std::istringstream in("u1\ts1\ta\t100\t90\n");
    CHECK_THROWS_WITH_AS(parse_keylog(in), doctest::Contains("line 1"),
                         KeylogParseError);
  }
  SUBCASE("out-of-order events") {
    std::istringstream in("u1\ts1\ta\t200\t250\nu1\ts1\tb\t100\t150\n");
    CHECK_THROWS_WITH_AS(parse_keylog(in), doctest::Contains("out-of-order"),
                         KeylogParseError);
  }
  SUBCASE("wrong column count") {
    std::istringstream in("u1\ts1\ta\t100\n");
    CHECK_THROWS_AS(parse_keylog(in), KeylogParseError);
  }
  SUBCASE("non-integer timestamp") {
    std::istringstream in("u1\ts1\ta\tx\t150\n");
    CHECK_THROWS_AS(parse_keylog(in), KeylogParseError);
  }
}

TEST_CASE("parse_keylog groups by user and session, skips comments") {
  std::istringstream in(
      "# comment\n"
      "u1\ts1\ta\t0\t10\n"
      "u2\ts1\tb\t0\t10\n"
      "u1\ts1\tc\t20\t30\n"
      "u1\ts2\td\t0\t10\n");
  const auto streams = parse_keylog(in);
  REQUIRE(streams.size() == 3);
  CHECK(streams[0].user_id == "u1");
  CHECK(streams[0].session_id == "s1");
  CHECK(streams[0].events.size() == 2);
  CHECK(streams[1].user_id == "u2");
  CHECK(streams[2].session_id == "s2");
}

TEST_CASE("compute_pause") {
  KeystrokeEvent prev{"a", 50, 100, "u", "s"};
  KeystrokeEvent cur{"b", 150, 200, "u", "s"};
  CHECK(compute_pause(prev, cur, PauseMode::ReleaseToPress) == 50);
  CHECK(compute_pause(prev, cur, PauseMode::PressToPress) == 100);

  // overlapping keystrokes clamp to zero
  prev.release_ms = 200;
  cur.press_ms = 150;
  CHECK(compute_pause(prev, cur, PauseMode::ReleaseToPress) == 0);

  prev = {"a", 100, 120, "u", "s"};
  cur = {"b", 400, 420, "u", "s"};
  CHECK(compute_pause(prev, cur, PauseMode::PressToPress) == 300);
}

TEST_CASE("tokenize_with_pauses hand-simulated example: 'is a.'") {
  // i s SPACE a SPACE .  with hold 50, gap 50
  const auto events =
      testutil::make_stream({"i", "s", "SPACE", "a", "SPACE", "."});
  const auto sentences =
      tokenize_with_pauses(events, PauseMode::ReleaseToPress);
  REQUIRE(sentences.size() == 1);
  const auto& toks = sentences[0].tokens;
  REQUIRE(toks.size() == 3);
  CHECK(toks[0].text == "is");
  CHECK(toks[1].text == "a");
  CHECK(toks[2].text == ".");
  CHECK(toks[0].pre_pause_ms == 0);     // session start
  CHECK(toks[1].pre_pause_ms == 50);    // SPACE release -> 'a' press
  CHECK(toks[2].pre_pause_ms == 50);    // SPACE release -> '.' press
  CHECK(toks[2].is_punct);
  CHECK_FALSE(toks[0].is_punct);
}

TEST_CASE("tokenize_with_pauses splits sentences at boundary punctuation") {
  const auto events =
      testutil::make_stream(
          {"H", "i", "SPACE", "!", "SPACE", "O", "k", "SPACE", "!"});
  const auto sentences =
      tokenize_with_pauses(events, PauseMode::ReleaseToPress);
  REQUIRE(sentences.size() == 2);
  REQUIRE(sentences[0].tokens.size() == 2);
  CHECK(sentences[0].tokens[0].text == "Hi");
  CHECK(sentences[0].tokens[1].text == "!");
  REQUIRE(sentences[1].tokens.size() == 2);
  CHECK(sentences[1].tokens[0].text == "Ok");
  CHECK(sentences[1].tokens[1].text == "!");
}

TEST_CASE("tokenize_with_pauses empty input") {
  CHECK(tokenize_with_pauses({}, PauseMode::ReleaseToPress).empty());
}

TEST_CASE("BACKSPACE deletes the latest surviving character") {
  const auto events =
      testutil::make_stream({"a", "b", "BACKSPACE", "c", "SPACE", "d"});
  const auto sentences =
      tokenize_with_pauses(events, PauseMode::ReleaseToPress);
  REQUIRE(sentences.size() == 1);
  REQUIRE(sentences[0].tokens.size() == 2);
  CHECK(sentences[0].tokens[0].text == "ac");
  CHECK(sentences[0].tokens[1].text == "d");
}

TEST_CASE("pause measured from the physical event before the first surviving key") {
  // 'a' BACKSPACE 'b': token is "b"; its pause spans BACKSPACE -> 'b'.
  std::vector<KeystrokeEvent> events{
      {"x", 0, 10, "u1", "s1"},    {"SPACE", 20, 30, "u1", "s1"},
      {"a", 40, 50, "u1", "s1"},   {"BACKSPACE", 100, 110, "u1", "s1"},
      {"b", 200, 210, "u1", "s1"},
  };
  const auto sentences =
      tokenize_with_pauses(events, PauseMode::ReleaseToPress);
  REQUIRE(sentences.size() == 1);
  REQUIRE(sentences[0].tokens.size() == 2);
  CHECK(sentences[0].tokens[1].text == "b");
  CHECK(sentences[0].tokens[1].pre_pause_ms == 200 - 110);
}

TEST_CASE("silent keys produce no text but count for pause measurement") {
  std::vector<KeystrokeEvent> events{
      {"a", 0, 10, "u1", "s1"},
      {"SPACE", 20, 30, "u1", "s1"},
      {"SHIFT", 40, 200, "u1", "s1"},
      {"B", 250, 260, "u1", "s1"},
  };
  const auto sentences =
      tokenize_with_pauses(events, PauseMode::ReleaseToPress);
  REQUIRE(sentences.size() == 1);
  REQUIRE(sentences[0].tokens.size() == 2);
  CHECK(sentences[0].tokens[1].text == "B");
  CHECK(sentences[0].tokens[1].pre_pause_ms == 250 - 200);  // from SHIFT
}

TEST_CASE("boundary punctuation set is configurable") {
  TokenizerConfig config;
  config.boundary_punct = ";";
  const auto events = testutil::make_stream(
      {"a", "SPACE", ";", "SPACE", "b", "SPACE", "."});
  const auto sentences =
      tokenize_with_pauses(events, PauseMode::ReleaseToPress, config);
  REQUIRE(sentences.size() == 2);
  CHECK(sentences[0].tokens.back().text == ";");
  REQUIRE(sentences[1].tokens.size() == 2);
  CHECK(sentences[1].tokens.back().text == ".");  // '.' no longer splits
}

namespace {

// Random event stream over letters, whitespace, punctuation, BACKSPACE and
// SHIFT, with occasional overlap so clamping fires.
std::vector<KeystrokeEvent> random_stream(pausetag::Rng& rng) {
  static const std::vector<std::string> keys = {
      "a", "b", "c", "SPACE", "ENTER", ".", "!", "BACKSPACE", "SHIFT", ","};
  std::vector<KeystrokeEvent> events;
  std::int64_t t = 0;
  const std::size_t n = 1 + rng.below(40);
  for (std::size_t i = 0; i < n; ++i) {
    const std::string& key = keys[rng.below(keys.size())];
    const std::int64_t hold = static_cast<std::int64_t>(rng.below(300));
    events.push_back({key, t, t + hold, "u1", "s1"});
    t += static_cast<std::int64_t>(rng.below(400));  // may overlap prev release
  }
  return events;
}

// Independent linearization: apply backspaces to a flat character/whitespace
// sequence, then normalize whitespace runs to single spaces.
std::string linearized_text(const std::vector<KeystrokeEvent>& events) {
  std::string buf;
  for (const auto& ev : events) {
    if (ev.key == "BACKSPACE") {
      if (!buf.empty()) buf.pop_back();
    } else if (ev.key == "SPACE" || ev.key == "ENTER" || ev.key == "TAB") {
      buf.push_back(' ');
    } else if (ev.key.size() == 1) {
      buf.push_back(ev.key[0]);
    }
  }
  std::string out;
  for (char c : buf) {
    if (c == ' ') {
      if (!out.empty() && out.back() != ' ') out.push_back(' ');
    } else {
      out.push_back(c);
    }
  }
  while (!out.empty() && out.back() == ' ') out.pop_back();
  return out;
}

}  // namespace

TEST_CASE("tokenizer invariants over random streams") {
  pausetag::Rng rng(2024);
  for (int iter = 0; iter < 500; ++iter) {
    const auto events = random_stream(rng);
    const auto rtp = tokenize_with_pauses(events, PauseMode::ReleaseToPress);
    const auto ptp = tokenize_with_pauses(events, PauseMode::PressToPress);

    // segmentation independent of pause mode
    REQUIRE(rtp.size() == ptp.size());
    std::string joined;
    for (std::size_t s = 0; s < rtp.size(); ++s) {
      REQUIRE(rtp[s].tokens.size() == ptp[s].tokens.size());
      REQUIRE(!rtp[s].tokens.empty());
      for (std::size_t t = 0; t < rtp[s].tokens.size(); ++t) {
        CHECK(rtp[s].tokens[t].text == ptp[s].tokens[t].text);
        CHECK(rtp[s].tokens[t].pre_pause_ms >= 0);
        // post-clamp ordering of the two pause definitions
        CHECK(rtp[s].tokens[t].pre_pause_ms <= ptp[s].tokens[t].pre_pause_ms);
        if (!joined.empty()) joined.push_back(' ');
        joined += rtp[s].tokens[t].text;
      }
    }
    CHECK(joined == linearized_text(events));
  }
}
