#include "pausetag/keylog.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <map>
#include <sstream>

namespace pausetag {

namespace {

bool is_whitespace_key(const std::string& key) {
  return key == "SPACE" || key == "ENTER" || key == "TAB";
}

// Named keys other than the whitespace set and BACKSPACE (SHIFT, CTRL, ...)
// produce no text.
bool is_silent_key(const std::string& key) {
  return key.size() > 1 && !is_whitespace_key(key) && key != "BACKSPACE";
}

std::int64_t parse_ms(const std::string& field, std::size_t line_no,
                      const char* what) {
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc{} || ptr != field.data() + field.size()) {
    throw KeylogParseError("non-integer " + std::string(what) + " at line " +
                           std::to_string(line_no));
  }
  return v;
}

}  // namespace

PauseMode parse_pause_mode(const std::string& name) {
  if (name == "release-to-press") return PauseMode::ReleaseToPress;
  if (name == "press-to-press") return PauseMode::PressToPress;
  throw std::invalid_argument("unknown pause mode: " + name);
}

std::string pause_mode_name(PauseMode mode) {
  return mode == PauseMode::ReleaseToPress ? "release-to-press"
                                           : "press-to-press";
}

std::vector<KeylogStream> parse_keylog(std::istream& in) {
  std::vector<KeylogStream> streams;
  std::map<std::pair<std::string, std::string>, std::size_t> index;

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;

    std::vector<std::string> cols;
    std::size_t start = 0;
    while (true) {
      const std::size_t tab = line.find('\t', start);
      cols.push_back(line.substr(start, tab - start));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    if (cols.size() != 5) {
      throw KeylogParseError("expected 5 tab-separated columns at line " +
                             std::to_string(line_no));
    }

    KeystrokeEvent ev;
    ev.user_id = cols[0];
    ev.session_id = cols[1];
    ev.key = cols[2];
    ev.press_ms = parse_ms(cols[3], line_no, "press time");
    ev.release_ms = parse_ms(cols[4], line_no, "release time");
    if (ev.key.empty()) {
      throw KeylogParseError("empty key at line " + std::to_string(line_no));
    }
    if (ev.release_ms < ev.press_ms) {
      throw KeylogParseError("release before press at line " +
                             std::to_string(line_no));
    }

    const auto key = std::make_pair(ev.user_id, ev.session_id);
    auto it = index.find(key);
    if (it == index.end()) {
      it = index.emplace(key, streams.size()).first;
      streams.push_back({ev.user_id, ev.session_id, {}});
    }
    KeylogStream& stream = streams[it->second];
    if (!stream.events.empty() && ev.press_ms < stream.events.back().press_ms) {
      throw KeylogParseError("out-of-order event at line " +
                             std::to_string(line_no));
    }
    stream.events.push_back(std::move(ev));
  }
  return streams;
}

std::int64_t compute_pause(const KeystrokeEvent& prev, const KeystrokeEvent& cur,
                           PauseMode mode) {
  const std::int64_t ref =
      mode == PauseMode::ReleaseToPress ? prev.release_ms : prev.press_ms;
  return std::max<std::int64_t>(0, cur.press_ms - ref);
}

bool is_punct_token(const std::string& text) {
  if (text.empty()) return false;
  return std::all_of(text.begin(), text.end(), [](unsigned char c) {
    return std::ispunct(c) != 0;
  });
}

std::vector<PausedSentence> tokenize_with_pauses(
    const std::vector<KeystrokeEvent>& events, PauseMode mode,
    const TokenizerConfig& config) {
  // Reconstruction buffer entry: one produced character or whitespace break,
  // remembering which physical event produced it.
  struct Entry {
    char ch;  // '\0' marks a whitespace break
    std::size_t event_idx;
  };
  std::vector<Entry> buffer;

  for (std::size_t i = 0; i < events.size(); ++i) {
    const std::string& key = events[i].key;
    if (key == "BACKSPACE") {
      if (!buffer.empty()) buffer.pop_back();
    } else if (is_whitespace_key(key)) {
      buffer.push_back({'\0', i});
    } else if (!is_silent_key(key)) {
      buffer.push_back({key[0], i});
    }
  }

  const std::string user =
      events.empty() ? std::string() : events.front().user_id;

  auto is_boundary = [&](const std::string& text) {
    return !text.empty() &&
           std::all_of(text.begin(), text.end(), [&](char c) {
             return config.boundary_punct.find(c) != std::string::npos;
           });
  };

  std::vector<PausedSentence> sentences;
  PausedSentence current{{}, user};

  std::size_t pos = 0;
  bool first_token = true;
  while (pos < buffer.size()) {
    while (pos < buffer.size() && buffer[pos].ch == '\0') ++pos;
    if (pos >= buffer.size()) break;

    const std::size_t first_event = buffer[pos].event_idx;
    std::string text;
    while (pos < buffer.size() && buffer[pos].ch != '\0') {
      text.push_back(buffer[pos].ch);
      ++pos;
    }

    PausedToken token;
    token.text = std::move(text);
    token.is_punct = is_punct_token(token.text);
    if (first_token) {
      token.pre_pause_ms = 0;  // session start: no preceding event
    } else {
      // Pause is measured from the physical event immediately preceding the
      // token's first surviving character key, whatever its kind.
      token.pre_pause_ms =
          compute_pause(events[first_event - 1], events[first_event], mode);
    }
    first_token = false;

    const bool closes = is_boundary(token.text);
    current.tokens.push_back(std::move(token));
    if (closes) {
      sentences.push_back(std::move(current));
      current = PausedSentence{{}, user};
    }
  }
  if (!current.tokens.empty()) sentences.push_back(std::move(current));
  return sentences;
}

}  // namespace pausetag
