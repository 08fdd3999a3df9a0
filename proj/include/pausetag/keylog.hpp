#pragma once

#include <cstdint>
#include <istream>
#include <stdexcept>
#include <string>
#include <vector>

namespace pausetag {

// Which inter-key gap counts as the pre-word pause.
enum class PauseMode { ReleaseToPress, PressToPress };

PauseMode parse_pause_mode(const std::string& name);
std::string pause_mode_name(PauseMode mode);

struct KeystrokeEvent {
  std::string key;  // produced character or a named key (SPACE, BACKSPACE, ...)
  std::int64_t press_ms = 0;
  std::int64_t release_ms = 0;
  std::string user_id;
  std::string session_id;
};

// All events of one (user, session) stream, in input order.
struct KeylogStream {
  std::string user_id;
  std::string session_id;
  std::vector<KeystrokeEvent> events;
};

struct PausedToken {
  std::string text;
  std::int64_t pre_pause_ms = 0;
  bool is_punct = false;
};

struct PausedSentence {
  std::vector<PausedToken> tokens;
  std::string user_id;
};

struct TokenizerConfig {
  // Tokens made solely of these characters close the current sentence.
  std::string boundary_punct = ".!?";
};

// Thrown on malformed keylog input; message names the offending line.
struct KeylogParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Tab-separated columns: user_id, session_id, key, press_ms, release_ms.
// Lines starting with '#' are comments. Streams come back in order of first
// appearance; events within a stream must be non-decreasing in press_ms.
std::vector<KeylogStream> parse_keylog(std::istream& in);

// Gap between two consecutive events, clamped at zero.
std::int64_t compute_pause(const KeystrokeEvent& prev, const KeystrokeEvent& cur,
                           PauseMode mode);

// True iff every character of text is ASCII punctuation.
bool is_punct_token(const std::string& text);

// Reconstructs the typed token stream of one (user, session) event stream.
// SPACE/ENTER/TAB delimit tokens, BACKSPACE deletes the latest surviving
// character, other named keys produce no text but still count as the previous
// event for pause measurement.
std::vector<PausedSentence> tokenize_with_pauses(
    const std::vector<KeystrokeEvent>& events, PauseMode mode,
    const TokenizerConfig& config = {});

}  // namespace pausetag
