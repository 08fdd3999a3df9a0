#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "pausetag/corpus.hpp"
#include "pausetag/keylog.hpp"

namespace pausetag {

// Task id carried by auto-derived auxiliary corpora.
inline constexpr const char* kKeystrokeTask = "keystroke";

struct UserPauseStats {
  std::string user_id;
  double median_ms = 0.0;
  double mad_ms = 0.0;  // raw MAD, no consistency scaling
  std::size_t n_pauses = 0;
};

enum class PauseBin {
  LtMedian,         // <m
  LtMedianHalfMad,  // <m+.5
  LtMedianMad,      // <m+1
  GtMedianMad,      // >m1
  Outside,          // O (punctuation)
};

const std::string& bin_name(PauseBin bin);

// Median and raw MAD of one user's pooled non-punctuation pauses.
UserPauseStats user_stats(const std::string& user_id,
                          const std::vector<std::int64_t>& pauses);

PauseBin bin_pause(std::int64_t pause_ms, const UserPauseStats& stats,
                   bool is_punct);

// BIO labels over bins: B on a new segment (start, after O, or bin change),
// I on continuation, O stays O.
std::vector<std::string> bio_encode(const std::vector<PauseBin>& bins);

// bin_pause then bio_encode per sentence; output aligned 1:1 with tokens.
std::vector<TaggedSentence> derive_labels(
    const std::vector<PausedSentence>& sentences, const UserPauseStats& stats);

// Half-open [start, end) token spans; a new span starts at token 0 and at
// every token with pre_pause_ms >= threshold.
std::vector<std::pair<std::size_t, std::size_t>> threshold_segment(
    const PausedSentence& sentence, std::int64_t threshold_ms);

// Pearson correlation between token length (characters) and pre-word pause.
// Throws if either variable has zero variance.
double pause_word_length_corr(const std::vector<PausedToken>& tokens);

struct HistogramRow {
  std::string group;
  double lo = 0.0;  // bucket [lo, hi); last bucket closed
  double hi = 0.0;
  std::size_t count = 0;
};

// Pause histogram with a dedicated zero bucket plus n_buckets log-spaced
// buckets over [1, max pause]. Optional per-token group tags (e.g. POS).
std::vector<HistogramRow> pause_distribution(
    const std::vector<PausedToken>& tokens,
    const std::vector<std::string>* group_tags = nullptr, int n_buckets = 20);

}  // namespace pausetag
