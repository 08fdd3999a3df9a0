#include "pausetag/labelderive.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace pausetag {

namespace {

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

const std::string& bin_name(PauseBin bin) {
  static const std::string names[] = {"<m", "<m+.5", "<m+1", ">m1", "O"};
  return names[static_cast<int>(bin)];
}

UserPauseStats user_stats(const std::string& user_id,
                          const std::vector<std::int64_t>& pauses) {
  if (pauses.empty()) {
    throw std::invalid_argument("no pauses for user " + user_id);
  }
  std::vector<double> values(pauses.begin(), pauses.end());
  const double median = median_of(values);
  for (double& v : values) v = std::abs(v - median);
  const double mad = median_of(std::move(values));
  return {user_id, median, mad, pauses.size()};
}

PauseBin bin_pause(std::int64_t pause_ms, const UserPauseStats& stats,
                   bool is_punct) {
  if (is_punct) return PauseBin::Outside;
  const double p = static_cast<double>(pause_ms);
  if (p < stats.median_ms) return PauseBin::LtMedian;
  if (p < stats.median_ms + 0.5 * stats.mad_ms) return PauseBin::LtMedianHalfMad;
  if (p < stats.median_ms + stats.mad_ms) return PauseBin::LtMedianMad;
  return PauseBin::GtMedianMad;
}

std::vector<std::string> bio_encode(const std::vector<PauseBin>& bins) {
  std::vector<std::string> labels;
  labels.reserve(bins.size());
  PauseBin prev = PauseBin::Outside;
  for (const PauseBin bin : bins) {
    if (bin == PauseBin::Outside) {
      labels.push_back("O");
    } else if (bin == prev) {
      labels.push_back("I-" + bin_name(bin));
    } else {
      labels.push_back("B-" + bin_name(bin));
    }
    prev = bin;
  }
  return labels;
}

std::vector<TaggedSentence> derive_labels(
    const std::vector<PausedSentence>& sentences, const UserPauseStats& stats) {
  std::vector<TaggedSentence> tagged;
  tagged.reserve(sentences.size());
  for (const PausedSentence& sent : sentences) {
    if (sent.user_id != stats.user_id) {
      throw std::invalid_argument("sentence of user " + sent.user_id +
                                  " labeled with stats of user " +
                                  stats.user_id);
    }
    std::vector<PauseBin> bins;
    bins.reserve(sent.tokens.size());
    for (const PausedToken& tok : sent.tokens) {
      bins.push_back(bin_pause(tok.pre_pause_ms, stats, tok.is_punct));
    }
    TaggedSentence out{{}, bio_encode(bins), kKeystrokeTask};
    out.tokens.reserve(sent.tokens.size());
    for (const PausedToken& tok : sent.tokens) out.tokens.push_back(tok.text);
    tagged.push_back(std::move(out));
  }
  return tagged;
}

std::vector<std::pair<std::size_t, std::size_t>> threshold_segment(
    const PausedSentence& sentence, std::int64_t threshold_ms) {
  std::vector<std::pair<std::size_t, std::size_t>> spans;
  const std::size_t n = sentence.tokens.size();
  std::size_t start = 0;
  for (std::size_t i = 1; i < n; ++i) {
    if (sentence.tokens[i].pre_pause_ms >= threshold_ms) {
      spans.emplace_back(start, i);
      start = i;
    }
  }
  if (n > 0) spans.emplace_back(start, n);
  return spans;
}

double pause_word_length_corr(const std::vector<PausedToken>& tokens) {
  const std::size_t n = tokens.size();
  if (n < 2) {
    throw std::invalid_argument("correlation needs at least two tokens");
  }
  double mean_len = 0.0, mean_pause = 0.0;
  for (const PausedToken& tok : tokens) {
    mean_len += static_cast<double>(tok.text.size());
    mean_pause += static_cast<double>(tok.pre_pause_ms);
  }
  mean_len /= static_cast<double>(n);
  mean_pause /= static_cast<double>(n);

  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (const PausedToken& tok : tokens) {
    const double dx = static_cast<double>(tok.text.size()) - mean_len;
    const double dy = static_cast<double>(tok.pre_pause_ms) - mean_pause;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (sxx == 0.0 || syy == 0.0) {
    throw std::domain_error("undefined correlation: zero variance");
  }
  return sxy / std::sqrt(sxx * syy);
}

std::vector<HistogramRow> pause_distribution(
    const std::vector<PausedToken>& tokens,
    const std::vector<std::string>* group_tags, int n_buckets) {
  if (group_tags && group_tags->size() != tokens.size()) {
    throw std::invalid_argument("group tags not aligned with tokens");
  }
  if (tokens.empty()) return {};

  std::int64_t max_pause = 0;
  for (const PausedToken& tok : tokens) {
    max_pause = std::max(max_pause, tok.pre_pause_ms);
  }

  // Bucket 0 holds exact zeros; buckets 1..n are geometric over [1, max].
  std::vector<double> edges{0.0, 1.0};
  if (max_pause >= 1) {
    const double log_max = std::log(static_cast<double>(std::max<std::int64_t>(max_pause, 2)));
    for (int k = 1; k <= n_buckets; ++k) {
      edges.push_back(std::exp(log_max * k / n_buckets));
    }
  }

  auto bucket_of = [&](std::int64_t p) {
    const double v = static_cast<double>(p);
    for (std::size_t k = 0; k + 1 < edges.size(); ++k) {
      if (v < edges[k + 1]) return k;
    }
    return edges.size() - 2;  // closed last bucket
  };

  std::map<std::string, std::map<std::size_t, std::size_t>> counts;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const std::string group = group_tags ? (*group_tags)[i] : "all";
    counts[group][bucket_of(tokens[i].pre_pause_ms)]++;
  }

  std::vector<HistogramRow> rows;
  for (const auto& [group, buckets] : counts) {
    for (const auto& [bucket, count] : buckets) {
      rows.push_back({group, edges[bucket], edges[bucket + 1], count});
    }
  }
  return rows;
}

}  // namespace pausetag
