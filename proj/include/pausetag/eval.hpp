#pragma once

#include <cstdint>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "pausetag/corpus.hpp"

namespace pausetag {

// Inclusive token span of one chunk.
struct ChunkSpan {
  std::string type;
  int start = 0;
  int end = 0;
  auto operator<=>(const ChunkSpan&) const = default;
};

struct TypeCounts {
  std::int64_t gold = 0;
  std::int64_t predicted = 0;
  std::int64_t correct = 0;
};

struct ChunkScore {
  TypeCounts overall;
  std::map<std::string, TypeCounts> per_type;

  double precision() const;  // percentages
  double recall() const;
  double f1() const;
  static double precision(const TypeCounts& c);
  static double recall(const TypeCounts& c);
  static double f1(const TypeCounts& c);
};

// Chunk extraction with conlleval semantics, tolerant of ill-formed BIO:
// a chunk starts at B-X, or at I-X following O, a different type, or sentence
// start; it ends before O, before B-*, before I-Y of another type, or at
// sentence end.
std::vector<ChunkSpan> extract_chunks(const std::vector<std::string>& labels);

using LabelCorpus = std::vector<std::vector<std::string>>;

ChunkScore chunk_f1(const LabelCorpus& gold, const LabelCorpus& pred);

// Exact-match token accuracy, as a percentage.
double tag_accuracy(const LabelCorpus& gold, const LabelCorpus& pred);

// Tab-separated per-label table plus overall line:
// label, precision, recall, F1, gold_count, pred_count, correct_count.
void write_chunk_report(const ChunkScore& score, std::ostream& out,
                        bool per_label);

enum class Metric { ChunkF1, Accuracy };

Metric parse_metric(const std::string& name);
double compute_metric(Metric metric, const LabelCorpus& gold,
                      const LabelCorpus& pred);

struct SigResult {
  double observed = 0.0;
  int iterations = 0;
  int exceed = 0;     // r: iterations with |shuffled diff| >= observed
  double p_value = 0.0;  // (r + 1) / (i + 1)
};

// Per-iteration |metric(a') - metric(b')| after swapping each sentence's
// outputs between the systems with probability 1/2.
std::vector<double> randomization_diffs(const LabelCorpus& gold,
                                        const LabelCorpus& sys_a,
                                        const LabelCorpus& sys_b, Metric metric,
                                        int iterations, std::uint64_t seed);

// Approximate randomization significance test over sentence-level swaps.
SigResult approx_randomization(const LabelCorpus& gold, const LabelCorpus& sys_a,
                               const LabelCorpus& sys_b, Metric metric,
                               int iterations, std::uint64_t seed);

}  // namespace pausetag
