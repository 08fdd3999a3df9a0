#include "pausetag/eval.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "pausetag/rng.hpp"

namespace pausetag {

namespace {

void check_aligned(const LabelCorpus& a, const LabelCorpus& b,
                   const char* what) {
  if (a.size() != b.size()) {
    throw std::invalid_argument(std::string(what) +
                                ": sentence counts differ");
  }
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].size() != b[i].size()) {
      throw std::invalid_argument(std::string(what) +
                                  ": token counts differ at sentence " +
                                  std::to_string(i));
    }
  }
}

// B/I/O split of one label; anything not B-/I- counts as O-like.
struct Tag {
  char prefix;  // 'B', 'I', or 'O'
  std::string type;
};

Tag parse_tag(const std::string& label) {
  if (label.size() >= 2 && (label[0] == 'B' || label[0] == 'I') &&
      label[1] == '-') {
    return {label[0], label.substr(2)};
  }
  return {'O', ""};
}

double pct(std::int64_t num, std::int64_t den) {
  return den == 0 ? 0.0 : 100.0 * static_cast<double>(num) /
                              static_cast<double>(den);
}

}  // namespace

double ChunkScore::precision(const TypeCounts& c) {
  return pct(c.correct, c.predicted);
}
double ChunkScore::recall(const TypeCounts& c) { return pct(c.correct, c.gold); }
double ChunkScore::f1(const TypeCounts& c) {
  const double p = precision(c), r = recall(c);
  return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
}
double ChunkScore::precision() const { return precision(overall); }
double ChunkScore::recall() const { return recall(overall); }
double ChunkScore::f1() const { return f1(overall); }

std::vector<ChunkSpan> extract_chunks(const std::vector<std::string>& labels) {
  std::vector<ChunkSpan> chunks;
  bool in_chunk = false;
  ChunkSpan current;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const Tag tag = parse_tag(labels[i]);
    const bool continues =
        in_chunk && tag.prefix == 'I' && tag.type == current.type;
    if (in_chunk && !continues) {
      current.end = static_cast<int>(i) - 1;
      chunks.push_back(current);
      in_chunk = false;
    }
    if (!continues && tag.prefix != 'O') {
      current = {tag.type, static_cast<int>(i), 0};
      in_chunk = true;
    }
  }
  if (in_chunk) {
    current.end = static_cast<int>(labels.size()) - 1;
    chunks.push_back(current);
  }
  return chunks;
}

ChunkScore chunk_f1(const LabelCorpus& gold, const LabelCorpus& pred) {
  check_aligned(gold, pred, "chunk_f1");
  ChunkScore score;
  for (std::size_t s = 0; s < gold.size(); ++s) {
    const std::vector<ChunkSpan> g = extract_chunks(gold[s]);
    const std::vector<ChunkSpan> p = extract_chunks(pred[s]);
    for (const ChunkSpan& c : g) {
      score.overall.gold++;
      score.per_type[c.type].gold++;
    }
    for (const ChunkSpan& c : p) {
      score.overall.predicted++;
      score.per_type[c.type].predicted++;
    }
    // Spans are ordered and disjoint: a merge walk finds exact matches.
    std::size_t i = 0, j = 0;
    while (i < g.size() && j < p.size()) {
      if (g[i] == p[j]) {
        score.overall.correct++;
        score.per_type[g[i].type].correct++;
        ++i;
        ++j;
      } else if (g[i].start < p[j].start ||
                 (g[i].start == p[j].start && g[i] < p[j])) {
        ++i;
      } else {
        ++j;
      }
    }
  }
  return score;
}

double tag_accuracy(const LabelCorpus& gold, const LabelCorpus& pred) {
  check_aligned(gold, pred, "tag_accuracy");
  std::int64_t total = 0, correct = 0;
  for (std::size_t s = 0; s < gold.size(); ++s) {
    for (std::size_t t = 0; t < gold[s].size(); ++t) {
      ++total;
      if (gold[s][t] == pred[s][t]) ++correct;
    }
  }
  if (total == 0) throw std::invalid_argument("tag_accuracy: empty corpus");
  return pct(correct, total);
}

void write_chunk_report(const ChunkScore& score, std::ostream& out,
                        bool per_label) {
  char buf[160];
  auto row = [&](const std::string& label, const TypeCounts& c) {
    std::snprintf(buf, sizeof(buf), "%s\t%.2f\t%.2f\t%.2f\t%lld\t%lld\t%lld\n",
                  label.c_str(), ChunkScore::precision(c), ChunkScore::recall(c),
                  ChunkScore::f1(c), static_cast<long long>(c.gold),
                  static_cast<long long>(c.predicted),
                  static_cast<long long>(c.correct));
    out << buf;
  };
  out << "label\tprecision\trecall\tf1\tgold\tpredicted\tcorrect\n";
  if (per_label) {
    for (const auto& [type, counts] : score.per_type) row(type, counts);
  }
  row("OVERALL", score.overall);
}

Metric parse_metric(const std::string& name) {
  if (name == "chunk") return Metric::ChunkF1;
  if (name == "acc") return Metric::Accuracy;
  throw std::invalid_argument("unknown metric: " + name);
}

double compute_metric(Metric metric, const LabelCorpus& gold,
                      const LabelCorpus& pred) {
  return metric == Metric::ChunkF1 ? chunk_f1(gold, pred).f1()
                                   : tag_accuracy(gold, pred);
}

std::vector<double> randomization_diffs(const LabelCorpus& gold,
                                        const LabelCorpus& sys_a,
                                        const LabelCorpus& sys_b, Metric metric,
                                        int iterations, std::uint64_t seed) {
  check_aligned(gold, sys_a, "randomization");
  check_aligned(gold, sys_b, "randomization");
  Rng rng = Rng(seed).derive("sigtest");
  std::vector<double> diffs;
  diffs.reserve(iterations);
  LabelCorpus a = sys_a, b = sys_b;
  for (int it = 0; it < iterations; ++it) {
    for (std::size_t s = 0; s < gold.size(); ++s) {
      if (rng.bernoulli(0.5)) {
        a[s] = sys_b[s];
        b[s] = sys_a[s];
      } else {
        a[s] = sys_a[s];
        b[s] = sys_b[s];
      }
    }
    diffs.push_back(std::abs(compute_metric(metric, gold, a) -
                             compute_metric(metric, gold, b)));
  }
  return diffs;
}

SigResult approx_randomization(const LabelCorpus& gold, const LabelCorpus& sys_a,
                               const LabelCorpus& sys_b, Metric metric,
                               int iterations, std::uint64_t seed) {
  SigResult result;
  result.observed = std::abs(compute_metric(metric, gold, sys_a) -
                             compute_metric(metric, gold, sys_b));
  result.iterations = iterations;
  for (double d : randomization_diffs(gold, sys_a, sys_b, metric, iterations,
                                      seed)) {
    if (d >= result.observed) result.exceed++;
  }
  result.p_value = static_cast<double>(result.exceed + 1) /
                   static_cast<double>(iterations + 1);
  return result;
}

}  // namespace pausetag
