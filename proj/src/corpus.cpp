#include "pausetag/corpus.hpp"

#include <sstream>

namespace pausetag {

namespace {

std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> cols;
  std::istringstream iss(line);
  std::string col;
  while (iss >> col) cols.push_back(col);
  return cols;
}

}  // namespace

std::vector<TaggedSentence> read_column_corpus(std::istream& in, int token_col,
                                               int label_col,
                                               const std::string& task_id) {
  std::vector<TaggedSentence> sentences;
  TaggedSentence current{{}, {}, task_id};
  std::string line;
  std::size_t line_no = 0;
  int n_cols = -1;

  auto flush = [&] {
    if (!current.tokens.empty()) {
      sentences.push_back(std::move(current));
      current = TaggedSentence{{}, {}, task_id};
    }
  };

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) {
      flush();
      continue;
    }
    const std::vector<std::string> cols = split_ws(line);
    if (n_cols < 0) {
      n_cols = static_cast<int>(cols.size());
      if (token_col >= n_cols || label_col >= n_cols) {
        throw CorpusFormatError(
            "corpus has " + std::to_string(n_cols) +
            " columns, need token column " + std::to_string(token_col) +
            " and label column " + std::to_string(label_col) + " (line " +
            std::to_string(line_no) + ")");
      }
    }
    if (static_cast<int>(cols.size()) != n_cols) {
      throw CorpusFormatError("ragged row at line " + std::to_string(line_no) +
                              ": expected " + std::to_string(n_cols) +
                              " columns, got " + std::to_string(cols.size()));
    }
    current.tokens.push_back(cols[token_col]);
    current.labels.push_back(cols[label_col]);
  }
  flush();

  if (sentences.empty()) {
    throw CorpusFormatError("empty corpus");
  }
  return sentences;
}

void write_column_corpus(const std::vector<TaggedSentence>& sentences,
                         std::ostream& out) {
  for (const TaggedSentence& sent : sentences) {
    for (std::size_t i = 0; i < sent.tokens.size(); ++i) {
      out << sent.tokens[i] << ' ' << sent.labels[i] << '\n';
    }
    out << '\n';
  }
}

int Vocabulary::label_id(const std::string& task, const std::string& label) const {
  auto task_it = label_ids_.find(task);
  if (task_it == label_ids_.end()) {
    throw std::out_of_range("unknown task: " + task);
  }
  auto it = task_it->second.find(label);
  if (it == task_it->second.end()) {
    throw std::out_of_range("unknown label '" + label + "' for task " + task);
  }
  return it->second;
}

const std::string& Vocabulary::label_name(const std::string& task, int id) const {
  return labels(task).at(static_cast<std::size_t>(id));
}

int Vocabulary::n_labels(const std::string& task) const {
  return static_cast<int>(labels(task).size());
}

const std::vector<std::string>& Vocabulary::labels(const std::string& task) const {
  auto it = labels_.find(task);
  if (it == labels_.end()) {
    throw std::out_of_range("unknown task: " + task);
  }
  return it->second;
}

void Vocabulary::add_word(const std::string& word) {
  if (word_ids_.emplace(word, static_cast<int>(words_.size())).second) {
    words_.push_back(word);
  }
}

void Vocabulary::add_char(char c) {
  if (char_ids_.emplace(c, static_cast<int>(chars_.size())).second) {
    chars_.push_back(c);
  }
}

void Vocabulary::add_label(const std::string& task, const std::string& label) {
  auto [it, inserted] = labels_.try_emplace(task);
  if (inserted) task_order_.push_back(task);
  auto& ids = label_ids_[task];
  if (ids.emplace(label, static_cast<int>(it->second.size())).second) {
    it->second.push_back(label);
  }
}

Vocabulary build_vocab(
    const std::vector<const std::vector<TaggedSentence>*>& corpora) {
  if (corpora.empty()) {
    throw std::invalid_argument("build_vocab needs at least one corpus");
  }
  Vocabulary vocab;
  for (const auto* corpus : corpora) {
    for (const TaggedSentence& sent : *corpus) {
      for (const std::string& token : sent.tokens) {
        vocab.add_word(token);
        for (char c : token) vocab.add_char(c);
      }
      for (const std::string& label : sent.labels) {
        vocab.add_label(sent.task_id, label);
      }
    }
  }
  return vocab;
}

}  // namespace pausetag
