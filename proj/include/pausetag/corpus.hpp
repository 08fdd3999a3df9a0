#pragma once

#include <istream>
#include <map>
#include <ostream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace pausetag {

struct TaggedSentence {
  std::vector<std::string> tokens;
  std::vector<std::string> labels;  // aligned 1:1 with tokens
  std::string task_id;
};

struct CorpusFormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// One token per line, whitespace-separated columns, blank line ends a
// sentence. Column count is fixed by the first data line.
std::vector<TaggedSentence> read_column_corpus(std::istream& in, int token_col,
                                               int label_col,
                                               const std::string& task_id);

// Two columns, token and label, blank line between sentences. Reading the
// output back with token_col=0, label_col=1 is the identity.
void write_column_corpus(const std::vector<TaggedSentence>& sentences,
                         std::ostream& out);

// Frozen id maps over words, characters, and per-task label inventories.
// Word and char lookups fall back to a reserved UNK id; ids are dense from 0
// in first-occurrence order.
class Vocabulary {
 public:
  static constexpr int kUnkId = 0;

  int word_id(const std::string& word) const {
    auto it = word_ids_.find(word);
    return it == word_ids_.end() ? kUnkId : it->second;
  }
  int char_id(char c) const {
    auto it = char_ids_.find(c);
    return it == char_ids_.end() ? kUnkId : it->second;
  }
  int label_id(const std::string& task, const std::string& label) const;
  const std::string& label_name(const std::string& task, int id) const;

  int n_words() const { return static_cast<int>(words_.size()); }
  int n_chars() const { return static_cast<int>(chars_.size()); }
  int n_labels(const std::string& task) const;

  const std::vector<std::string>& words() const { return words_; }
  const std::vector<char>& chars() const { return chars_; }
  const std::vector<std::string>& tasks() const { return task_order_; }
  const std::vector<std::string>& labels(const std::string& task) const;

  // Construction; maps are frozen once build_vocab returns.
  void add_word(const std::string& word);
  void add_char(char c);
  void add_label(const std::string& task, const std::string& label);

 private:
  std::vector<std::string> words_{"<unk>"};
  std::unordered_map<std::string, int> word_ids_{{"<unk>", 0}};
  std::vector<char> chars_{'\0'};  // id 0 is char UNK
  std::unordered_map<char, int> char_ids_{{'\0', 0}};
  std::vector<std::string> task_order_;
  std::map<std::string, std::vector<std::string>> labels_;
  std::map<std::string, std::unordered_map<std::string, int>> label_ids_;
};

// Union vocabulary over the training corpora of all tasks.
Vocabulary build_vocab(
    const std::vector<const std::vector<TaggedSentence>*>& corpora);

}  // namespace pausetag
