#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "pausetag/corpus.hpp"
#include "pausetag/keylog.hpp"
#include "pausetag/nnet.hpp"

namespace pausetag {

struct ModelConfig {
  int d_word = 64;
  int d_char = 100;
  int d_hidden = 100;
  int n_layers = 3;
  double sigma = 0.2;
  double lr = 0.1;
  int epochs = 30;
  std::uint64_t seed = 42;
  // Layer whose per-position outputs feed the keystroke task head; 0 means
  // the topmost layer (same as the main task).
  int aux_output_layer = 0;
  // True i.i.d. (task, instance) draws instead of a shuffled interleaving.
  bool iid_sampling = false;
  PauseMode pause_mode = PauseMode::ReleaseToPress;

  int resolved_aux_layer() const {
    return aux_output_layer == 0 ? n_layers : aux_output_layer;
  }
  void validate() const;
};

// Hierarchical multi-task tagger: char bi-LSTM + word embeddings feeding
// stacked context bi-LSTM layers shared across tasks, one softmax head per
// task.
class Model {
 public:
  using Tape = nn::Tape<double>;
  using Var = Tape::Var;
  using Param = nn::Parameter<double>;

  Model(Vocabulary vocab, ModelConfig config);

  // Builds per-token logit vars on the tape. Train mode adds Gaussian input
  // noise drawn from noise_rng.
  std::vector<Var> score_graph(Tape& tape, const std::vector<std::string>& tokens,
                               const std::string& task_id, bool train,
                               Rng* noise_rng);

  // Per-token score vectors over the task's labels. Deterministic in infer
  // mode (train == false).
  std::vector<Eigen::VectorXd> forward(const std::vector<std::string>& tokens,
                                       const std::string& task_id,
                                       bool train = false,
                                       Rng* noise_rng = nullptr);

  // Greedy per-token argmax; ties broken by lowest label id.
  std::vector<std::string> predict(const std::vector<std::string>& tokens,
                                   const std::string& task_id);

  // Sum of per-token cross-entropy for one sentence.
  Var sentence_loss(Tape& tape, const TaggedSentence& sentence, bool train,
                    Rng* noise_rng);

  std::vector<Param*> parameters();
  std::vector<Param*> head_parameters(const std::string& task_id);

  const Vocabulary& vocab() const { return vocab_; }
  const ModelConfig& config() const { return config_; }

  void save(const std::string& path) const;
  static Model load(const std::string& path);

 private:
  struct TaskHead {
    std::string task_id;
    int output_layer;  // 1-based context layer feeding this head
    Param weight, bias;
  };

  Model(Vocabulary vocab, ModelConfig config, bool initialize);
  void allocate();
  const TaskHead& head(const std::string& task_id) const;
  TaskHead& head(const std::string& task_id);

  Vocabulary vocab_;
  ModelConfig config_;
  Param word_emb_, char_emb_;
  nn::LstmParams<double> char_fwd_, char_bwd_;
  std::vector<std::pair<nn::LstmParams<double>, nn::LstmParams<double>>> layers_;
  std::vector<TaskHead> heads_;
};

struct LossLogEntry {
  int epoch = 0;  // 1-based
  std::string task;
  double mean_loss = 0.0;
};

// One epoch visits every instance of every task exactly once: a uniformly
// shuffled interleaving of the pooled (task, instance) multiset. With iid
// set, draws N independent (task-uniform, then instance-uniform) samples
// instead.
std::vector<std::pair<int, int>> epoch_schedule(
    const std::vector<std::size_t>& corpus_sizes, Rng& rng, bool iid);

// Multi-task SGD training; corpora maps task_id to its training sentences.
std::vector<LossLogEntry> train(
    Model& model, const std::map<std::string, std::vector<TaggedSentence>>& corpora,
    const std::string& main_task);

void write_loss_log(const std::vector<LossLogEntry>& log, std::ostream& out);

}  // namespace pausetag
