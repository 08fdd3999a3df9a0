#include "pausetag/tagger.hpp"

#include "pausetag/labelderive.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace pausetag {

namespace {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%a", v);  // hexfloat: exact round-trip
  return buf;
}

double parse_double(const std::string& s) {
  return std::strtod(s.c_str(), nullptr);
}

constexpr const char* kMagic = "pausetag-checkpoint";
constexpr int kVersion = 1;

}  // namespace

void ModelConfig::validate() const {
  if (d_word <= 0 || d_char <= 0 || d_hidden <= 0 || n_layers <= 0) {
    throw std::invalid_argument("model dimensions must be positive");
  }
  if (aux_output_layer < 0 || aux_output_layer > n_layers) {
    throw std::invalid_argument("aux output layer must be in [1, n_layers]");
  }
  if (epochs < 0) throw std::invalid_argument("epochs must be non-negative");
}

Model::Model(Vocabulary vocab, ModelConfig config)
    : Model(std::move(vocab), std::move(config), /*initialize=*/true) {}

Model::Model(Vocabulary vocab, ModelConfig config, bool initialize)
    : vocab_(std::move(vocab)), config_(std::move(config)) {
  config_.validate();
  if (initialize) {
    Rng rng = Rng(config_.seed).derive("init");
    word_emb_ = Param("word_emb", vocab_.n_words(), config_.d_word);
    char_emb_ = Param("char_emb", vocab_.n_chars(), config_.d_char);
    embedding_init(word_emb_, rng);
    embedding_init(char_emb_, rng);
    char_fwd_ = nn::LstmParams<double>("char_fwd", config_.d_char,
                                       config_.d_char, rng);
    char_bwd_ = nn::LstmParams<double>("char_bwd", config_.d_char,
                                       config_.d_char, rng);
    const int d_input = config_.d_word + 2 * config_.d_char;
    for (int l = 1; l <= config_.n_layers; ++l) {
      const int d_in = l == 1 ? d_input : 2 * config_.d_hidden;
      const std::string prefix = "layer" + std::to_string(l);
      layers_.emplace_back(
          nn::LstmParams<double>(prefix + ".fwd", d_in, config_.d_hidden, rng),
          nn::LstmParams<double>(prefix + ".bwd", d_in, config_.d_hidden, rng));
    }
    for (const std::string& task : vocab_.tasks()) {
      TaskHead head;
      head.task_id = task;
      head.output_layer = task == kKeystrokeTask ? config_.resolved_aux_layer()
                                                 : config_.n_layers;
      head.weight = Param("head." + task + ".weight", vocab_.n_labels(task),
                          2 * config_.d_hidden);
      head.bias = Param("head." + task + ".bias", vocab_.n_labels(task), 1);
      glorot_init(head.weight, rng);
      heads_.push_back(std::move(head));
    }
  } else {
    allocate();
  }
}

// Zero-valued parameters with the right shapes (checkpoint loading).
void Model::allocate() {
  word_emb_ = Param("word_emb", vocab_.n_words(), config_.d_word);
  char_emb_ = Param("char_emb", vocab_.n_chars(), config_.d_char);
  Rng dummy(0);
  char_fwd_ = nn::LstmParams<double>("char_fwd", config_.d_char, config_.d_char,
                                     dummy);
  char_bwd_ = nn::LstmParams<double>("char_bwd", config_.d_char, config_.d_char,
                                     dummy);
  const int d_input = config_.d_word + 2 * config_.d_char;
  for (int l = 1; l <= config_.n_layers; ++l) {
    const int d_in = l == 1 ? d_input : 2 * config_.d_hidden;
    const std::string prefix = "layer" + std::to_string(l);
    layers_.emplace_back(
        nn::LstmParams<double>(prefix + ".fwd", d_in, config_.d_hidden, dummy),
        nn::LstmParams<double>(prefix + ".bwd", d_in, config_.d_hidden, dummy));
  }
  for (const std::string& task : vocab_.tasks()) {
    TaskHead head;
    head.task_id = task;
    head.output_layer = task == kKeystrokeTask ? config_.resolved_aux_layer()
                                               : config_.n_layers;
    head.weight = Param("head." + task + ".weight", vocab_.n_labels(task),
                        2 * config_.d_hidden);
    head.bias = Param("head." + task + ".bias", vocab_.n_labels(task), 1);
    heads_.push_back(std::move(head));
  }
}

const Model::TaskHead& Model::head(const std::string& task_id) const {
  for (const TaskHead& h : heads_) {
    if (h.task_id == task_id) return h;
  }
  throw std::out_of_range("unknown task: " + task_id);
}

Model::TaskHead& Model::head(const std::string& task_id) {
  return const_cast<TaskHead&>(std::as_const(*this).head(task_id));
}

std::vector<Model::Var> Model::score_graph(Tape& tape,
                                           const std::vector<std::string>& tokens,
                                           const std::string& task_id,
                                           bool train, Rng* noise_rng) {
  TaskHead& h = head(task_id);

  std::vector<Var> inputs(tokens.size());
  for (std::size_t t = 0; t < tokens.size(); ++t) {
    const std::string& word = tokens[t];
    std::vector<int> char_ids(word.size());
    for (std::size_t i = 0; i < word.size(); ++i) {
      char_ids[i] = vocab_.char_id(word[i]);
    }
    Var chars = nn::char_encode(tape, char_fwd_, char_bwd_, char_emb_,
                                std::span<const int>(char_ids));
    Var x = tape.concat(tape.row(word_emb_, vocab_.word_id(word)), chars);
    if (train && config_.sigma > 0.0) {
      if (!noise_rng) {
        throw std::invalid_argument("train-mode forward needs a noise rng");
      }
      x = tape.add_noise(x, config_.sigma, *noise_rng);
    }
    inputs[t] = x;
  }

  std::vector<Var> layer_out;
  std::vector<Var> current = std::move(inputs);
  for (int l = 1; l <= config_.n_layers; ++l) {
    current = nn::bilstm_layer(tape, layers_[l - 1].first, layers_[l - 1].second,
                               std::span<const Var>(current));
    if (l == h.output_layer) layer_out = current;
  }

  std::vector<Var> logits(tokens.size());
  for (std::size_t t = 0; t < tokens.size(); ++t) {
    logits[t] = tape.affine(h.weight, layer_out[t], h.bias);
  }
  return logits;
}

std::vector<Eigen::VectorXd> Model::forward(const std::vector<std::string>& tokens,
                                            const std::string& task_id,
                                            bool train, Rng* noise_rng) {
  Tape tape;
  const std::vector<Var> logits =
      score_graph(tape, tokens, task_id, train, noise_rng);
  std::vector<Eigen::VectorXd> scores;
  scores.reserve(logits.size());
  for (const Var v : logits) scores.push_back(tape.val(v));
  return scores;
}

std::vector<std::string> Model::predict(const std::vector<std::string>& tokens,
                                        const std::string& task_id) {
  const std::vector<Eigen::VectorXd> scores = forward(tokens, task_id);
  std::vector<std::string> labels;
  labels.reserve(scores.size());
  for (const Eigen::VectorXd& s : scores) {
    int best = 0;
    for (int i = 1; i < s.size(); ++i) {
      if (s(i) > s(best)) best = i;  // strict: ties keep the lowest id
    }
    labels.push_back(vocab_.label_name(task_id, best));
  }
  return labels;
}

Model::Var Model::sentence_loss(Tape& tape, const TaggedSentence& sentence,
                                bool train, Rng* noise_rng) {
  if (sentence.tokens.size() != sentence.labels.size()) {
    throw std::invalid_argument("tokens and labels not aligned");
  }
  const std::vector<Var> logits =
      score_graph(tape, sentence.tokens, sentence.task_id, train, noise_rng);
  Var loss;
  for (std::size_t t = 0; t < logits.size(); ++t) {
    const int gold = vocab_.label_id(sentence.task_id, sentence.labels[t]);
    const Var term = tape.softmax_xent(logits[t], gold);
    loss = loss.valid() ? tape.add(loss, term) : term;
  }
  return loss;
}

std::vector<Model::Param*> Model::parameters() {
  std::vector<Param*> out{&word_emb_, &char_emb_};
  for (Param* p : char_fwd_.params()) out.push_back(p);
  for (Param* p : char_bwd_.params()) out.push_back(p);
  for (auto& [fwd, bwd] : layers_) {
    for (Param* p : fwd.params()) out.push_back(p);
    for (Param* p : bwd.params()) out.push_back(p);
  }
  for (TaskHead& h : heads_) {
    out.push_back(&h.weight);
    out.push_back(&h.bias);
  }
  return out;
}

std::vector<Model::Param*> Model::head_parameters(const std::string& task_id) {
  TaskHead& h = head(task_id);
  return {&h.weight, &h.bias};
}

void Model::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
  out << kMagic << ' ' << kVersion << '\n';
  out << "config d_word " << config_.d_word << '\n';
  out << "config d_char " << config_.d_char << '\n';
  out << "config d_hidden " << config_.d_hidden << '\n';
  out << "config n_layers " << config_.n_layers << '\n';
  out << "config sigma " << format_double(config_.sigma) << '\n';
  out << "config lr " << format_double(config_.lr) << '\n';
  out << "config epochs " << config_.epochs << '\n';
  out << "config seed " << config_.seed << '\n';
  out << "config aux_output_layer " << config_.aux_output_layer << '\n';
  out << "config iid_sampling " << (config_.iid_sampling ? 1 : 0) << '\n';
  out << "config pause_mode " << pause_mode_name(config_.pause_mode) << '\n';

  out << "words " << vocab_.n_words() << '\n';
  for (int i = 1; i < vocab_.n_words(); ++i) {
    out << vocab_.words()[i] << '\n';  // id 0 is the implicit UNK
  }
  out << "chars " << vocab_.n_chars() << '\n';
  for (int i = 1; i < vocab_.n_chars(); ++i) {
    out << static_cast<int>(static_cast<unsigned char>(vocab_.chars()[i]))
        << '\n';
  }
  out << "tasks " << vocab_.tasks().size() << '\n';
  for (const std::string& task : vocab_.tasks()) {
    out << "task " << task << ' ' << vocab_.n_labels(task) << '\n';
    for (const std::string& label : vocab_.labels(task)) out << label << '\n';
  }

  auto& self = const_cast<Model&>(*this);
  for (const Param* p : self.parameters()) {
    out << "tensor " << p->name << ' ' << p->value.rows() << ' '
        << p->value.cols() << '\n';
    for (Eigen::Index i = 0; i < p->value.rows(); ++i) {
      for (Eigen::Index j = 0; j < p->value.cols(); ++j) {
        if (j) out << ' ';
        out << format_double(p->value(i, j));
      }
      out << '\n';
    }
  }
  out << "end\n";
  if (!out) throw std::runtime_error("write failed: " + path);
}

Model Model::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read checkpoint: " + path);

  std::string magic;
  int version = -1;
  in >> magic >> version;
  if (magic != kMagic || version != kVersion) {
    throw std::runtime_error("unsupported checkpoint version in " + path);
  }

  ModelConfig config;
  std::string word;
  while (in >> word && word == "config") {
    std::string key, value;
    in >> key >> value;
    if (key == "d_word") config.d_word = std::stoi(value);
    else if (key == "d_char") config.d_char = std::stoi(value);
    else if (key == "d_hidden") config.d_hidden = std::stoi(value);
    else if (key == "n_layers") config.n_layers = std::stoi(value);
    else if (key == "sigma") config.sigma = parse_double(value);
    else if (key == "lr") config.lr = parse_double(value);
    else if (key == "epochs") config.epochs = std::stoi(value);
    else if (key == "seed") config.seed = std::stoull(value);
    else if (key == "aux_output_layer") config.aux_output_layer = std::stoi(value);
    else if (key == "iid_sampling") config.iid_sampling = value == "1";
    else if (key == "pause_mode") config.pause_mode = parse_pause_mode(value);
    else throw std::runtime_error("unknown config key: " + key);
  }

  Vocabulary vocab;
  if (word != "words") throw std::runtime_error("malformed checkpoint: " + path);
  int n_words = 0;
  in >> n_words;
  in.ignore();
  for (int i = 1; i < n_words; ++i) {
    std::string w;
    std::getline(in, w);
    vocab.add_word(w);
  }
  in >> word;
  if (word != "chars") throw std::runtime_error("malformed checkpoint: " + path);
  int n_chars = 0;
  in >> n_chars;
  for (int i = 1; i < n_chars; ++i) {
    int c = 0;
    in >> c;
    vocab.add_char(static_cast<char>(static_cast<unsigned char>(c)));
  }
  in >> word;
  if (word != "tasks") throw std::runtime_error("malformed checkpoint: " + path);
  std::size_t n_tasks = 0;
  in >> n_tasks;
  for (std::size_t t = 0; t < n_tasks; ++t) {
    std::string kw, task;
    int n_labels = 0;
    in >> kw >> task >> n_labels;
    if (kw != "task") throw std::runtime_error("malformed checkpoint: " + path);
    in.ignore();
    for (int i = 0; i < n_labels; ++i) {
      std::string label;
      std::getline(in, label);
      vocab.add_label(task, label);
    }
  }

  Model model(std::move(vocab), std::move(config), /*initialize=*/false);
  std::map<std::string, Param*> by_name;
  for (Param* p : model.parameters()) by_name[p->name] = p;

  while (in >> word && word == "tensor") {
    std::string name;
    Eigen::Index rows = 0, cols = 0;
    in >> name >> rows >> cols;
    auto it = by_name.find(name);
    if (it == by_name.end()) {
      throw std::runtime_error("unexpected tensor in checkpoint: " + name);
    }
    Param* p = it->second;
    if (p->value.rows() != rows || p->value.cols() != cols) {
      throw std::runtime_error("tensor shape mismatch for " + name);
    }
    for (Eigen::Index i = 0; i < rows; ++i) {
      for (Eigen::Index j = 0; j < cols; ++j) {
        std::string v;
        in >> v;
        p->value(i, j) = parse_double(v);
      }
    }
  }
  if (word != "end") {
    throw std::runtime_error("truncated checkpoint: " + path);
  }
  return model;
}

std::vector<std::pair<int, int>> epoch_schedule(
    const std::vector<std::size_t>& corpus_sizes, Rng& rng, bool iid) {
  std::size_t total = 0;
  for (std::size_t n : corpus_sizes) total += n;
  std::vector<std::pair<int, int>> schedule;
  schedule.reserve(total);
  if (iid) {
    for (std::size_t s = 0; s < total; ++s) {
      const int t = static_cast<int>(rng.below(corpus_sizes.size()));
      if (corpus_sizes[t] == 0) {
        --s;  // resample empty task
        continue;
      }
      schedule.emplace_back(t, static_cast<int>(rng.below(corpus_sizes[t])));
    }
  } else {
    for (std::size_t t = 0; t < corpus_sizes.size(); ++t) {
      for (std::size_t i = 0; i < corpus_sizes[t]; ++i) {
        schedule.emplace_back(static_cast<int>(t), static_cast<int>(i));
      }
    }
    rng.shuffle(schedule);
  }
  return schedule;
}

std::vector<LossLogEntry> train(
    Model& model,
    const std::map<std::string, std::vector<TaggedSentence>>& corpora,
    const std::string& main_task) {
  auto main_it = corpora.find(main_task);
  if (main_it == corpora.end() || main_it->second.empty()) {
    throw std::invalid_argument("main task corpus '" + main_task +
                                "' is empty");
  }

  std::vector<std::string> task_names;
  std::vector<const std::vector<TaggedSentence>*> task_corpora;
  std::vector<std::size_t> sizes;
  for (const auto& [task, sentences] : corpora) {
    task_names.push_back(task);
    task_corpora.push_back(&sentences);
    sizes.push_back(sentences.size());
  }

  const ModelConfig& cfg = model.config();
  Rng root(cfg.seed);
  Rng schedule_rng = root.derive("schedule");
  Rng noise_rng = root.derive("noise");

  const std::vector<Model::Param*> params = model.parameters();
  std::vector<LossLogEntry> log;

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::vector<double> loss_sum(task_names.size(), 0.0);
    std::vector<std::size_t> loss_count(task_names.size(), 0);

    for (const auto& [t, i] : epoch_schedule(sizes, schedule_rng, cfg.iid_sampling)) {
      Model::Tape tape;
      const Model::Var loss =
          model.sentence_loss(tape, (*task_corpora[t])[i], /*train=*/true,
                              &noise_rng);
      tape.backward(loss);
      loss_sum[t] += tape.val(loss)(0);
      loss_count[t] += 1;
      nn::sgd_update<double>(std::span<Model::Param* const>(params), cfg.lr);
    }

    for (std::size_t t = 0; t < task_names.size(); ++t) {
      if (loss_count[t] == 0) continue;
      log.push_back({epoch, task_names[t],
                     loss_sum[t] / static_cast<double>(loss_count[t])});
    }
  }
  return log;
}

void write_loss_log(const std::vector<LossLogEntry>& log, std::ostream& out) {
  out << "epoch\ttask\tmean_loss\n";
  char buf[32];
  for (const LossLogEntry& e : log) {
    std::snprintf(buf, sizeof(buf), "%.6f", e.mean_loss);
    out << e.epoch << '\t' << e.task << '\t' << buf << '\n';
  }
}

}  // namespace pausetag
