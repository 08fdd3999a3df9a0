#include <CLI11.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "pausetag/corpus.hpp"
#include "pausetag/eval.hpp"
#include "pausetag/keylog.hpp"
#include "pausetag/labelderive.hpp"
#include "pausetag/manifest.hpp"
#include "pausetag/tagger.hpp"

namespace fs = std::filesystem;
using namespace pausetag;

namespace {

struct Timer {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double ms() const {
    return std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now() - start)
        .count();
  }
};

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return in;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  return out;
}

// key = value lines, '#' comments.
std::map<std::string, std::string> read_config_file(const std::string& path) {
  std::map<std::string, std::string> kv;
  std::ifstream in = open_input(path);
  std::string line;
  while (std::getline(in, line)) {
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t");
      const auto e = s.find_last_not_of(" \t");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return kv;
}

void apply_config(ModelConfig& cfg, const std::map<std::string, std::string>& kv) {
  for (const auto& [key, value] : kv) {
    if (key == "d_word") cfg.d_word = std::stoi(value);
    else if (key == "d_char") cfg.d_char = std::stoi(value);
    else if (key == "d_hidden") cfg.d_hidden = std::stoi(value);
    else if (key == "n_layers") cfg.n_layers = std::stoi(value);
    else if (key == "sigma") cfg.sigma = std::stod(value);
    else if (key == "lr") cfg.lr = std::stod(value);
    else if (key == "epochs") cfg.epochs = std::stoi(value);
    else if (key == "seed") cfg.seed = std::stoull(value);
    else if (key == "aux_output_layer") cfg.aux_output_layer = std::stoi(value);
    else if (key == "iid_sampling") cfg.iid_sampling = value == "1" || value == "true";
    else if (key == "pause_mode") cfg.pause_mode = parse_pause_mode(value);
    else throw std::runtime_error("unknown config key: " + key);
  }
}

std::map<std::string, std::string> config_as_map(const ModelConfig& cfg) {
  std::map<std::string, std::string> m;
  m["d_word"] = std::to_string(cfg.d_word);
  m["d_char"] = std::to_string(cfg.d_char);
  m["d_hidden"] = std::to_string(cfg.d_hidden);
  m["n_layers"] = std::to_string(cfg.n_layers);
  m["sigma"] = std::to_string(cfg.sigma);
  m["lr"] = std::to_string(cfg.lr);
  m["epochs"] = std::to_string(cfg.epochs);
  m["seed"] = std::to_string(cfg.seed);
  m["aux_output_layer"] = std::to_string(cfg.aux_output_layer);
  m["iid_sampling"] = cfg.iid_sampling ? "1" : "0";
  m["pause_mode"] = pause_mode_name(cfg.pause_mode);
  return m;
}

int first_line_columns(const std::string& path) {
  std::ifstream in = open_input(path);
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream iss(line);
    std::string col;
    int n = 0;
    while (iss >> col) ++n;
    return n;
  }
  throw CorpusFormatError("empty corpus: " + path);
}

// Labels from the last column, tokens from the first.
LabelCorpus read_labels(const std::string& path) {
  const int n_cols = first_line_columns(path);
  std::ifstream in = open_input(path);
  const auto sentences = read_column_corpus(in, 0, n_cols - 1, "eval");
  LabelCorpus labels;
  labels.reserve(sentences.size());
  for (const auto& s : sentences) labels.push_back(s.labels);
  return labels;
}

// Tokenized keylog per user, sentences pooled across sessions in stream
// order, streams sorted by (user, session).
std::map<std::string, std::vector<PausedSentence>> sentences_by_user(
    std::vector<KeylogStream> streams, PauseMode mode,
    const TokenizerConfig& tok_config) {
  std::sort(streams.begin(), streams.end(),
            [](const KeylogStream& a, const KeylogStream& b) {
              return std::tie(a.user_id, a.session_id) <
                     std::tie(b.user_id, b.session_id);
            });
  std::map<std::string, std::vector<PausedSentence>> by_user;
  for (const KeylogStream& stream : streams) {
    auto sentences = tokenize_with_pauses(stream.events, mode, tok_config);
    auto& dst = by_user[stream.user_id];
    dst.insert(dst.end(), std::make_move_iterator(sentences.begin()),
               std::make_move_iterator(sentences.end()));
  }
  if (by_user.empty()) throw std::runtime_error("keylog contains no events");
  return by_user;
}

std::vector<std::int64_t> pooled_pauses(
    const std::vector<PausedSentence>& sentences) {
  std::vector<std::int64_t> pauses;
  for (const PausedSentence& s : sentences) {
    for (const PausedToken& t : s.tokens) {
      if (!t.is_punct) pauses.push_back(t.pre_pause_ms);
    }
  }
  return pauses;
}

int cmd_derive(const std::string& keylog_path, const std::string& out_dir,
               PauseMode mode, const std::string& boundary_punct) {
  Timer timer;
  fs::create_directories(out_dir);
  TokenizerConfig tok_config{boundary_punct};

  std::ifstream in = open_input(keylog_path);
  const auto by_user = sentences_by_user(parse_keylog(in), mode, tok_config);

  std::ofstream stats_out = open_output(out_dir + "/user_stats.tsv");
  stats_out << "user\tmedian_ms\tmad_ms\tn_pauses\n";
  for (const auto& [user, sentences] : by_user) {
    const UserPauseStats stats = user_stats(user, pooled_pauses(sentences));
    char buf[96];
    std::snprintf(buf, sizeof(buf), "%s\t%.1f\t%.1f\t%zu\n", user.c_str(),
                  stats.median_ms, stats.mad_ms, stats.n_pauses);
    stats_out << buf;

    std::ofstream corpus_out = open_output(out_dir + "/" + user + ".aux");
    write_column_corpus(derive_labels(sentences, stats), corpus_out);
  }

  RunManifest manifest;
  manifest.command = "derive";
  manifest.config["pause_mode"] = pause_mode_name(mode);
  manifest.config["boundary_punct"] = boundary_punct;
  manifest.add_input(keylog_path);
  manifest.elapsed_ms = timer.ms();
  manifest.write(out_dir + "/manifest.json");
  return 0;
}

int cmd_stats(const std::string& keylog_path, const std::string& out_dir,
              const std::string& pos_path, PauseMode mode,
              std::int64_t threshold_ms) {
  Timer timer;
  fs::create_directories(out_dir);

  std::ifstream in = open_input(keylog_path);
  const auto by_user = sentences_by_user(parse_keylog(in), mode, {});

  // Optional word -> POS lexicon for grouped histograms.
  std::map<std::string, std::string> pos_lexicon;
  if (!pos_path.empty()) {
    std::ifstream pos_in = open_input(pos_path);
    std::string word, tag;
    while (pos_in >> word >> tag) pos_lexicon[word] = tag;
  }

  std::ofstream hist_out = open_output(out_dir + "/pause_hist.tsv");
  hist_out << "user\tgroup\tbucket_lo\tbucket_hi\tcount\n";
  std::ofstream corr_out = open_output(out_dir + "/pause_length_corr.tsv");
  corr_out << "user\tpearson\n";
  std::ofstream seg_out = open_output(out_dir + "/segments.tsv");
  seg_out << "user\tsentence\tsegmentation\n";

  for (const auto& [user, sentences] : by_user) {
    std::vector<PausedToken> tokens;
    for (const PausedSentence& s : sentences) {
      tokens.insert(tokens.end(), s.tokens.begin(), s.tokens.end());
    }

    std::vector<std::string> groups;
    const std::vector<std::string>* groups_ptr = nullptr;
    if (!pos_lexicon.empty()) {
      for (const PausedToken& t : tokens) {
        auto it = pos_lexicon.find(t.text);
        groups.push_back(it == pos_lexicon.end() ? "UNK" : it->second);
      }
      groups_ptr = &groups;
    }
    for (const HistogramRow& row : pause_distribution(tokens, groups_ptr)) {
      char buf[160];
      std::snprintf(buf, sizeof(buf), "%s\t%s\t%.3f\t%.3f\t%zu\n", user.c_str(),
                    row.group.c_str(), row.lo, row.hi, row.count);
      hist_out << buf;
    }

    try {
      char buf[64];
      std::snprintf(buf, sizeof(buf), "%.4f", pause_word_length_corr(tokens));
      corr_out << user << '\t' << buf << '\n';
    } catch (const std::exception&) {
      corr_out << user << "\tNA\n";
    }

    for (std::size_t s = 0; s < sentences.size(); ++s) {
      seg_out << user << '\t' << s << '\t';
      for (const auto& [start, end] : threshold_segment(sentences[s], threshold_ms)) {
        seg_out << "[";
        for (std::size_t t = start; t < end; ++t) {
          if (t > start) seg_out << ' ';
          seg_out << sentences[s].tokens[t].text;
        }
        seg_out << "]";
      }
      seg_out << '\n';
    }
  }

  RunManifest manifest;
  manifest.command = "stats";
  manifest.config["pause_mode"] = pause_mode_name(mode);
  manifest.config["threshold_ms"] = std::to_string(threshold_ms);
  manifest.add_input(keylog_path);
  if (!pos_path.empty()) manifest.add_input(pos_path);
  manifest.elapsed_ms = timer.ms();
  manifest.write(out_dir + "/manifest.json");
  return 0;
}

std::vector<TaggedSentence> read_task_corpus(const std::string& path,
                                             const std::string& task,
                                             int token_col, int label_col) {
  if (label_col < 0) {
    // CoNLL-2000 chunking carries token POS chunk; CCG and derived
    // auxiliary corpora are two-column.
    label_col = task == "chunk" ? 2 : 1;
  }
  if (token_col < 0) token_col = 0;
  std::ifstream in = open_input(path);
  return read_column_corpus(in, token_col, label_col, task);
}

int cmd_train(const std::string& main_task, const std::string& train_path,
              const std::string& aux_dir, const std::string& aux_mode,
              const std::string& config_path, const std::string& out_dir,
              int token_col, int label_col,
              const std::map<std::string, std::string>& overrides) {
  Timer timer;
  fs::create_directories(out_dir);

  ModelConfig config;
  if (!config_path.empty()) apply_config(config, read_config_file(config_path));
  apply_config(config, overrides);

  const auto main_corpus =
      read_task_corpus(train_path, main_task, token_col, label_col);

  std::vector<std::pair<std::string, std::string>> aux_files;  // name, path
  if (aux_mode != "none") {
    if (aux_dir.empty()) {
      throw std::runtime_error("--aux-dir required for mode " + aux_mode);
    }
    for (const auto& entry : fs::directory_iterator(aux_dir)) {
      if (entry.is_regular_file() && entry.path().filename() != "user_stats.tsv" &&
          entry.path().extension() != ".json") {
        aux_files.emplace_back(entry.path().stem().string(),
                               entry.path().string());
      }
    }
    std::sort(aux_files.begin(), aux_files.end());
    if (aux_files.empty()) {
      throw std::runtime_error("no auxiliary corpora found in " + aux_dir);
    }
  }

  RunManifest manifest;
  manifest.command = "train";
  manifest.config = config_as_map(config);
  manifest.config["main_task"] = main_task;
  manifest.config["aux_mode"] = aux_mode;
  manifest.seed = config.seed;
  manifest.add_input(train_path);
  for (const auto& [name, path] : aux_files) manifest.add_input(path);

  auto run_one = [&](const std::string& tag, ModelConfig cfg,
                     std::map<std::string, std::vector<TaggedSentence>> corpora) {
    std::vector<const std::vector<TaggedSentence>*> refs;
    refs.push_back(&corpora.at(main_task));
    for (auto& [task, sents] : corpora) {
      if (task != main_task) refs.push_back(&sents);
    }
    Model model(build_vocab(refs), cfg);
    const auto log = train(model, corpora, main_task);
    const std::string suffix = tag.empty() ? "" : "_" + tag;
    model.save(out_dir + "/model" + suffix + ".ckpt");
    std::ofstream log_out = open_output(out_dir + "/loss" + suffix + ".tsv");
    write_loss_log(log, log_out);
  };

  if (aux_mode == "none") {
    run_one("", config, {{main_task, main_corpus}});
  } else if (aux_mode == "pooled") {
    std::vector<TaggedSentence> aux;
    for (const auto& [name, path] : aux_files) {
      auto part = read_task_corpus(path, kKeystrokeTask, 0, 1);
      aux.insert(aux.end(), std::make_move_iterator(part.begin()),
                 std::make_move_iterator(part.end()));
    }
    run_one("", config, {{main_task, main_corpus}, {kKeystrokeTask, std::move(aux)}});
  } else if (aux_mode == "per-user") {
    // One model per user's auxiliary corpus, each with its own derived seed.
    for (std::size_t u = 0; u < aux_files.size(); ++u) {
      ModelConfig cfg = config;
      cfg.seed = config.seed + u;
      run_one(aux_files[u].first, cfg,
              {{main_task, main_corpus},
               {kKeystrokeTask, read_task_corpus(aux_files[u].second,
                                                 kKeystrokeTask, 0, 1)}});
    }
  } else {
    throw std::runtime_error("unknown aux mode: " + aux_mode);
  }

  manifest.elapsed_ms = timer.ms();
  manifest.write(out_dir + "/manifest.json");
  return 0;
}

int cmd_predict(const std::string& model_path, const std::string& input_path,
                const std::string& task, const std::string& out_path) {
  Timer timer;
  Model model = Model::load(model_path);
  std::ifstream in = open_input(input_path);
  // Tokens from column 0; any further columns are ignored.
  const auto sentences = read_column_corpus(in, 0, 0, task);

  std::vector<TaggedSentence> tagged;
  tagged.reserve(sentences.size());
  for (const TaggedSentence& s : sentences) {
    tagged.push_back({s.tokens, model.predict(s.tokens, task), task});
  }
  std::ofstream out = open_output(out_path);
  write_column_corpus(tagged, out);

  RunManifest manifest;
  manifest.command = "predict";
  manifest.config["task"] = task;
  manifest.seed = model.config().seed;
  manifest.add_input(model_path);
  manifest.add_input(input_path);
  manifest.elapsed_ms = timer.ms();
  manifest.write(out_path + ".manifest.json");
  return 0;
}

int cmd_eval(const std::string& gold_path, const std::string& pred_path,
             const std::string& metric_name, bool per_label) {
  const LabelCorpus gold = read_labels(gold_path);
  const LabelCorpus pred = read_labels(pred_path);
  const Metric metric = parse_metric(metric_name);
  if (metric == Metric::ChunkF1) {
    write_chunk_report(chunk_f1(gold, pred), std::cout, per_label);
  } else {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", tag_accuracy(gold, pred));
    std::cout << "accuracy\t" << buf << '\n';
  }
  return 0;
}

int cmd_sigtest(const std::string& gold_path, const std::string& a_path,
                const std::string& b_path, const std::string& metric_name,
                int iterations, std::uint64_t seed) {
  const LabelCorpus gold = read_labels(gold_path);
  const LabelCorpus a = read_labels(a_path);
  const LabelCorpus b = read_labels(b_path);
  const SigResult r = approx_randomization(gold, a, b,
                                           parse_metric(metric_name),
                                           iterations, seed);
  char buf[128];
  std::snprintf(buf, sizeof(buf),
                "observed_diff\t%.4f\niterations\t%d\nexceed\t%d\np_value\t%.6f\n",
                r.observed, r.iterations, r.exceed, r.p_value);
  std::cout << buf;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Keystroke-pause multi-task sequence tagger"};
  app.require_subcommand(1);

  // derive
  std::string keylog_path, out_dir, pause_mode_name_ = "release-to-press";
  std::string boundary_punct = ".!?";
  auto* derive = app.add_subcommand(
      "derive", "Derive per-user auxiliary pause-label corpora from a keylog");
  derive->add_option("--keylog", keylog_path, "keystroke event log")->required();
  derive->add_option("--out", out_dir, "output directory")->required();
  derive->add_option("--pause-mode", pause_mode_name_,
                     "release-to-press or press-to-press");
  derive->add_option("--boundary-punct", boundary_punct,
                     "sentence-closing punctuation characters");

  // stats
  std::string pos_path;
  std::int64_t threshold_ms = 500;
  auto* stats = app.add_subcommand(
      "stats", "Exploratory pause statistics (histograms, correlation, segments)");
  stats->add_option("--keylog", keylog_path, "keystroke event log")->required();
  stats->add_option("--out", out_dir, "output directory")->required();
  stats->add_option("--pos", pos_path, "word-to-POS lexicon for grouping");
  stats->add_option("--pause-mode", pause_mode_name_,
                    "release-to-press or press-to-press");
  stats->add_option("--threshold-ms", threshold_ms,
                    "pause threshold for segmentation dump");

  // train
  std::string main_task, train_path, aux_dir, aux_mode = "none", config_path;
  int token_col = -1, label_col = -1;
  std::map<std::string, std::string> overrides;
  std::string seed_opt, epochs_opt;
  auto* train_cmd =
      app.add_subcommand("train", "Train the multi-task hierarchical tagger");
  train_cmd->add_option("--main-task", main_task, "chunk or ccg")
      ->required()
      ->check(CLI::IsMember({"chunk", "ccg"}));
  train_cmd->add_option("--train", train_path, "main task training corpus")
      ->required();
  train_cmd->add_option("--aux-dir", aux_dir, "directory of auxiliary corpora");
  train_cmd->add_option("--mode", aux_mode, "per-user, pooled, or none")
      ->check(CLI::IsMember({"per-user", "pooled", "none"}));
  train_cmd->add_option("--config", config_path, "key = value config file");
  train_cmd->add_option("--out", out_dir, "output directory")->required();
  train_cmd->add_option("--token-col", token_col, "token column override");
  train_cmd->add_option("--label-col", label_col, "label column override");
  train_cmd->add_option("--seed", seed_opt, "RNG seed override");
  train_cmd->add_option("--epochs", epochs_opt, "epoch count override");

  // predict
  std::string model_path, input_path, task_id, pred_out;
  auto* predict =
      app.add_subcommand("predict", "Tag a corpus with a trained model");
  predict->add_option("--model", model_path, "checkpoint file")->required();
  predict->add_option("--input", input_path, "column corpus to tag")->required();
  predict->add_option("--task", task_id, "task id")->required();
  predict->add_option("--out", pred_out, "output corpus file")->required();

  // eval
  std::string gold_path, pred_path, metric_name = "chunk";
  bool per_label = false;
  auto* eval_cmd = app.add_subcommand("eval", "Score predictions against gold");
  eval_cmd->add_option("--gold", gold_path, "gold corpus")->required();
  eval_cmd->add_option("--pred", pred_path, "predicted corpus")->required();
  eval_cmd->add_option("--metric", metric_name, "chunk or acc")
      ->check(CLI::IsMember({"chunk", "acc"}));
  eval_cmd->add_flag("--per-label", per_label, "per-label breakdown");

  // sigtest
  std::string a_path, b_path;
  int iterations = 1000;
  std::uint64_t seed = 42;
  auto* sigtest = app.add_subcommand(
      "sigtest", "Approximate randomization significance test");
  sigtest->add_option("--gold", gold_path, "gold corpus")->required();
  sigtest->add_option("--a", a_path, "system A predictions")->required();
  sigtest->add_option("--b", b_path, "system B predictions")->required();
  sigtest->add_option("--metric", metric_name, "chunk or acc")
      ->check(CLI::IsMember({"chunk", "acc"}));
  sigtest->add_option("--i", iterations, "iterations");
  sigtest->add_option("--seed", seed, "RNG seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (derive->parsed()) {
      return cmd_derive(keylog_path, out_dir, parse_pause_mode(pause_mode_name_),
                        boundary_punct);
    }
    if (stats->parsed()) {
      return cmd_stats(keylog_path, out_dir, pos_path,
                       parse_pause_mode(pause_mode_name_), threshold_ms);
    }
    if (train_cmd->parsed()) {
      if (!seed_opt.empty()) overrides["seed"] = seed_opt;
      if (!epochs_opt.empty()) overrides["epochs"] = epochs_opt;
      return cmd_train(main_task, train_path, aux_dir, aux_mode, config_path,
                       out_dir, token_col, label_col, overrides);
    }
    if (predict->parsed()) {
      return cmd_predict(model_path, input_path, task_id, pred_out);
    }
    if (eval_cmd->parsed()) {
      return cmd_eval(gold_path, pred_path, metric_name, per_label);
    }
    if (sigtest->parsed()) {
      return cmd_sigtest(gold_path, a_path, b_path, metric_name, iterations,
                         seed);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
