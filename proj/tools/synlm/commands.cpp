#include "synlm/commands.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "synlm/decode/surprisal.hpp"
#include "synlm/errors.hpp"
#include "synlm/models/model_io.hpp"
#include "synlm/models/trainer.hpp"
#include "synlm/psych/analysis.hpp"
#include "synlm/psych/records.hpp"
#include "synlm/psych/suite.hpp"
#include "synlm/report.hpp"
#include "synlm/treebank/actions.hpp"
#include "synlm/treebank/filler_gap.hpp"
#include "synlm/treebank/pcfg.hpp"
#include "synlm/treebank/strip.hpp"
#include "synlm/treebank/tree.hpp"
#include "synlm/treebank/vocab.hpp"
#include "synlm/util/hash.hpp"

#ifndef SYNLM_VERSION
#define SYNLM_VERSION "0.0.0"
#endif
#ifndef SYNLM_DEFAULT_DATA_ROOT
#define SYNLM_DEFAULT_DATA_ROOT "data"
#endif

namespace synlm::cli {

namespace fs = std::filesystem;
using nlohmann::json;
using util::sha256_file;
using util::sha256_hex;

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Layered options: built-in defaults, then a JSON config file, then flags.

class Params {
 public:
  explicit Params(CLI::App* app) : app_(app) {
    app_->add_option("--config", config_path_, "JSON file with option values (flags take precedence)");
  }

  void add(const std::string& name, json def, const std::string& help) {
    std::string flag = "--" + name;
    std::replace(flag.begin(), flag.end(), '_', '-');
    order_.push_back(name);
    defaults_[name] = def;
    CLI::Option* opt = nullptr;
    if (def.is_boolean()) {
      opt = app_->add_flag(flag, bools_[name], help);
    } else if (def.is_array()) {
      opt = app_->add_option(flag, lists_[name], help);
      if (!def.empty()) opt->default_str(join(def));
    } else {
      opt = app_->add_option(flag, strings_[name], help);
      opt->default_str(def.is_string() ? def.get<std::string>() : def.dump());
    }
    options_[name] = opt;
  }

  json resolve(const std::string& command) const {
    json file = json::object();
    if (!config_path_.empty()) {
      std::ifstream in(config_path_);
      if (!in) throw UsageError("cannot open config file '" + config_path_ + "'");
      try {
        in >> file;
      } catch (const json::exception& e) {
        throw UsageError("config file '" + config_path_ + "' is not valid JSON: " + e.what());
      }
      if (!file.is_object()) throw UsageError("config file must hold a JSON object");
      if (file.contains(command) && file[command].is_object()) file = file[command];
      for (const auto& [key, value] : file.items()) {
        if (!defaults_.count(key)) throw UsageError("config file: unknown option '" + key + "' for " + command);
      }
    }
    json out = json::object();
    for (const auto& name : order_) {
      const json& def = defaults_.at(name);
      if (options_.at(name)->count() > 0) {
        out[name] = from_flag(name, def);
      } else if (file.contains(name)) {
        out[name] = from_file(name, def, file[name]);
      } else {
        out[name] = def;
      }
    }
    return out;
  }

 private:
  static std::string join(const json& arr) {
    std::string s;
    for (const auto& v : arr) s += (s.empty() ? "" : " ") + v.get<std::string>();
    return s;
  }

  json from_flag(const std::string& name, const json& def) const {
    if (def.is_boolean()) return bools_.at(name);
    if (def.is_array()) return lists_.at(name);
    const std::string& raw = strings_.at(name);
    try {
      std::size_t used = 0;
      if (def.is_number_integer()) {
        const long long v = std::stoll(raw, &used);
        if (used != raw.size()) throw std::invalid_argument(raw);
        return v;
      }
      if (def.is_number()) {
        const double v = std::stod(raw, &used);
        if (used != raw.size()) throw std::invalid_argument(raw);
        return v;
      }
    } catch (const std::exception&) {
      throw UsageError("--" + name + ": expected a number, got '" + raw + "'");
    }
    return raw;
  }

  static json from_file(const std::string& name, const json& def, const json& v) {
    const bool ok = def.is_boolean()          ? v.is_boolean()
                    : def.is_number_integer() ? v.is_number_integer()
                    : def.is_number()         ? v.is_number()
                    : def.is_array()          ? v.is_array() || v.is_string()
                                              : v.is_string();
    if (!ok) throw UsageError("config file: option '" + name + "' has the wrong type");
    if (def.is_array() && v.is_string()) return json::array({v});
    return v;
  }

  CLI::App* app_;
  std::string config_path_;
  std::vector<std::string> order_;
  std::map<std::string, json> defaults_;
  std::map<std::string, CLI::Option*> options_;
  std::map<std::string, std::string> strings_;
  std::map<std::string, std::vector<std::string>> lists_;
  std::map<std::string, bool> bools_;
};

std::size_t count_opt(const json& cfg, const std::string& name, long long min = 0) {
  const long long v = cfg.at(name).get<long long>();
  if (v < min) throw UsageError("--" + name + " must be at least " + std::to_string(min));
  return static_cast<std::size_t>(v);
}

double real_opt(const json& cfg, const std::string& name, double lo, double hi) {
  const double v = cfg.at(name).get<double>();
  if (!(v >= lo && v <= hi)) {
    std::ostringstream msg;
    msg << "--" << name << " must lie in [" << lo << ", " << hi << "]";
    throw UsageError(msg.str());
  }
  return v;
}

std::string str_opt(const json& cfg, const std::string& name, bool required = true) {
  std::string v = cfg.at(name).get<std::string>();
  if (required && v.empty()) throw UsageError("--" + name + " is required");
  return v;
}

std::vector<std::string> list_opt(const json& cfg, const std::string& name) {
  return cfg.at(name).get<std::vector<std::string>>();
}

// ---------------------------------------------------------------------------
// Files.

fs::path data_root() {
  const char* env = std::getenv(kDataRootEnv);
  if (env != nullptr && *env != '\0') return env;
#ifdef SYNLM_SOURCE_DATA_ROOT
  // Uninstalled builds read the data shipped with the sources.
  if (!fs::exists(SYNLM_DEFAULT_DATA_ROOT)) return SYNLM_SOURCE_DATA_ROOT;
#endif
  return SYNLM_DEFAULT_DATA_ROOT;
}

/// Existing paths are used as given; relative ones are also looked up under
/// the data root.
fs::path resolve_input(const std::string& name) {
  const fs::path p(name);
  if (fs::exists(p)) return p;
  if (p.is_relative()) {
    const fs::path q = data_root() / p;
    if (fs::exists(q)) return q;
    throw Error(ErrorKind::kData, "input '" + name + "' not found (also looked under " + data_root().string() + ")");
  }
  throw Error(ErrorKind::kData, "input '" + name + "' not found");
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kData, "cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> read_lines(const fs::path& path) {
  std::istringstream in(read_file(path));
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

void write_atomic(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::kData, "cannot write '" + tmp.string() + "'");
    out << content;
    out.flush();
    if (!out) throw Error(ErrorKind::kData, "write to '" + tmp.string() + "' failed");
  }
  fs::rename(tmp, path);
}

json provenance(const std::string& command, const json& cfg, const json& inputs) {
  json p;
  p["tool"] = "synlm";
  p["version"] = SYNLM_VERSION;
  p["command"] = command;
  p["config"] = cfg;
  p["config_sha256"] = sha256_hex(cfg.dump());
  p["inputs"] = inputs;
  p["seed"] = cfg.contains("seed") ? cfg["seed"] : json(nullptr);
  return p;
}

std::string lines_of(const std::vector<std::string>& lines) {
  std::string s;
  for (const auto& l : lines) s += l + "\n";
  return s;
}

std::string fixed(double v, int digits = 3) {
  if (!std::isfinite(v)) return v > 0 ? "inf" : (v < 0 ? "-inf" : "nan");
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << v;
  return s.str();
}

double jnum(const json& j, const std::string& key) {
  if (!j.contains(key) || j[key].is_null()) return std::nan("");
  return j[key].get<double>();
}

// ---------------------------------------------------------------------------
// prepare

struct TreeSource {
  std::vector<tb::Tree> trees;
  std::vector<std::string> errors;  // "file:line: message"
  std::size_t total = 0;
};

void read_trees_into(const std::string& name, TreeSource& src) {
  const fs::path path = resolve_input(name);
  std::istringstream in(read_file(path));
  for (auto& rec : tb::read_treebank(in)) {
    ++src.total;
    if (rec.ok()) {
      src.trees.push_back(rec.tree());
    } else {
      src.errors.push_back(name + ":" + std::to_string(rec.error().line) + ": " + rec.error().message);
    }
  }
}

std::size_t token_count(const std::vector<tb::Tree>& trees) {
  std::size_t n = 0;
  for (const auto& t : trees) n += t.yield().size();
  return n;
}

int cmd_prepare(const json& cfg, std::ostream& out, std::ostream& err) {
  const std::string grammar = str_opt(cfg, "grammar", false);
  const auto treebanks = list_opt(cfg, "treebank");
  const auto dev_treebanks = list_opt(cfg, "dev_treebank");
  if (grammar.empty() == treebanks.empty()) throw UsageError("give exactly one of --grammar or --treebank");
  const fs::path dir = str_opt(cfg, "out");
  const double dev_fraction = real_opt(cfg, "dev_fraction", 0.0, 0.9);
  const double max_error_rate = real_opt(cfg, "max_error_rate", 0.0, 1.0);
  const std::size_t min_count = count_opt(cfg, "min_count", 1);

  json inputs = json::object();
  std::vector<tb::Tree> raw_train, raw_dev;
  std::size_t cap_hits = 0;
  std::vector<std::string> diagnostics;
  std::size_t total = 0;

  if (!grammar.empty()) {
    const fs::path path = resolve_input(grammar);
    const std::string text = read_file(path);
    inputs[grammar] = sha256_hex(text);
    const tb::Pcfg g = tb::Pcfg::parse_string(text);
    tb::SampleOptions so;
    so.max_depth = count_opt(cfg, "max_depth", 1);
    auto sample = tb::sample_corpus(g, count_opt(cfg, "sentences", 1), cfg.at("seed").get<std::uint64_t>(), so);
    cap_hits = sample.cap_hits;
    raw_train = std::move(sample.trees);
    total = raw_train.size();
  } else {
    TreeSource train_src, dev_src;
    for (const auto& t : treebanks) {
      read_trees_into(t, train_src);
      inputs[t] = sha256_file(resolve_input(t).string());
    }
    for (const auto& t : dev_treebanks) {
      read_trees_into(t, dev_src);
      inputs[t] = sha256_file(resolve_input(t).string());
    }
    raw_train = std::move(train_src.trees);
    raw_dev = std::move(dev_src.trees);
    diagnostics = train_src.errors;
    diagnostics.insert(diagnostics.end(), dev_src.errors.begin(), dev_src.errors.end());
    total = train_src.total + dev_src.total;
  }

  // Strip annotations and empty categories; trees that vanish count as
  // malformed input.
  auto strip_all = [&](const std::vector<tb::Tree>& raw, std::vector<tb::Tree>& keep, std::vector<tb::Tree>& kept_raw) {
    for (const auto& t : raw) {
      try {
        keep.push_back(tb::strip_annotations(t));
        kept_raw.push_back(t);
      } catch (const EmptyTreeError& e) {
        diagnostics.push_back(std::string("tree ") + std::to_string(keep.size() + 1) + ": " + e.what());
      }
    }
  };
  std::vector<tb::Tree> train, dev, kept_train_raw, kept_dev_raw;
  strip_all(raw_train, train, kept_train_raw);
  strip_all(raw_dev, dev, kept_dev_raw);

  for (const auto& d : diagnostics) err << d << "\n";
  const double rate = total == 0 ? 1.0 : static_cast<double>(diagnostics.size()) / static_cast<double>(total);
  if (total == 0) throw Error(ErrorKind::kData, "no trees in the input");
  if (rate > max_error_rate) {
    std::string listing;
    for (std::size_t i = 0; i < diagnostics.size() && i < 20; ++i) listing += "\n  " + diagnostics[i];
    throw Error(ErrorKind::kData, std::to_string(diagnostics.size()) + " of " + std::to_string(total) +
                                      " trees malformed (rate " + fixed(rate, 4) + " exceeds " +
                                      fixed(max_error_rate, 4) + "):" + listing);
  }

  if (dev_treebanks.empty() && dev_fraction > 0) {
    const auto n_dev = static_cast<std::size_t>(std::llround(dev_fraction * static_cast<double>(train.size())));
    const std::size_t cut = train.size() - std::min(n_dev, train.size());
    dev.assign(train.begin() + static_cast<std::ptrdiff_t>(cut), train.end());
    kept_dev_raw.assign(kept_train_raw.begin() + static_cast<std::ptrdiff_t>(cut), kept_train_raw.end());
    train.resize(cut);
    kept_train_raw.resize(cut);
  }
  if (train.empty()) throw Error(ErrorKind::kData, "no training trees left after the split");

  auto render = [](const std::vector<tb::Tree>& trees, std::vector<std::string>& tree_lines,
                   std::vector<std::string>& oracle_lines, std::set<std::string>& labels) {
    for (const auto& t : trees) {
      tree_lines.push_back(t.to_string());
      const auto actions = tb::tree_to_actions(t);
      for (const auto& a : actions) {
        if (a.kind == tb::ActionKind::kNT) labels.insert(a.symbol);
      }
      oracle_lines.push_back(tb::format_actions(actions));
    }
  };
  std::vector<std::string> train_trees, train_oracle, dev_trees, dev_oracle, raw_lines;
  std::set<std::string> label_set;
  render(train, train_trees, train_oracle, label_set);
  render(dev, dev_trees, dev_oracle, label_set);
  for (const auto& t : kept_train_raw) raw_lines.push_back(t.to_string());
  for (const auto& t : kept_dev_raw) raw_lines.push_back(t.to_string());

  std::vector<std::vector<std::string>> yields;
  for (const auto& t : train) yields.push_back(t.yield());
  const auto vocab = tb::Vocabulary::build(yields, min_count);

  const std::map<std::string, std::string> files{
      {"train.trees", lines_of(train_trees)},
      {"train.oracle", lines_of(train_oracle)},
      {"dev.trees", lines_of(dev_trees)},
      {"dev.oracle", lines_of(dev_oracle)},
      {"raw.trees", lines_of(raw_lines)},
      {"vocab.txt", lines_of(vocab.tokens())},
      {"labels.txt", lines_of({label_set.begin(), label_set.end()})},
  };
  json manifest;
  manifest["provenance"] = provenance("prepare", cfg, inputs);
  for (const auto& [name, content] : files) {
    write_atomic(dir / name, content);
    manifest["files"][name] = sha256_hex(content);
  }
  const std::size_t train_tokens = token_count(train), dev_tokens = token_count(dev);
  manifest["sentences"] = {{"train", train.size()}, {"dev", dev.size()}};
  manifest["tokens"] = {{"train", train_tokens}, {"dev", dev_tokens}, {"total", train_tokens + dev_tokens}};
  manifest["vocabulary_size"] = vocab.size();
  manifest["labels"] = label_set;
  manifest["malformed"] = diagnostics.size();
  manifest["cap_hits"] = cap_hits;
  const std::string text = manifest.dump(1) + "\n";
  write_atomic(dir / "manifest.json", text);

  out << "prepared " << train.size() << " training and " << dev.size() << " dev sentences\n";
  out << "tokens: " << train_tokens << " train, " << dev_tokens << " dev\n";
  out << "vocabulary: " << vocab.size() << " types, " << label_set.size() << " labels\n";
  if (!diagnostics.empty()) out << "skipped " << diagnostics.size() << " malformed trees\n";
  out << "manifest sha256 " << sha256_hex(text) << "\n";
  return kOk;
}

// ---------------------------------------------------------------------------
// train

/// Checks every file listed in a prepared directory's manifest.
json verify_manifest(const fs::path& dir) {
  const fs::path mpath = dir / "manifest.json";
  if (!fs::exists(mpath)) throw Error(ErrorKind::kData, "'" + dir.string() + "' has no manifest.json; run prepare");
  const json manifest = json::parse(read_file(mpath));
  for (const auto& [name, hash] : manifest.at("files").items()) {
    const std::string actual = sha256_file((dir / name).string());
    if (actual != hash.get<std::string>()) {
      throw ProvenanceError("prepared file '" + (dir / name).string() + "' does not match its manifest: recorded " +
                            hash.get<std::string>() + ", computed " + actual);
    }
  }
  return manifest;
}

models::EventCorpus load_events(const models::LanguageModel& model, const fs::path& oracle) {
  models::EventCorpus corpus;
  for (const auto& line : read_lines(oracle)) corpus.push_back(model.events_for(tb::parse_actions(line)));
  return corpus;
}

int cmd_train(const json& cfg, std::ostream& out, std::ostream& err) {
  const fs::path dir = resolve_input(str_opt(cfg, "data"));
  const json manifest = verify_manifest(dir);
  const fs::path ckpt = str_opt(cfg, "out");

  models::ModelConfig mc;
  mc.arch = models::architecture_from_string(str_opt(cfg, "arch"));
  mc.word_dim = count_opt(cfg, "word_dim", 1);
  mc.hidden_dim = count_opt(cfg, "hidden_dim", 1);
  mc.layers = count_opt(cfg, "layers", 1);
  mc.dropout = real_opt(cfg, "dropout", 0.0, 0.95);
  mc.caps.max_open = count_opt(cfg, "max_open", 1);
  mc.caps.max_actions = count_opt(cfg, "max_actions", 2);

  models::TrainConfig tc;
  tc.optimizer.kind = num::optimizer_kind_from_string(str_opt(cfg, "optimizer"));
  tc.optimizer.learning_rate = real_opt(cfg, "lr", 0.0, 1e3);
  tc.optimizer.clip_norm = cfg.at("clip").get<double>();
  tc.max_epochs = count_opt(cfg, "epochs");
  tc.patience = count_opt(cfg, "patience");
  tc.lr_decay = real_opt(cfg, "lr_decay", 0.0, 1.0);
  tc.batch_size = count_opt(cfg, "batch", 1);
  tc.seed = cfg.at("seed").get<std::uint64_t>();
  tc.shuffle = !cfg.at("no_shuffle").get<bool>();
  const double init_range = real_opt(cfg, "init_range", 0.0, 10.0);

  auto model = models::make_model(mc, tb::Vocabulary::from_tokens(read_lines(dir / "vocab.txt")),
                                  read_lines(dir / "labels.txt"));
  model->params().initialize(tc.seed, init_range);
  auto train_set = load_events(*model, dir / "train.oracle");
  auto dev_set = load_events(*model, dir / "dev.oracle");
  const std::size_t dropped = models::filter_trainable(*model, train_set) + models::filter_trainable(*model, dev_set);
  if (dropped > 0) err << "skipping " << dropped << " sentences that exceed the transition caps\n";
  if (dev_set.empty()) dev_set = train_set;

  out << "training " << models::to_string(mc.arch) << " (" << model->params().scalar_count() << " parameters) on "
      << train_set.size() << " sentences\n";
  std::ostringstream log;
  log << "epoch\ttrain_ppl\tdev_ppl\tlr\n";
  const auto result = models::train(*model, train_set, dev_set, tc, [&](const models::EpochRecord& r) {
    out << "epoch " << r.epoch << "  train ppl " << fixed(r.train_ppl) << "  dev ppl " << fixed(r.dev_ppl)
        << "  lr " << r.lr << "\n";
    log << r.epoch << "\t" << psych::format_number(r.train_ppl) << "\t" << psych::format_number(r.dev_ppl) << "\t"
        << psych::format_number(r.lr) << "\n";
  });

  json epochs = json::array();
  for (const auto& r : result.log) {
    epochs.push_back({{"epoch", r.epoch}, {"train_ppl", r.train_ppl}, {"dev_ppl", r.dev_ppl}, {"lr", r.lr}});
  }
  json inputs = {{"manifest", sha256_file((dir / "manifest.json").string())}};
  json info;
  info["provenance"] = provenance("train", cfg, inputs);
  info["training"] = {{"best_epoch", result.best_epoch}, {"best_dev_ppl", result.best_dev_ppl},
                      {"skipped", dropped},              {"epochs", epochs},
                      {"diverged", result.diverged},     {"train_sentences", train_set.size()}};
  if (ckpt.has_parent_path()) fs::create_directories(ckpt.parent_path());
  models::save_model(ckpt.string(), *model, info);
  const std::string log_path = str_opt(cfg, "log", false);
  if (!log_path.empty()) write_atomic(log_path, log.str());

  out << "best dev ppl " << fixed(result.best_dev_ppl) << " at epoch " << result.best_epoch << "; wrote "
      << ckpt.string() << "\n";
  if (result.diverged) {
    err << "training diverged: " << result.divergence << " (kept the best parameters seen)\n";
    return kNumericalError;
  }
  return kOk;
}

// ---------------------------------------------------------------------------
// score

int cmd_score(const json& cfg, std::ostream& out, std::ostream& err) {
  const std::string model_arg = str_opt(cfg, "model");
  const std::string suite_arg = str_opt(cfg, "suite");
  const fs::path model_path = resolve_input(model_arg);
  const fs::path suite_path = resolve_input(suite_arg);
  const auto model = models::load_model(model_path.string());
  const psych::TestSuite suite = psych::load_suite(suite_path.string());
  suite.validate();
  std::string tag = str_opt(cfg, "tag", false);
  if (tag.empty()) tag = models::to_string(model->arch());

  decode::BeamConfig beam;
  beam.action_beam = count_opt(cfg, "action_beam", 1);
  beam.word_beam = count_opt(cfg, "word_beam", 1);
  beam.max_structural = count_opt(cfg, "max_structural", 1);
  beam.fallback_factor = count_opt(cfg, "fallback_factor", 1);
  beam.validate();
  const std::size_t workers = count_opt(cfg, "workers", 1);

  struct Job {
    const psych::Item* item;
    const psych::Condition* condition;
    std::vector<std::string> words;
  };
  std::vector<Job> jobs;
  std::vector<std::vector<std::size_t>> sentences;
  for (const auto& item : suite.items) {
    for (const auto& c : suite.conditions) {
      Job j{&item, &c, suite.sentence(item, c.name)};
      std::vector<std::size_t> ids;
      for (const auto& e : model->events_for_words(j.words)) ids.push_back(e.id);
      sentences.push_back(std::move(ids));
      jobs.push_back(std::move(j));
    }
  }

  std::vector<decode::SentenceScore> scores;
  if (model->structured()) {
    scores = decode::score_sentences(*model, sentences, beam, workers);
  } else {
    for (const auto& s : sentences) {
      decode::SentenceScore r;
      r.surprisal_bits = decode::surprisal_direct(*model, s);
      r.ok = true;
      scores.push_back(std::move(r));
    }
  }

  psych::RecordTable table;
  json inputs = {{model_arg, sha256_file(model_path.string())}, {suite_arg, sha256_file(suite_path.string())}};
  table.provenance = provenance("score", cfg, inputs);
  table.provenance["model_tag"] = tag;
  table.provenance["architecture"] = models::to_string(model->arch());
  table.provenance["method"] = model->structured() ? "word-synchronous beam" : "direct";
  std::size_t failed = 0, retried = 0;
  for (std::size_t k = 0; k < jobs.size(); ++k) {
    const Job& j = jobs[k];
    const auto& sc = scores[k];
    retried += sc.retried ? 1 : 0;
    if (!sc.ok) {
      ++failed;
      table.failures.push_back({suite.name, j.item->id, j.condition->name, tag, sc.failure});
      err << "item " << j.item->id << " / " << j.condition->name << ": " << sc.failure << "\n";
      continue;
    }
    std::size_t idx = 0;
    for (const auto& region : j.item->conditions.at(j.condition->name)) {
      for (const auto& tok : region.tokens) {
        table.records.push_back(
            {suite.name, j.item->id, j.condition->name, region.name, idx, tok, sc.surprisal_bits.at(idx), tag});
        ++idx;
      }
    }
  }
  std::ostringstream text;
  psych::write_records(text, table);
  const std::string out_path = str_opt(cfg, "out");
  write_atomic(out_path, text.str());
  out << "scored " << jobs.size() << " sentences of suite '" << suite.name << "' with " << tag;
  if (retried > 0) out << " (" << retried << " retried with a wider beam)";
  out << "; wrote " << out_path << "\n";
  if (failed > 0) out << failed << " sentences failed and are listed in the output\n";
  return kOk;
}

// ---------------------------------------------------------------------------
// analyze

void print_effect(std::ostream& out, const std::string& label, const json& e) {
  out << "  " << label << ": " << fixed(jnum(e, "mean")) << " [" << fixed(jnum(e, "ci_low")) << ", "
      << fixed(jnum(e, "ci_high")) << "], p = " << fixed(jnum(e, "p_permutation"), 4) << ", "
      << e.at("positive_items").get<std::size_t>() << "/" << e.at("n").get<std::size_t>() << " items positive\n";
}

int cmd_analyze(const json& cfg, std::ostream& out, std::ostream&) {
  const auto record_args = list_opt(cfg, "records");
  if (record_args.empty()) throw UsageError("--records is required");
  const std::string suite_arg = str_opt(cfg, "suite");
  const fs::path suite_path = resolve_input(suite_arg);
  const psych::TestSuite suite = psych::load_suite(suite_path.string());
  suite.validate();

  psych::RecordTable merged;
  json inputs = {{suite_arg, sha256_file(suite_path.string())}};
  json upstream = json::array();
  for (const auto& r : record_args) {
    const fs::path p = resolve_input(r);
    inputs[r] = sha256_file(p.string());
    auto t = psych::read_records_file(p.string());
    upstream.push_back(t.provenance);
    merged.records.insert(merged.records.end(), t.records.begin(), t.records.end());
    merged.failures.insert(merged.failures.end(), t.failures.begin(), t.failures.end());
  }
  auto models = list_opt(cfg, "model");
  if (models.empty()) models = merged.models();
  if (models.empty()) throw Error(ErrorKind::kData, "no model records in the input");

  psych::AnalysisOptions opt;
  const auto regions = list_opt(cfg, "regions");
  if (!regions.empty()) opt.regions = regions;
  opt.shuffles = count_opt(cfg, "shuffles", 1);
  opt.seed = cfg.at("seed").get<std::uint64_t>();

  json doc;
  doc["provenance"] = provenance("analyze", cfg, inputs);
  doc["provenance"]["upstream"] = upstream;
  doc["suite"] = suite.name;
  doc["analysis"] = psych::to_string(suite.analysis);
  doc["results"] = json::array();
  std::string items;
  for (const auto& m : models) {
    json summary = psych::analyze_suite(merged, suite, m, opt);
    const std::string tsv = psych::items_tsv(summary);
    items += items.empty() ? tsv : tsv.substr(tsv.find('\n') + 1);
    out << suite.name << " / " << m << " (" << summary["items_used"].get<std::size_t>() << " items)\n";
    if (summary.contains("interaction")) print_effect(out, "wh-licensing interaction", summary["interaction"]);
    if (summary.contains("licensor_effect")) print_effect(out, "licensor effect", summary["licensor_effect"]);
    if (summary.contains("distractor_effect")) print_effect(out, "distractor effect", summary["distractor_effect"]);
    if (summary.contains("accuracy")) {
      const auto& a = summary["accuracy"];
      out << "  accuracy: " << fixed(jnum(a, "accuracy")) << " [" << fixed(jnum(a, "ci_low")) << ", "
          << fixed(jnum(a, "ci_high")) << "], binomial p = " << fixed(jnum(a, "p_binomial"), 4) << "\n";
    }
    if (summary.contains("contrast")) print_effect(out, "contrast", summary["contrast"]);
    doc["results"].push_back(std::move(summary));
  }
  const fs::path out_path = str_opt(cfg, "out");
  std::string items_path = str_opt(cfg, "items_out", false);
  if (items_path.empty()) items_path = fs::path(out_path).replace_extension(".items.tsv").string();
  write_atomic(out_path, doc.dump(1) + "\n");
  write_atomic(items_path, items);
  out << "wrote " << out_path.string() << " and " << items_path << "\n";
  return kOk;
}

// ---------------------------------------------------------------------------
// report

int cmd_report(const json& cfg, std::ostream& out, std::ostream&) {
  const auto analyses = list_opt(cfg, "analysis");
  if (analyses.empty()) throw UsageError("--analysis is required");
  std::map<std::string, std::vector<json>> by_suite;
  json inputs = json::object();
  for (const auto& a : analyses) {
    const fs::path p = resolve_input(a);
    const std::string text = read_file(p);
    inputs[a] = sha256_hex(text);
    const json doc = json::parse(text);
    for (const auto& r : doc.at("results")) by_suite[r.at("suite").get<std::string>()].push_back(r);
  }
  const fs::path dir = str_opt(cfg, "out");
  const json prov = provenance("report", cfg, inputs);
  for (const auto& [suite, results] : by_suite) {
    const ReportTables tables = build_report(results);
    const std::string header = "# provenance " + prov.dump() + "\n";
    write_atomic(dir / (suite + ".tsv"), header + tables.tsv);
    write_atomic(dir / (suite + ".svg"), render_condition_chart(suite, tables, prov));
    out << "wrote " << (dir / (suite + ".svg")).string();
    if (!tables.accuracy.empty()) {
      write_atomic(dir / (suite + ".accuracy.svg"), render_accuracy_chart(suite, tables, prov));
      out << ", " << (dir / (suite + ".accuracy.svg")).string();
    }
    out << " and " << (dir / (suite + ".tsv")).string() << "\n";
  }
  return kOk;
}

// ---------------------------------------------------------------------------
// count-deps

int cmd_count_deps(const json& cfg, std::ostream& out, std::ostream& err) {
  const auto treebanks = list_opt(cfg, "treebank");
  if (treebanks.empty()) throw UsageError("--treebank is required");
  tb::FillerGapOptions opt;
  opt.double_object_rule = !cfg.at("no_double_object").get<bool>();
  opt.dative_pp_rule = !cfg.at("no_dative_pp").get<bool>();
  TreeSource src;
  for (const auto& t : treebanks) read_trees_into(t, src);
  for (const auto& e : src.errors) err << e << "\n";
  tb::FillerGapTable table;
  for (const auto& t : src.trees) table.add_tree(t, opt);
  const std::string tsv = table.to_tsv(list_opt(cfg, "fillers"));
  const std::string out_path = str_opt(cfg, "out", false);
  if (out_path.empty()) {
    out << tsv;
  } else {
    write_atomic(out_path, tsv);
  }
  err << src.trees.size() << " trees, " << table.wh_indices() << " indexed wh fillers, "
      << table.unresolved().size() << " without a trace";
  if (!src.errors.empty()) err << ", " << src.errors.size() << " unreadable trees";
  err << "\n";
  return kOk;
}

// ---------------------------------------------------------------------------
// verify-beam

int cmd_verify_beam(const json& cfg, std::ostream& out, std::ostream& err) {
  const std::string model_arg = str_opt(cfg, "model");
  const auto model = models::load_model(resolve_input(model_arg).string());
  if (!model->structured()) throw UsageError("verify-beam needs a structured model (rnng or action-lstm)");
  const fs::path gold_path = resolve_input(str_opt(cfg, "gold"));
  decode::BeamConfig beam;
  beam.action_beam = count_opt(cfg, "action_beam", 1);
  beam.word_beam = count_opt(cfg, "word_beam", 1);
  beam.max_structural = count_opt(cfg, "max_structural", 1);
  beam.validate();
  const std::size_t limit = count_opt(cfg, "limit");

  // Gold parses come either as bracketed trees or as oracle action lines.
  std::vector<tb::ActionSequence> gold;
  const auto lines = read_lines(gold_path);
  if (!lines.empty() && lines.front().front() == '(') {
    TreeSource src;
    read_trees_into(gold_path.string(), src);
    for (const auto& e : src.errors) err << e << "\n";
    for (const auto& t : src.trees) gold.push_back(tb::tree_to_actions(tb::strip_annotations(t)));
  } else {
    for (const auto& l : lines) gold.push_back(tb::parse_actions(l));
  }

  std::size_t sentences = 0, skipped = 0, words = 0, present = 0, full = 0, failed = 0;
  double rank_sum = 0.0;
  for (const auto& g : gold) {
    if (limit > 0 && sentences >= limit) break;
    models::EventCorpus one{model->events_for(g)};
    if (models::filter_trainable(*model, one) > 0) {
      ++skipped;
      continue;
    }
    ++sentences;
    try {
      const auto res = decode::verify_gold_on_beam(*model, one.front(), beam);
      bool all = true;
      for (const auto& r : res) {
        ++words;
        if (r.present) {
          ++present;
          rank_sum += static_cast<double>(r.rank);
        }
        all = all && r.present;
      }
      full += all ? 1 : 0;
    } catch (const BeamFailure& e) {
      ++failed;
      err << "sentence " << sentences << ": " << e.what() << "\n";
    }
  }
  json summary{{"sentences", sentences},
               {"skipped_over_caps", skipped},
               {"beam_failures", failed},
               {"words", words},
               {"gold_on_beam_words", present},
               {"gold_on_beam_rate", words == 0 ? 0.0 : static_cast<double>(present) / static_cast<double>(words)},
               {"sentences_fully_on_beam", full},
               {"mean_gold_rank", present == 0 ? 0.0 : rank_sum / static_cast<double>(present)},
               {"action_beam", beam.action_beam},
               {"word_beam", beam.word_beam}};
  const std::string out_path = str_opt(cfg, "out", false);
  if (out_path.empty()) {
    out << summary.dump(1) << "\n";
  } else {
    json doc{{"provenance", provenance("verify-beam", cfg, json::object())}, {"summary", summary}};
    write_atomic(out_path, doc.dump(1) + "\n");
    out << "gold parse on beam at " << present << " of " << words << " words; wrote " << out_path << "\n";
  }
  return kOk;
}

// ---------------------------------------------------------------------------

struct Command {
  CLI::App* app;
  std::unique_ptr<Params> params;
  int (*fn)(const json&, std::ostream&, std::ostream&);
};

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Syntactic language models and surprisal-based test suites"};
  app.require_subcommand(1);
  app.set_version_flag("--version", SYNLM_VERSION);
  app.footer(std::string("Relative input paths are also looked up under $") + kDataRootEnv + " (default " +
             SYNLM_DEFAULT_DATA_ROOT + ").\nExit codes: 0 ok, 1 usage, 2 data error, 3 numerical failure.");

  std::map<std::string, Command> commands;
  auto add = [&](const std::string& name, const std::string& help, auto fn) -> Params& {
    CLI::App* sub = app.add_subcommand(name, help);
    auto& c = commands[name];
    c.app = sub;
    c.params = std::make_unique<Params>(sub);
    c.fn = fn;
    return *c.params;
  };

  auto& prep = add("prepare", "Sample or read trees; write oracle files, vocabulary and manifest", cmd_prepare);
  prep.add("grammar", "", "PCFG file to sample a synthetic corpus from");
  prep.add("treebank", json::array(), "bracketed treebank file(s) for training");
  prep.add("dev_treebank", json::array(), "bracketed treebank file(s) for development");
  prep.add("sentences", 1000, "sentences to sample from the grammar");
  prep.add("seed", 1, "sampling seed");
  prep.add("max_depth", 60, "derivation depth cap while sampling");
  prep.add("dev_fraction", 0.1, "share of sentences held out when no dev treebank is given");
  prep.add("min_count", 1, "words seen fewer times become unknown-word classes");
  prep.add("max_error_rate", 0.0, "largest tolerated share of malformed trees");
  prep.add("out", "prepared", "output directory");

  auto& tr = add("train", "Train a language model on a prepared directory", cmd_train);
  tr.add("data", "prepared", "directory written by prepare");
  tr.add("arch", "rnng", "rnng, action-lstm or lstm-lm");
  tr.add("word_dim", 256, "word and label embedding size");
  tr.add("hidden_dim", 256, "LSTM state size");
  tr.add("layers", 2, "LSTM layers");
  tr.add("dropout", 0.3, "dropout rate");
  tr.add("max_open", 60, "most simultaneously open nonterminals");
  tr.add("max_actions", 300, "most actions per sentence");
  tr.add("optimizer", "sgd", "sgd or adam");
  tr.add("lr", 0.1, "learning rate");
  tr.add("clip", 5.0, "gradient norm clip (0 disables)");
  tr.add("epochs", 30, "maximum epochs");
  tr.add("patience", 2, "epochs without dev improvement before stopping");
  tr.add("lr_decay", 0.5, "learning rate factor after a non-improving epoch");
  tr.add("batch", 1, "sentences per update");
  tr.add("init_range", 0.1, "uniform initialization range (0 gives a zero-weight model)");
  tr.add("no_shuffle", false, "keep the corpus order");
  tr.add("seed", 1, "initialization and shuffling seed");
  tr.add("log", "", "also write the epoch log as TSV here");
  tr.add("out", "model.ckpt", "checkpoint path");

  auto& sc = add("score", "Compute per-token surprisal for a test suite", cmd_score);
  sc.add("model", "", "checkpoint");
  sc.add("suite", "", "test suite JSON");
  sc.add("tag", "", "model name in the records (default: architecture)");
  sc.add("action_beam", 100, "action beam size");
  sc.add("word_beam", 10, "word beam size");
  sc.add("max_structural", 8, "structural actions allowed between two words");
  sc.add("fallback_factor", 4, "action beam multiplier for the single retry after a beam failure");
  sc.add("workers", 1, "scoring threads");
  sc.add("out", "records.tsv", "records file");

  auto& an = add("analyze", "Run the suite's analysis on surprisal records", cmd_analyze);
  an.add("records", json::array(), "records file(s); may come from other tools");
  an.add("suite", "", "test suite JSON");
  an.add("model", json::array(), "model tags to analyze (default: all)");
  an.add("regions", json::array(), "regions to sum (default: the suite's measured regions)");
  an.add("shuffles", 10000, "permutation test shuffles");
  an.add("seed", 1, "permutation seed");
  an.add("out", "analysis.json", "summary JSON");
  an.add("items_out", "", "per-item TSV (default: next to the summary)");

  auto& rp = add("report", "Render figures and tables from analysis summaries", cmd_report);
  rp.add("analysis", json::array(), "analysis JSON file(s)");
  rp.add("out", "report", "output directory");

  auto& cd = add("count-deps", "Count filler-gap dependencies by gap position", cmd_count_deps);
  cd.add("treebank", json::array(), "bracketed treebank file(s) with traces");
  cd.add("fillers", json::array({"who", "what"}), "filler words that get their own column");
  cd.add("no_double_object", false, "do not treat the first of two NP objects as an indirect object");
  cd.add("no_dative_pp", false, "do not treat to/for PP gaps as indirect objects");
  cd.add("out", "", "TSV path (default: standard output)");

  auto& vb = add("verify-beam", "Check how often gold parses survive word-synchronous beam search", cmd_verify_beam);
  vb.add("model", "", "checkpoint of a structured model");
  vb.add("gold", "", "bracketed trees or oracle action lines");
  vb.add("action_beam", 100, "action beam size");
  vb.add("word_beam", 10, "word beam size");
  vb.add("max_structural", 8, "structural actions allowed between two words");
  vb.add("limit", 0, "check at most this many sentences (0: all)");
  vb.add("out", "", "summary JSON path (default: standard output)");

  std::vector<std::string> argv_store{"synlm"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_store) argv.push_back(a.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  for (auto& [name, c] : commands) {
    if (!c.app->parsed()) continue;
    try {
      const json cfg = c.params->resolve(name);
      return c.fn(cfg, out, err);
    } catch (const UsageError& e) {
      err << "synlm " << name << ": " << e.what() << "\n";
      return kUsage;
    } catch (const Error& e) {
      err << "synlm " << name << ": " << e.what() << "\n";
      return e.kind() == ErrorKind::kNumerical ? kNumericalError : kDataError;
    } catch (const std::exception& e) {
      err << "synlm " << name << ": " << e.what() << "\n";
      return kDataError;
    }
  }
  return kUsage;
}

int main_entry(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace synlm::cli
