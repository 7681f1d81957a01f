#include "synlm/models/model_io.hpp"

#include <filesystem>
#include <fstream>

#include "synlm/errors.hpp"
#include "synlm/models/architectures.hpp"
#include "synlm/numcore/checkpoint.hpp"
#include "synlm/util/hash.hpp"

namespace synlm::models {

std::unique_ptr<LanguageModel> make_model(const ModelConfig& config, tb::Vocabulary vocab,
                                          std::vector<std::string> labels) {
  switch (config.arch) {
    case Architecture::kLstmLm:
      return std::make_unique<LstmLm>(config, std::move(vocab));
    case Architecture::kActionLstm:
      return std::make_unique<ActionLstm>(config, std::move(vocab), std::move(labels));
    case Architecture::kRnng:
      return std::make_unique<Rnng>(config, std::move(vocab), std::move(labels));
  }
  throw Error(ErrorKind::kData, "unknown architecture");
}

std::string vocabulary_hash(const tb::Vocabulary& vocab) {
  std::string joined;
  for (const auto& t : vocab.tokens()) {
    joined += t;
    joined.push_back('\n');
  }
  return util::sha256_hex(joined);
}

nlohmann::json model_metadata(const LanguageModel& model, const nlohmann::json& extra) {
  const ModelConfig& c = model.config();
  nlohmann::json meta;
  meta["architecture"] = to_string(c.arch);
  meta["word_dim"] = c.word_dim;
  meta["hidden_dim"] = c.hidden_dim;
  meta["layers"] = c.layers;
  meta["dropout"] = c.dropout;
  meta["max_open"] = c.caps.max_open;
  meta["max_actions"] = c.caps.max_actions;
  meta["vocabulary"] = model.vocab().tokens();
  meta["vocabulary_sha256"] = vocabulary_hash(model.vocab());
  meta["labels"] = model.labels();
  if (!extra.is_null()) meta["info"] = extra;
  return meta;
}

void save_model(const std::string& path, const LanguageModel& model, const nlohmann::json& extra) {
  const std::filesystem::path target(path);
  if (target.has_parent_path()) std::filesystem::create_directories(target.parent_path());
  const std::filesystem::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::kData, "cannot write checkpoint '" + tmp.string() + "'");
    num::write_checkpoint(out, model_metadata(model, extra), model.params());
    out.flush();
    if (!out) throw Error(ErrorKind::kData, "failed writing checkpoint '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, target);
}

nlohmann::json peek_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kData, "cannot open checkpoint '" + path + "'");
  return num::read_checkpoint_metadata(in);
}

std::unique_ptr<LanguageModel> load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kData, "cannot open checkpoint '" + path + "'");
  const nlohmann::json meta = num::read_checkpoint_metadata(in);
  ModelConfig config;
  try {
    config.arch = architecture_from_string(meta.at("architecture").get<std::string>());
    config.word_dim = meta.at("word_dim").get<std::size_t>();
    config.hidden_dim = meta.at("hidden_dim").get<std::size_t>();
    config.layers = meta.at("layers").get<std::size_t>();
    config.dropout = meta.at("dropout").get<double>();
    config.caps.max_open = meta.at("max_open").get<std::size_t>();
    config.caps.max_actions = meta.at("max_actions").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kData, "checkpoint '" + path + "' has incomplete metadata: " + e.what());
  }
  auto vocab = tb::Vocabulary::from_tokens(meta.at("vocabulary").get<std::vector<std::string>>());
  if (meta.contains("vocabulary_sha256")) {
    const std::string recorded = meta["vocabulary_sha256"].get<std::string>();
    const std::string actual = vocabulary_hash(vocab);
    if (recorded != actual) {
      throw ProvenanceError("checkpoint '" + path + "' vocabulary hash mismatch: recorded " + recorded +
                            ", computed " + actual);
    }
  }
  auto model = make_model(config, std::move(vocab), meta.at("labels").get<std::vector<std::string>>());
  num::read_checkpoint_tensors(in, meta, model->params());
  return model;
}

}  // namespace synlm::models
