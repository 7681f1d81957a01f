#pragma once

#include <memory>
#include <string>

#include <nlohmann/json.hpp>

#include "synlm/models/language_model.hpp"

namespace synlm::models {

/// Checkpoint metadata describing `model`: architecture tag, dimensions,
/// caps, vocabulary, labels and the vocabulary hash. `extra` is merged in
/// under the "info" key.
nlohmann::json model_metadata(const LanguageModel& model, const nlohmann::json& extra = {});

void save_model(const std::string& path, const LanguageModel& model, const nlohmann::json& extra = {});
std::unique_ptr<LanguageModel> load_model(const std::string& path);
/// Metadata only, without the tensor payload.
nlohmann::json peek_model(const std::string& path);

std::string vocabulary_hash(const tb::Vocabulary& vocab);

}  // namespace synlm::models
