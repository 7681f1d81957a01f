#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "synlm/models/language_model.hpp"
#include "synlm/numcore/optimizer.hpp"

namespace synlm::models {

using EventCorpus = std::vector<std::vector<Action>>;

struct TrainConfig {
  num::OptimizerConfig optimizer;
  std::size_t max_epochs = 30;
  std::size_t patience = 2;       // epochs without dev improvement before stopping
  double lr_decay = 0.5;          // applied on every non-improving epoch
  std::size_t batch_size = 1;     // sentences per update
  std::uint64_t seed = 1;
  bool shuffle = true;
};

struct EpochRecord {
  std::size_t epoch = 0;
  double train_ppl = 0.0;
  double dev_ppl = 0.0;
  double lr = 0.0;
};

struct TrainResult {
  std::vector<EpochRecord> log;
  std::size_t best_epoch = 0;  // 0: the initial parameters were never beaten
  double best_dev_ppl = 0.0;
  std::size_t skipped = 0;     // sentences outside the transition caps
  bool diverged = false;
  std::string divergence;
};

/// Per-word perplexity exp(total NLL / generated words). For the structured
/// models the NLL is the joint one over actions and words.
double perplexity(const LanguageModel& model, const EventCorpus& corpus);

/// Minimizes the summed stepwise cross-entropy with early stopping on dev
/// perplexity. The best parameters seen are left in the model, also after
/// a divergence, which is reported rather than thrown.
TrainResult train(LanguageModel& model, const EventCorpus& train_set, const EventCorpus& dev_set,
                  const TrainConfig& config, const std::function<void(const EpochRecord&)>& on_epoch = {});

/// Drops sequences that violate the model's transition caps; returns the
/// number dropped.
std::size_t filter_trainable(const LanguageModel& model, EventCorpus& corpus);

}  // namespace synlm::models
