#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "synlm/models/action.hpp"
#include "synlm/numcore/lstm.hpp"
#include "synlm/numcore/parameters.hpp"
#include "synlm/treebank/vocab.hpp"

namespace synlm::models {

enum class Architecture { kLstmLm, kActionLstm, kRnng };

std::string to_string(Architecture arch);
Architecture architecture_from_string(const std::string& name);

struct ModelConfig {
  Architecture arch = Architecture::kRnng;
  std::size_t word_dim = 256;
  std::size_t hidden_dim = 256;
  std::size_t layers = 2;
  double dropout = 0.3;
  TransitionCaps caps;
};

/// Model-private recurrent payload. Never mutated once built.
struct StateImpl {
  virtual ~StateImpl() = default;
};

/// Persistent singly linked action history, shared between beam entries.
struct HistoryNode {
  Action action;
  std::shared_ptr<const HistoryNode> previous;
};

/// Value-like incremental scoring state. Advancing returns a new state and
/// leaves this one untouched.
struct ScorerState {
  std::shared_ptr<const StateImpl> impl;
  std::shared_ptr<const HistoryNode> history;
  TransitionCounters counters;
  double log_prob = 0.0;  // nats

  std::vector<Action> actions() const;
};

/// Next-event distribution in log space (nats). `nt` is indexed by label id
/// and `word` by vocabulary id; `word` holds log P(w | GEN) and is left empty
/// when GEN is illegal.
struct NextDistribution {
  std::vector<double> nt;
  double gen = kNegInf;
  double reduce = kNegInf;
  std::vector<double> word;

  double log_prob(const Action& action) const;
};

/// Shared incremental-scoring interface of the three models. Events are
/// words for the LSTM-LM and transition actions for the other two.
class LanguageModel {
 public:
  LanguageModel(ModelConfig config, tb::Vocabulary vocab, std::vector<std::string> labels);
  virtual ~LanguageModel() = default;
  LanguageModel(const LanguageModel&) = delete;
  LanguageModel& operator=(const LanguageModel&) = delete;

  Architecture arch() const { return config_.arch; }
  const ModelConfig& config() const { return config_; }
  const tb::Vocabulary& vocab() const { return vocab_; }
  const std::vector<std::string>& labels() const { return labels_; }
  bool structured() const { return config_.arch != Architecture::kLstmLm; }

  num::ParameterSet& params() { return params_; }
  const num::ParameterSet& params() const { return params_; }

  LegalMask legal(const ScorerState& state) const;

  ScorerState initial_state() const;
  NextDistribution next(const ScorerState& state) const;
  /// Throws TransitionError for illegal actions and IndexError for ids out
  /// of range.
  ScorerState advance(const ScorerState& state, const Action& action) const;
  ScorerState advance(const ScorerState& state, const Action& action, const NextDistribution& dist) const;

  /// Summed negative log-likelihood (nats) of an event sequence. Records
  /// onto the active tape, if any, so it doubles as the training loss.
  num::Var sequence_loss(std::span<const Action> events, const num::DropoutContext* dropout = nullptr) const;
  double sequence_log_prob(std::span<const Action> events) const;

  /// Elements currently on the RNNG stack (0 for the other models).
  virtual std::size_t stack_depth(const ScorerState&) const { return 0; }

  std::size_t action_index(const Action& action) const;
  std::size_t action_count() const { return labels_.size() + 2; }

  /// Oracle events for a tree: GEN-only for the LSTM-LM. Symbols are mapped
  /// through the vocabulary (unknown words) and the label inventory.
  std::vector<Action> events_for(const tb::ActionSequence& actions) const;
  std::vector<Action> events_for_words(const std::vector<std::string>& words) const;
  std::size_t label_id(const std::string& label) const;

 protected:
  virtual std::shared_ptr<const StateImpl> start(const num::DropoutContext* dropout) const = 0;
  /// Shared hidden representation from which both softmaxes are computed.
  virtual num::Var features(const StateImpl& state, const num::DropoutContext* dropout) const = 0;
  /// Logits over the action inventory; null for word-only models.
  virtual num::Var action_logits(const num::Var& features) const = 0;
  virtual num::Var word_logits(const num::Var& features) const = 0;
  virtual std::shared_ptr<const StateImpl> step(const StateImpl& state, const Action& action,
                                                const num::DropoutContext* dropout) const = 0;

  void check_ids(const Action& action) const;
  std::vector<std::uint8_t> mask_vector(const LegalMask& mask) const;

  ModelConfig config_;
  tb::Vocabulary vocab_;
  std::vector<std::string> labels_;
  num::ParameterSet params_;
};

/// Builds an untrained model of `config.arch`; parameters stay zero until
/// initialized.
std::unique_ptr<LanguageModel> make_model(const ModelConfig& config, tb::Vocabulary vocab,
                                          std::vector<std::string> labels);

}  // namespace synlm::models
