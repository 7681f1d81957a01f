#pragma once

#include "synlm/models/language_model.hpp"

namespace synlm::models {

/// Sequential word-level LSTM language model.
class LstmLm : public LanguageModel {
 public:
  LstmLm(ModelConfig config, tb::Vocabulary vocab);

 protected:
  std::shared_ptr<const StateImpl> start(const num::DropoutContext* dropout) const override;
  num::Var features(const StateImpl& state, const num::DropoutContext* dropout) const override;
  num::Var action_logits(const num::Var&) const override { return nullptr; }
  num::Var word_logits(const num::Var& features) const override;
  std::shared_ptr<const StateImpl> step(const StateImpl& state, const Action& action,
                                        const num::DropoutContext* dropout) const override;

 private:
  num::Var embedding_, start_, out_weight_, out_bias_;
  num::StackedLstm lstm_;
};

/// A single LSTM over the flat action sequence: no stack, no composition.
class ActionLstm : public LanguageModel {
 public:
  ActionLstm(ModelConfig config, tb::Vocabulary vocab, std::vector<std::string> labels);

 protected:
  std::shared_ptr<const StateImpl> start(const num::DropoutContext* dropout) const override;
  num::Var features(const StateImpl& state, const num::DropoutContext* dropout) const override;
  num::Var action_logits(const num::Var& features) const override;
  num::Var word_logits(const num::Var& features) const override;
  std::shared_ptr<const StateImpl> step(const StateImpl& state, const Action& action,
                                        const num::DropoutContext* dropout) const override;

 private:
  num::Var word_emb_, nt_emb_, reduce_emb_, start_;
  num::Var action_weight_, action_bias_, word_weight_, word_bias_;
  num::StackedLstm lstm_;
};

/// Generative recurrent neural network grammar: stack LSTM with composition
/// on REDUCE, terminal LSTM over generated words, action-history LSTM.
class Rnng : public LanguageModel {
 public:
  Rnng(ModelConfig config, tb::Vocabulary vocab, std::vector<std::string> labels);

  std::size_t stack_depth(const ScorerState& state) const override;

 protected:
  std::shared_ptr<const StateImpl> start(const num::DropoutContext* dropout) const override;
  num::Var features(const StateImpl& state, const num::DropoutContext* dropout) const override;
  num::Var action_logits(const num::Var& features) const override;
  num::Var word_logits(const num::Var& features) const override;
  std::shared_ptr<const StateImpl> step(const StateImpl& state, const Action& action,
                                        const num::DropoutContext* dropout) const override;

 private:
  num::Var word_emb_, nt_emb_, compose_nt_emb_, action_emb_;
  num::Var stack_guard_, term_start_, action_start_;
  num::Var stack_proj_, term_proj_, action_proj_, hidden_bias_;
  num::Var action_weight_, action_bias_, word_weight_, word_bias_;
  num::StackedLstm stack_lstm_, term_lstm_, action_lstm_;
  num::ComposeParams compose_;
};

}  // namespace synlm::models
