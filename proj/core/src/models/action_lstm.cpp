#include "synlm/models/architectures.hpp"
#include "synlm/numcore/ops.hpp"

namespace synlm::models {

namespace {

struct FlatState : StateImpl {
  num::LstmState lstm;
};

}  // namespace

ActionLstm::ActionLstm(ModelConfig config, tb::Vocabulary vocab, std::vector<std::string> labels)
    : LanguageModel(config, std::move(vocab), std::move(labels)) {
  const std::size_t v = vocab_.size(), l = labels_.size(), e = config_.word_dim, h = config_.hidden_dim;
  word_emb_ = params_.add("alstm.word_emb", {v, e});
  nt_emb_ = params_.add("alstm.nt_emb", {l, e});
  reduce_emb_ = params_.add("alstm.reduce_emb", {e});
  start_ = params_.add("alstm.start", {e});
  lstm_ = num::StackedLstm(params_, "alstm.lstm", config_.layers, e, h);
  action_weight_ = params_.add("alstm.action_out.weight", {action_count(), h});
  action_bias_ = params_.add("alstm.action_out.bias", {action_count()}, num::InitKind::kZero);
  word_weight_ = params_.add("alstm.word_out.weight", {v, h});
  word_bias_ = params_.add("alstm.word_out.bias", {v}, num::InitKind::kZero);
}

std::shared_ptr<const StateImpl> ActionLstm::start(const num::DropoutContext* dropout) const {
  auto s = std::make_shared<FlatState>();
  s->lstm = lstm_.step(lstm_.initial_state(), start_, dropout);
  return s;
}

num::Var ActionLstm::features(const StateImpl& state, const num::DropoutContext* dropout) const {
  return num::maybe_dropout(static_cast<const FlatState&>(state).lstm.output(), dropout);
}

num::Var ActionLstm::action_logits(const num::Var& f) const {
  return num::affine(action_bias_, {{action_weight_, f}});
}

num::Var ActionLstm::word_logits(const num::Var& f) const { return num::affine(word_bias_, {{word_weight_, f}}); }

std::shared_ptr<const StateImpl> ActionLstm::step(const StateImpl& state, const Action& action,
                                                  const num::DropoutContext* dropout) const {
  num::Var x;
  switch (action.kind) {
    case ActionKind::kNT:
      x = num::lookup(nt_emb_, action.id);
      break;
    case ActionKind::kGen:
      x = num::lookup(word_emb_, action.id);
      break;
    case ActionKind::kReduce:
      x = reduce_emb_;
      break;
  }
  auto s = std::make_shared<FlatState>();
  s->lstm = lstm_.step(static_cast<const FlatState&>(state).lstm, x, dropout);
  return s;
}

}  // namespace synlm::models
