#include "synlm/models/architectures.hpp"
#include "synlm/numcore/ops.hpp"

namespace synlm::models {

namespace {

struct LmState : StateImpl {
  num::LstmState lstm;
};

}  // namespace

LstmLm::LstmLm(ModelConfig config, tb::Vocabulary vocab) : LanguageModel(config, std::move(vocab), {}) {
  const std::size_t v = vocab_.size(), e = config_.word_dim, h = config_.hidden_dim;
  embedding_ = params_.add("lm.embedding", {v, e});
  start_ = params_.add("lm.start", {e});
  lstm_ = num::StackedLstm(params_, "lm.lstm", config_.layers, e, h);
  out_weight_ = params_.add("lm.out.weight", {v, h});
  out_bias_ = params_.add("lm.out.bias", {v}, num::InitKind::kZero);
}

std::shared_ptr<const StateImpl> LstmLm::start(const num::DropoutContext* dropout) const {
  auto s = std::make_shared<LmState>();
  s->lstm = lstm_.step(lstm_.initial_state(), start_, dropout);
  return s;
}

num::Var LstmLm::features(const StateImpl& state, const num::DropoutContext* dropout) const {
  return num::maybe_dropout(static_cast<const LmState&>(state).lstm.output(), dropout);
}

num::Var LstmLm::word_logits(const num::Var& f) const { return num::affine(out_bias_, {{out_weight_, f}}); }

std::shared_ptr<const StateImpl> LstmLm::step(const StateImpl& state, const Action& action,
                                              const num::DropoutContext* dropout) const {
  auto s = std::make_shared<LmState>();
  s->lstm = lstm_.step(static_cast<const LmState&>(state).lstm, num::lookup(embedding_, action.id), dropout);
  return s;
}

}  // namespace synlm::models
