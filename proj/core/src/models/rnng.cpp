#include <algorithm>
#include <optional>

#include "synlm/errors.hpp"
#include "synlm/models/architectures.hpp"
#include "synlm/numcore/ops.hpp"

namespace synlm::models {

namespace {

// One stack element together with the stack-LSTM state after pushing it.
// The chain of `below` links is the persistent spine that REDUCE rewinds to.
struct StackNode {
  num::Var embedding;
  num::LstmState lstm;
  std::optional<std::size_t> open_label;  // set while a nonterminal is open
  std::shared_ptr<const StackNode> below;
  std::size_t depth = 0;  // the guard sits at depth 0
};

struct RnngState : StateImpl {
  std::shared_ptr<const StackNode> top;
  num::LstmState term;
  num::LstmState history;
};

}  // namespace

Rnng::Rnng(ModelConfig config, tb::Vocabulary vocab, std::vector<std::string> labels)
    : LanguageModel(config, std::move(vocab), std::move(labels)) {
  const std::size_t v = vocab_.size(), l = labels_.size(), e = config_.word_dim, h = config_.hidden_dim;
  word_emb_ = params_.add("rnng.word_emb", {v, e});
  nt_emb_ = params_.add("rnng.nt_emb", {l, e});
  compose_nt_emb_ = params_.add("rnng.compose_nt_emb", {l, e});
  action_emb_ = params_.add("rnng.action_emb", {action_count(), e});
  stack_guard_ = params_.add("rnng.stack_guard", {e});
  term_start_ = params_.add("rnng.term_start", {e});
  action_start_ = params_.add("rnng.action_start", {e});
  stack_lstm_ = num::StackedLstm(params_, "rnng.stack_lstm", config_.layers, e, h);
  term_lstm_ = num::StackedLstm(params_, "rnng.term_lstm", config_.layers, e, h);
  action_lstm_ = num::StackedLstm(params_, "rnng.action_lstm", config_.layers, e, h);
  compose_ = num::ComposeParams::create(params_, "rnng.compose", e);
  stack_proj_ = params_.add("rnng.mlp.stack", {h, h});
  term_proj_ = params_.add("rnng.mlp.term", {h, h});
  action_proj_ = params_.add("rnng.mlp.action", {h, h});
  hidden_bias_ = params_.add("rnng.mlp.bias", {h}, num::InitKind::kZero);
  action_weight_ = params_.add("rnng.action_out.weight", {action_count(), h});
  action_bias_ = params_.add("rnng.action_out.bias", {action_count()}, num::InitKind::kZero);
  word_weight_ = params_.add("rnng.word_out.weight", {v, h});
  word_bias_ = params_.add("rnng.word_out.bias", {v}, num::InitKind::kZero);
}

std::shared_ptr<const StateImpl> Rnng::start(const num::DropoutContext* dropout) const {
  auto s = std::make_shared<RnngState>();
  auto guard = std::make_shared<StackNode>();
  guard->embedding = stack_guard_;
  guard->lstm = stack_lstm_.step(stack_lstm_.initial_state(), stack_guard_, dropout);
  s->top = std::move(guard);
  s->term = term_lstm_.step(term_lstm_.initial_state(), term_start_, dropout);
  s->history = action_lstm_.step(action_lstm_.initial_state(), action_start_, dropout);
  return s;
}

std::size_t Rnng::stack_depth(const ScorerState& state) const {
  return static_cast<const RnngState&>(*state.impl).top->depth;
}

num::Var Rnng::features(const StateImpl& state, const num::DropoutContext* dropout) const {
  const auto& s = static_cast<const RnngState&>(state);
  const num::Var hidden = num::relu(num::affine(hidden_bias_, {{stack_proj_, s.top->lstm.output()},
                                                               {term_proj_, s.term.output()},
                                                               {action_proj_, s.history.output()}}));
  return num::maybe_dropout(hidden, dropout);
}

num::Var Rnng::action_logits(const num::Var& f) const { return num::affine(action_bias_, {{action_weight_, f}}); }

num::Var Rnng::word_logits(const num::Var& f) const { return num::affine(word_bias_, {{word_weight_, f}}); }

std::shared_ptr<const StateImpl> Rnng::step(const StateImpl& state, const Action& action,
                                            const num::DropoutContext* dropout) const {
  const auto& prev = static_cast<const RnngState&>(state);
  auto s = std::make_shared<RnngState>();
  s->term = prev.term;
  s->history = action_lstm_.step(prev.history, num::lookup(action_emb_, action_index(action)), dropout);

  auto push = [&](const std::shared_ptr<const StackNode>& base, num::Var emb, std::optional<std::size_t> open) {
    auto node = std::make_shared<StackNode>();
    node->lstm = stack_lstm_.step(base->lstm, emb, dropout);
    node->embedding = std::move(emb);
    node->open_label = open;
    node->below = base;
    node->depth = base->depth + 1;
    return node;
  };

  switch (action.kind) {
    case ActionKind::kNT:
      s->top = push(prev.top, num::lookup(nt_emb_, action.id), action.id);
      break;
    case ActionKind::kGen: {
      num::Var w = num::lookup(word_emb_, action.id);
      s->term = term_lstm_.step(prev.term, w, dropout);
      s->top = push(prev.top, std::move(w), std::nullopt);
      break;
    }
    case ActionKind::kReduce: {
      std::vector<num::Var> children;
      const StackNode* node = prev.top.get();
      while (node != nullptr && !node->open_label) {
        if (node->depth == 0) break;
        children.push_back(node->embedding);
        node = node->below.get();
      }
      if (node == nullptr || !node->open_label) throw InvalidReduceError("REDUCE without an open nonterminal");
      std::reverse(children.begin(), children.end());
      num::Var composed = num::bilstm_compose(compose_, children, num::lookup(compose_nt_emb_, *node->open_label),
                                              dropout);
      s->top = push(node->below, std::move(composed), std::nullopt);
      break;
    }
  }
  return s;
}

}  // namespace synlm::models
