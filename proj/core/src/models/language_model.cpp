#include "synlm/models/language_model.hpp"

#include <cmath>

#include "synlm/errors.hpp"
#include "synlm/numcore/ops.hpp"

namespace synlm::models {

std::string to_string(Architecture arch) {
  switch (arch) {
    case Architecture::kLstmLm:
      return "lstm-lm";
    case Architecture::kActionLstm:
      return "action-lstm";
    case Architecture::kRnng:
      return "rnng";
  }
  return "?";
}

Architecture architecture_from_string(const std::string& name) {
  if (name == "lstm-lm") return Architecture::kLstmLm;
  if (name == "action-lstm") return Architecture::kActionLstm;
  if (name == "rnng") return Architecture::kRnng;
  throw Error(ErrorKind::kData, "unknown architecture '" + name + "' (expected lstm-lm, action-lstm or rnng)");
}

std::vector<Action> ScorerState::actions() const {
  std::vector<Action> out;
  for (const HistoryNode* n = history.get(); n != nullptr; n = n->previous.get()) out.push_back(n->action);
  return {out.rbegin(), out.rend()};
}

double NextDistribution::log_prob(const Action& action) const {
  switch (action.kind) {
    case ActionKind::kNT:
      if (action.id >= nt.size()) return kNegInf;
      return nt[action.id];
    case ActionKind::kGen:
      if (gen == kNegInf || action.id >= word.size()) return kNegInf;
      return gen + word[action.id];
    case ActionKind::kReduce:
      return reduce;
  }
  return kNegInf;
}

LanguageModel::LanguageModel(ModelConfig config, tb::Vocabulary vocab, std::vector<std::string> labels)
    : config_(config), vocab_(std::move(vocab)), labels_(std::move(labels)) {
  if (vocab_.size() == 0) throw Error(ErrorKind::kData, "model needs a non-empty vocabulary");
  if (structured() && labels_.empty()) throw Error(ErrorKind::kData, "model needs at least one nonterminal label");
  if (!structured()) labels_.clear();
}

LegalMask LanguageModel::legal(const ScorerState& state) const {
  if (!structured()) return LegalMask{false, true, false};
  return legal_actions(state.counters, config_.caps);
}

std::size_t LanguageModel::action_index(const Action& action) const {
  switch (action.kind) {
    case ActionKind::kNT:
      return action.id;
    case ActionKind::kGen:
      return labels_.size();
    case ActionKind::kReduce:
      return labels_.size() + 1;
  }
  return 0;
}

std::vector<std::uint8_t> LanguageModel::mask_vector(const LegalMask& mask) const {
  std::vector<std::uint8_t> out(action_count(), mask.nt ? 1 : 0);
  out[labels_.size()] = mask.gen ? 1 : 0;
  out[labels_.size() + 1] = mask.reduce ? 1 : 0;
  return out;
}

void LanguageModel::check_ids(const Action& action) const {
  if (action.kind == ActionKind::kGen && action.id >= vocab_.size()) {
    throw IndexError("word id " + std::to_string(action.id) + " out of range for vocabulary of size " +
                     std::to_string(vocab_.size()));
  }
  if (action.kind == ActionKind::kNT && action.id >= labels_.size()) {
    throw IndexError("nonterminal id " + std::to_string(action.id) + " out of range for " +
                     std::to_string(labels_.size()) + " labels");
  }
}

ScorerState LanguageModel::initial_state() const {
  ScorerState s;
  s.impl = start(nullptr);
  return s;
}

NextDistribution LanguageModel::next(const ScorerState& state) const {
  NextDistribution dist;
  const LegalMask mask = legal(state);
  if (!mask.any()) return dist;
  const num::Var f = features(*state.impl, nullptr);
  if (structured()) {
    const num::Var logits = action_logits(f);
    const auto legal_vec = mask_vector(mask);
    const auto lp = num::log_softmax_values(logits->values, legal_vec);
    dist.nt.assign(lp.begin(), lp.begin() + static_cast<std::ptrdiff_t>(labels_.size()));
    dist.gen = lp[labels_.size()];
    dist.reduce = lp[labels_.size() + 1];
  } else {
    dist.gen = 0.0;
  }
  if (mask.gen) dist.word = num::log_softmax_values(word_logits(f)->values);
  return dist;
}

ScorerState LanguageModel::advance(const ScorerState& state, const Action& action) const {
  return advance(state, action, next(state));
}

ScorerState LanguageModel::advance(const ScorerState& state, const Action& action,
                                   const NextDistribution& dist) const {
  check_ids(action);
  ScorerState out;
  if (structured()) {
    out.counters = apply_action(state.counters, action, config_.caps);
  } else {
    if (action.kind != ActionKind::kGen) {
      throw TransitionError("the word-level model only generates words", state.counters.actions);
    }
    out.counters = state.counters;
    ++out.counters.actions;
    ++out.counters.words;
  }
  const double lp = dist.log_prob(action);
  if (!std::isfinite(lp)) {
    throw NumericalError("non-finite log probability for action at position " +
                         std::to_string(state.counters.actions));
  }
  out.log_prob = state.log_prob + lp;
  out.impl = step(*state.impl, action, nullptr);
  out.history = std::make_shared<const HistoryNode>(HistoryNode{action, state.history});
  return out;
}

num::Var LanguageModel::sequence_loss(std::span<const Action> events, const num::DropoutContext* dropout) const {
  std::shared_ptr<const StateImpl> state = start(dropout);
  TransitionCounters counters;
  std::vector<num::Var> terms;
  for (const Action& a : events) {
    check_ids(a);
    const num::Var f = features(*state, dropout);
    if (structured()) {
      const LegalMask mask = legal_actions(counters, config_.caps);
      counters = apply_action(counters, a, config_.caps);
      const auto legal_vec = mask_vector(mask);
      terms.push_back(num::softmax_cross_entropy(action_logits(f), action_index(a), legal_vec));
    } else if (a.kind != ActionKind::kGen) {
      throw TransitionError("the word-level model only generates words", counters.actions);
    }
    if (a.kind == ActionKind::kGen) terms.push_back(num::softmax_cross_entropy(word_logits(f), a.id));
    state = step(*state, a, dropout);
  }
  if (structured() && !events.empty() && !counters.complete()) {
    throw TransitionError("action sequence ends with open nonterminals", events.size());
  }
  if (terms.empty()) return num::scalar(0.0);
  return num::add_n(terms);
}

double LanguageModel::sequence_log_prob(std::span<const Action> events) const {
  return -sequence_loss(events, nullptr)->values[0];
}

std::size_t LanguageModel::label_id(const std::string& label) const {
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (labels_[i] == label) return i;
  }
  throw IndexError("unknown nonterminal label '" + label + "'");
}

std::vector<Action> LanguageModel::events_for(const tb::ActionSequence& actions) const {
  std::vector<Action> out;
  std::size_t position = 0;
  for (const auto& a : actions) {
    switch (a.kind) {
      case ActionKind::kNT:
        if (structured()) out.push_back(Action::nt(label_id(a.symbol)));
        break;
      case ActionKind::kGen:
        out.push_back(Action::gen(vocab_.unkify(a.symbol, position++)));
        break;
      case ActionKind::kReduce:
        if (structured()) out.push_back(Action::reduce());
        break;
    }
  }
  return out;
}

std::vector<Action> LanguageModel::events_for_words(const std::vector<std::string>& words) const {
  std::vector<Action> out;
  for (std::size_t i = 0; i < words.size(); ++i) out.push_back(Action::gen(vocab_.unkify(words[i], i)));
  return out;
}

}  // namespace synlm::models
