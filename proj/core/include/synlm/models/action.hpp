#pragma once

#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "synlm/treebank/actions.hpp"

namespace synlm::models {

using tb::ActionKind;

/// Id-based transition event. NT carries a label id and GEN a word id. The
/// word-level LSTM language model only ever sees GEN events.
struct Action {
  ActionKind kind = ActionKind::kReduce;
  std::size_t id = 0;

  static Action nt(std::size_t label) { return {ActionKind::kNT, label}; }
  static Action gen(std::size_t word) { return {ActionKind::kGen, word}; }
  static Action reduce() { return {ActionKind::kReduce, 0}; }

  friend bool operator==(const Action&, const Action&) = default;
};

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// Hard limits that keep generation finite for any parameter setting.
struct TransitionCaps {
  std::size_t max_open = 60;
  std::size_t max_actions = 300;
};

struct TransitionCounters {
  std::size_t opens = 0;
  std::size_t actions = 0;
  std::size_t words = 0;
  bool last_was_nt = false;

  bool complete() const { return actions > 0 && opens == 0; }
};

struct LegalMask {
  bool nt = false;  // applies to every label alike
  bool gen = false;
  bool reduce = false;

  bool any() const { return nt || gen || reduce; }
};

/// Legality of the three action families:
///  - the first action must be NT; nothing is legal once the root closes;
///  - GEN and REDUCE need an open nonterminal; REDUCE also needs the top
///    constituent to have at least one completed element;
///  - NT needs opens < max_open;
///  - every action must leave enough of the max_actions budget to close all
///    open constituents (one GEN if the top constituent is empty, then one
///    REDUCE per open nonterminal).
LegalMask legal_actions(const TransitionCounters& counters, const TransitionCaps& caps);

bool is_legal(const LegalMask& mask, const Action& action);

/// Counter update for `action`; throws TransitionError when illegal.
TransitionCounters apply_action(const TransitionCounters& counters, const Action& action,
                                const TransitionCaps& caps);

}  // namespace synlm::models
