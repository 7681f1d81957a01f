#include "synlm/models/action.hpp"

#include "synlm/errors.hpp"

namespace synlm::models {

namespace {

// Fewest actions that can close every open constituent.
std::size_t closing_cost(std::size_t opens, bool last_was_nt) { return opens + (last_was_nt ? 1 : 0); }

bool fits(const TransitionCounters& c, const TransitionCaps& caps, std::size_t opens_after, bool nt_after) {
  return c.actions + 1 + closing_cost(opens_after, nt_after) <= caps.max_actions;
}

}  // namespace

LegalMask legal_actions(const TransitionCounters& c, const TransitionCaps& caps) {
  LegalMask m;
  if (c.complete()) return m;
  if (c.actions == 0) {
    m.nt = caps.max_open > 0 && fits(c, caps, 1, true);
    return m;
  }
  m.nt = c.opens < caps.max_open && fits(c, caps, c.opens + 1, true);
  m.gen = c.opens > 0 && fits(c, caps, c.opens, false);
  m.reduce = c.opens > 0 && !c.last_was_nt;
  return m;
}

bool is_legal(const LegalMask& mask, const Action& action) {
  switch (action.kind) {
    case ActionKind::kNT:
      return mask.nt;
    case ActionKind::kGen:
      return mask.gen;
    case ActionKind::kReduce:
      return mask.reduce;
  }
  return false;
}

TransitionCounters apply_action(const TransitionCounters& counters, const Action& action,
                                const TransitionCaps& caps) {
  if (!is_legal(legal_actions(counters, caps), action)) {
    const char* name = action.kind == ActionKind::kNT ? "NT" : action.kind == ActionKind::kGen ? "GEN" : "REDUCE";
    throw TransitionError(std::string("illegal ") + name + " at action " + std::to_string(counters.actions) +
                              " (open nonterminals: " + std::to_string(counters.opens) + ")",
                          counters.actions);
  }
  TransitionCounters c = counters;
  ++c.actions;
  c.last_was_nt = action.kind == ActionKind::kNT;
  if (action.kind == ActionKind::kNT) ++c.opens;
  if (action.kind == ActionKind::kGen) ++c.words;
  if (action.kind == ActionKind::kReduce) --c.opens;
  return c;
}

}  // namespace synlm::models
