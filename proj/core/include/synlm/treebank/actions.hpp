#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "synlm/treebank/tree.hpp"

namespace synlm::tb {

enum class ActionKind : std::uint8_t { kNT, kGen, kReduce };

/// Generative transition over symbols: NT(label), GEN(word), REDUCE.
struct TreeAction {
  ActionKind kind = ActionKind::kReduce;
  std::string symbol;

  static TreeAction nt(std::string label) { return {ActionKind::kNT, std::move(label)}; }
  static TreeAction gen(std::string word) { return {ActionKind::kGen, std::move(word)}; }
  static TreeAction reduce() { return {ActionKind::kReduce, {}}; }

  std::string to_string() const;
  friend bool operator==(const TreeAction&, const TreeAction&) = default;
};

using ActionSequence = std::vector<TreeAction>;

/// Top-down, left-to-right generative oracle. The root must be a nonterminal.
ActionSequence tree_to_actions(const Tree& tree);

/// Inverse of tree_to_actions. Throws TransitionError naming the first
/// illegal action (or the end of input for an unfinished sequence).
Tree actions_to_tree(std::span<const TreeAction> actions);

struct PrefixCheck {
  bool valid = true;
  bool complete = false;
  std::size_t first_illegal = 0;  // meaningful when !valid
  std::string reason;
};

/// Checks that `actions` can be extended to a well-formed sequence.
PrefixCheck check_action_prefix(std::span<const TreeAction> actions);

std::string format_actions(std::span<const TreeAction> actions);
/// Parses the space-separated form written by format_actions.
ActionSequence parse_actions(const std::string& line);

}  // namespace synlm::tb
