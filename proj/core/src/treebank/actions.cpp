#include "synlm/treebank/actions.hpp"

#include <sstream>

#include "synlm/errors.hpp"

namespace synlm::tb {

namespace {

void emit(const Tree& t, ActionSequence& out) {
  if (t.is_terminal()) {
    out.push_back(TreeAction::gen(t.label));
    return;
  }
  out.push_back(TreeAction::nt(t.label));
  for (const Tree& c : t.children) emit(c, out);
  out.push_back(TreeAction::reduce());
}

}  // namespace

std::string TreeAction::to_string() const {
  switch (kind) {
    case ActionKind::kNT:
      return "NT(" + symbol + ")";
    case ActionKind::kGen:
      return "GEN(" + symbol + ")";
    case ActionKind::kReduce:
      return "REDUCE";
  }
  return "?";
}

ActionSequence tree_to_actions(const Tree& tree) {
  if (tree.is_terminal()) throw TransitionError("tree_to_actions: root must be a nonterminal", 0);
  ActionSequence out;
  emit(tree, out);
  return out;
}

PrefixCheck check_action_prefix(std::span<const TreeAction> actions) {
  // children[k] counts completed elements of the k-th open constituent.
  std::vector<std::size_t> children;
  PrefixCheck result;
  auto fail = [&](std::size_t i, std::string why) {
    result.valid = false;
    result.first_illegal = i;
    result.reason = std::move(why);
    return result;
  };
  for (std::size_t i = 0; i < actions.size(); ++i) {
    const TreeAction& a = actions[i];
    if (i == 0 && a.kind != ActionKind::kNT) return fail(0, "first action must be NT");
    if (i > 0 && children.empty()) return fail(i, "action after the root constituent was closed");
    switch (a.kind) {
      case ActionKind::kNT:
        children.push_back(0);
        break;
      case ActionKind::kGen:
        if (children.empty()) return fail(i, "GEN with no open nonterminal");
        ++children.back();
        break;
      case ActionKind::kReduce:
        if (children.empty()) return fail(i, "REDUCE with no open nonterminal");
        if (children.back() == 0) return fail(i, "REDUCE of an empty constituent");
        children.pop_back();
        if (!children.empty()) ++children.back();
        break;
    }
  }
  result.complete = !actions.empty() && children.empty();
  return result;
}

Tree actions_to_tree(std::span<const TreeAction> actions) {
  if (actions.empty()) throw TransitionError("actions_to_tree: empty action sequence", 0);
  const PrefixCheck check = check_action_prefix(actions);
  if (!check.valid) {
    throw TransitionError("actions_to_tree: illegal action " + actions[check.first_illegal].to_string() +
                              " at position " + std::to_string(check.first_illegal) + ": " + check.reason,
                          check.first_illegal);
  }
  if (!check.complete) {
    throw TransitionError("actions_to_tree: sequence ends with open nonterminals", actions.size());
  }
  std::vector<Tree> open;
  Tree root;
  for (const TreeAction& a : actions) {
    switch (a.kind) {
      case ActionKind::kNT:
        open.push_back(Tree{a.symbol, {}});
        break;
      case ActionKind::kGen:
        open.back().children.push_back(terminal(a.symbol));
        break;
      case ActionKind::kReduce: {
        Tree done = std::move(open.back());
        open.pop_back();
        if (open.empty()) {
          root = std::move(done);
        } else {
          open.back().children.push_back(std::move(done));
        }
        break;
      }
    }
  }
  return root;
}

std::string format_actions(std::span<const TreeAction> actions) {
  std::string out;
  for (std::size_t i = 0; i < actions.size(); ++i) {
    if (i) out += ' ';
    out += actions[i].to_string();
  }
  return out;
}

ActionSequence parse_actions(const std::string& line) {
  ActionSequence out;
  std::istringstream in(line);
  std::string tok;
  std::size_t offset = 0;
  while (in >> tok) {
    if (tok == "REDUCE") {
      out.push_back(TreeAction::reduce());
    } else if (tok.size() > 4 && tok.rfind("NT(", 0) == 0 && tok.back() == ')') {
      out.push_back(TreeAction::nt(tok.substr(3, tok.size() - 4)));
    } else if (tok.size() > 5 && tok.rfind("GEN(", 0) == 0 && tok.back() == ')') {
      out.push_back(TreeAction::gen(tok.substr(4, tok.size() - 5)));
    } else {
      throw ParseError("unrecognized action '" + tok + "'", offset);
    }
    offset += tok.size() + 1;
  }
  return out;
}

}  // namespace synlm::tb
