#pragma once

#include <istream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace synlm::tb {

/// Constituency tree. A node without children is a terminal whose label is
/// the word; every other node is a nonterminal.
struct Tree {
  std::string label;
  std::vector<Tree> children;

  bool is_terminal() const { return children.empty(); }
  /// Nonterminal whose only child is a terminal (a POS node in PTB data).
  bool is_preterminal() const { return children.size() == 1 && children.front().is_terminal(); }

  std::vector<std::string> yield() const;
  std::size_t node_count() const;
  std::string to_string() const;

  friend bool operator==(const Tree&, const Tree&) = default;
};

Tree terminal(std::string word);
Tree node(std::string label, std::vector<Tree> children);

/// Parses one s-expression. A wrapper with an empty label around a single
/// tree, as in "( (S ...) )", is removed. Throws ParseError with the byte
/// offset of the problem on unbalanced, empty, or childless input.
Tree parse_bracketed(std::string_view text);

struct TreeReadError {
  std::size_t line = 0;  // 1-based line where the failing tree starts
  std::string message;
};

/// One entry per tree in a treebank file, in file order.
struct TreeRecord {
  std::size_t line = 0;
  std::variant<Tree, TreeReadError> result;

  bool ok() const { return std::holds_alternative<Tree>(result); }
  const Tree& tree() const { return std::get<Tree>(result); }
  const TreeReadError& error() const { return std::get<TreeReadError>(result); }
};

/// Reads a treebank that has either one tree per line or multi-line trees
/// separated by blank lines. The layout is detected from the input: if every
/// non-empty line is parenthesis-balanced, each line is one tree. Otherwise
/// a tree also ends where an unindented line starts with '('.
std::vector<TreeRecord> read_treebank(std::istream& in);

}  // namespace synlm::tb
