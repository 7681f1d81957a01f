#include "synlm/treebank/tree.hpp"

#include <sstream>

#include "synlm/errors.hpp"

namespace synlm::tb {

namespace {

void collect_yield(const Tree& t, std::vector<std::string>& out) {
  if (t.is_terminal()) {
    out.push_back(t.label);
    return;
  }
  for (const Tree& c : t.children) collect_yield(c, out);
}

void write(const Tree& t, std::string& out) {
  if (t.is_terminal()) {
    out += t.label;
    return;
  }
  out += '(';
  out += t.label;
  for (const Tree& c : t.children) {
    out += ' ';
    write(c, out);
  }
  out += ')';
}

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

class SexprParser {
 public:
  explicit SexprParser(std::string_view text) : text_(text) {}

  Tree parse_root() {
    skip_space();
    if (pos_ >= text_.size()) throw ParseError("empty input", pos_);
    if (text_[pos_] != '(') throw ParseError("expected '('", pos_);
    Tree t = parse_node();
    skip_space();
    if (pos_ < text_.size()) throw ParseError("trailing characters after tree", pos_);
    while (t.label.empty() && t.children.size() == 1 && !t.children.front().is_terminal()) {
      Tree inner = std::move(t.children.front());
      t = std::move(inner);
    }
    if (t.label.empty()) throw ParseError("root node has no label", 0);
    return t;
  }

 private:
  Tree parse_node() {
    const std::size_t open = pos_;
    ++pos_;  // '('
    skip_space();
    Tree t;
    if (pos_ < text_.size() && text_[pos_] != '(' && text_[pos_] != ')') t.label = read_atom();
    for (;;) {
      skip_space();
      if (pos_ >= text_.size()) throw ParseError("unbalanced parentheses: '(' never closed", open);
      const char c = text_[pos_];
      if (c == ')') {
        ++pos_;
        break;
      }
      if (c == '(') {
        t.children.push_back(parse_node());
      } else {
        t.children.push_back(terminal(read_atom()));
      }
    }
    if (t.children.empty()) throw ParseError("node '" + t.label + "' has no children", open);
    return t;
  }

  std::string read_atom() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && !is_space(text_[pos_]) && text_[pos_] != '(' && text_[pos_] != ')') ++pos_;
    return std::string(text_.substr(start, pos_ - start));
  }

  void skip_space() {
    while (pos_ < text_.size() && is_space(text_[pos_])) ++pos_;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

int paren_balance(std::string_view line) {
  int depth = 0;
  for (char c : line) {
    if (c == '(') ++depth;
    if (c == ')') --depth;
    if (depth < 0) return -1;
  }
  return depth;
}

bool blank(std::string_view line) {
  for (char c : line) {
    if (!is_space(c)) return false;
  }
  return true;
}

TreeRecord parse_record(const std::string& text, std::size_t line) {
  TreeRecord rec;
  rec.line = line;
  try {
    rec.result = parse_bracketed(text);
  } catch (const ParseError& e) {
    rec.result = TreeReadError{line, e.what()};
  }
  return rec;
}

}  // namespace

std::vector<std::string> Tree::yield() const {
  std::vector<std::string> out;
  collect_yield(*this, out);
  return out;
}

std::size_t Tree::node_count() const {
  std::size_t n = 1;
  for (const Tree& c : children) n += c.node_count();
  return n;
}

std::string Tree::to_string() const {
  std::string out;
  write(*this, out);
  return out;
}

Tree terminal(std::string word) { return Tree{std::move(word), {}}; }

Tree node(std::string label, std::vector<Tree> children) { return Tree{std::move(label), std::move(children)}; }

Tree parse_bracketed(std::string_view text) { return SexprParser(text).parse_root(); }

std::vector<TreeRecord> read_treebank(std::istream& in) {
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) lines.push_back(std::move(line));

  bool line_mode = true;
  for (const auto& l : lines) {
    if (!blank(l) && paren_balance(l) != 0) {
      line_mode = false;
      break;
    }
  }

  std::vector<TreeRecord> out;
  if (line_mode) {
    for (std::size_t i = 0; i < lines.size(); ++i) {
      if (!blank(lines[i])) out.push_back(parse_record(lines[i], i + 1));
    }
    return out;
  }

  std::string block;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= lines.size(); ++i) {
    const bool end = i == lines.size() || blank(lines[i]);
    // An unindented '(' always opens a new tree, so one unbalanced tree
    // cannot swallow the ones after it.
    if (!end && !block.empty() && lines[i].front() == '(') {
      out.push_back(parse_record(block, start));
      block.clear();
    }
    if (!end) {
      if (block.empty()) start = i + 1;
      block += lines[i];
      block += '\n';
      continue;
    }
    if (!block.empty()) {
      out.push_back(parse_record(block, start));
      block.clear();
    }
  }
  return out;
}

}  // namespace synlm::tb
