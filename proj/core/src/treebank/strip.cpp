#include "synlm/treebank/strip.hpp"

#include <algorithm>
#include <array>
#include <optional>

#include "synlm/errors.hpp"

namespace synlm::tb {

namespace {

constexpr std::array<std::string_view, 48> kPtbTags = {
    "CC",  "CD",  "DT",  "EX",  "FW",  "IN",   "JJ",   "JJR",    "JJS",    "LS",    "MD",    "NN",
    "NNS", "NNP", "NNPS", "PDT", "POS", "PRP", "PRP$", "RB",     "RBR",    "RBS",   "RP",    "SYM",
    "TO",  "UH",  "VB",  "VBD", "VBG", "VBN",  "VBP",  "VBZ",    "WDT",    "WP",    "WP$",   "WRB",
    "#",   "$",   ".",   ",",   ":",   "``",   "''",   "-LRB-",  "-RRB-",  "-LCB-", "-RCB-", "AUX",
};

std::optional<Tree> strip_node(const Tree& t, const StripOptions& options, bool is_root) {
  if (t.is_terminal()) return t;
  if (t.label == kEmptyCategoryLabel) return std::nullopt;
  Tree out;
  out.label = strip_label(t.label);
  out.children.reserve(t.children.size());
  for (const Tree& c : t.children) {
    if (auto s = strip_node(c, options, false)) out.children.push_back(std::move(*s));
  }
  if (out.children.empty()) return std::nullopt;
  if (!is_root && options.collapse_pos && out.is_preterminal() && is_pos_tag(out.label)) {
    return std::move(out.children.front());
  }
  return out;
}

}  // namespace

std::string strip_label(std::string_view label) {
  if (label.empty() || label.front() == '-') return std::string(label);
  const std::size_t cut = label.find_first_of("-=");
  return std::string(label.substr(0, cut));
}

bool is_pos_tag(std::string_view label) {
  return std::find(kPtbTags.begin(), kPtbTags.end(), label) != kPtbTags.end();
}

Tree strip_annotations(const Tree& tree, const StripOptions& options) {
  auto out = strip_node(tree, options, true);
  if (!out) throw EmptyTreeError("tree is empty after removing empty categories: " + tree.to_string());
  return std::move(*out);
}

}  // namespace synlm::tb
