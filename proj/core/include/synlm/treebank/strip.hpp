#pragma once

#include <string>
#include <string_view>

#include "synlm/treebank/tree.hpp"

namespace synlm::tb {

inline constexpr std::string_view kEmptyCategoryLabel = "-NONE-";

struct StripOptions {
  /// Replace part-of-speech nodes (PTB tagset, single terminal child) by
  /// their word, so words attach directly to phrasal parents. Never applied
  /// to the root.
  bool collapse_pos = true;
};

/// "WHNP-1" -> "WHNP", "NP-SBJ=2" -> "NP". Labels that begin with '-'
/// (-NONE-, -LRB-, -RRB-, ...) are returned unchanged.
std::string strip_label(std::string_view label);

bool is_pos_tag(std::string_view label);

/// Removes functional tags, coindexation, and empty categories; nodes left
/// without children are removed recursively. Throws EmptyTreeError if
/// nothing remains. Idempotent.
Tree strip_annotations(const Tree& tree, const StripOptions& options = {});

}  // namespace synlm::tb
