#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "synlm/treebank/tree.hpp"

namespace synlm::tb {

enum class GapPosition { kSubject, kObject, kIndirectObject, kOther };
inline constexpr std::size_t kGapPositionCount = 4;

std::string to_string(GapPosition position);

/// Indirect-object classification rules. A gap counts as an indirect object
/// if it is the first of two NP sisters under a VP (double-object frame), or
/// the NP object of a to/for PP that is sister to the verb alongside a
/// direct-object NP (dative frame).
struct FillerGapOptions {
  bool double_object_rule = true;
  bool dative_pp_rule = true;
};

struct FillerGapDependency {
  std::string filler_label;  // e.g. "WHNP-1"
  std::string filler_words;  // lowercased yield of the WH phrase ("" for null operators)
  int index = 0;
  GapPosition position = GapPosition::kOther;
};

struct UnresolvedFiller {
  std::string filler_label;
  std::string filler_words;
  int index = 0;
};

/// Accumulates dependencies over a treebank whose traces are intact.
class FillerGapTable {
 public:
  void add_tree(const Tree& raw_tree, const FillerGapOptions& options = {});

  const std::vector<FillerGapDependency>& dependencies() const { return dependencies_; }
  const std::vector<UnresolvedFiller>& unresolved() const { return unresolved_; }
  std::size_t wh_indices() const { return dependencies_.size() + unresolved_.size(); }

  /// Resolved dependencies; `filler` empty means all fillers.
  std::size_t count(std::optional<GapPosition> position, const std::string& filler = {}) const;

  /// TSV with one row per gap position (All/Subject/Object/Indirect Object, then
  /// Other and Unresolved) and one column per requested filler word.
  std::string to_tsv(const std::vector<std::string>& filler_columns = {"who", "what"}) const;

 private:
  std::vector<FillerGapDependency> dependencies_;
  std::vector<UnresolvedFiller> unresolved_;
};

/// Numeric coindex carried by a label ("WHNP-1" -> 1), if any.
std::optional<int> label_index(const std::string& label);

}  // namespace synlm::tb
