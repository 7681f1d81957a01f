#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <string>
#include <vector>

#include "synlm/treebank/tree.hpp"

namespace synlm::tb {

struct PcfgRule {
  std::string lhs;
  std::vector<std::string> rhs;
  double prob = 0.0;
};

/// Probabilistic CFG read from text, one rule per line:
///
///   LHS -> RHS1 RHS2 ... # prob
///
/// Any symbol that appears on some left-hand side is a nonterminal; all
/// others are terminals. The first rule's LHS is the start symbol unless a
/// "%start SYMBOL" line says otherwise. Nonterminals whose names begin with
/// '@' are transparent: their children are spliced into the parent node, so
/// they can hold lexical choices without adding tree structure.
class Pcfg {
 public:
  static Pcfg parse(std::istream& in);
  static Pcfg parse_string(const std::string& text);

  const std::string& start() const { return start_; }
  const std::vector<PcfgRule>& rules() const { return rules_; }
  const std::vector<std::size_t>& rules_for(const std::string& lhs) const;
  bool is_nonterminal(const std::string& symbol) const { return by_lhs_.count(symbol) != 0; }
  std::vector<std::string> nonterminals() const;

  /// Spectral radius of the expected-children matrix; < 1 means derivations
  /// have finite expected size.
  double expected_branching_radius() const;

 private:
  void validate() const;

  std::string start_;
  std::vector<PcfgRule> rules_;
  std::map<std::string, std::vector<std::size_t>> by_lhs_;
};

struct SampleOptions {
  std::size_t max_depth = 60;
};

struct SampleResult {
  std::vector<Tree> trees;
  std::size_t cap_hits = 0;               // derivations discarded for exceeding max_depth
  std::vector<std::size_t> rule_counts;  // uses per rule index, over kept trees
};

/// Draws i.i.d. trees from the grammar; deterministic in `seed`.
SampleResult sample_corpus(const Pcfg& grammar, std::size_t n_sentences, std::uint64_t seed,
                           const SampleOptions& options = {});

}  // namespace synlm::tb
