#include "synlm/treebank/pcfg.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "synlm/errors.hpp"

namespace synlm::tb {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

struct DepthExceeded {};

class Sampler {
 public:
  Sampler(const Pcfg& g, std::uint64_t seed, std::size_t max_depth)
      : g_(g), rng_(seed), max_depth_(max_depth) {}

  void expand(const std::string& symbol, std::size_t depth, std::vector<Tree>& out,
              std::vector<std::size_t>& used) {
    if (!g_.is_nonterminal(symbol)) {
      out.push_back(terminal(symbol));
      return;
    }
    if (depth > max_depth_) throw DepthExceeded{};
    const std::size_t r = choose(symbol);
    used.push_back(r);
    std::vector<Tree> children;
    for (const auto& s : g_.rules()[r].rhs) expand(s, depth + 1, children, used);
    if (symbol.front() == '@') {
      for (auto& c : children) out.push_back(std::move(c));
    } else {
      if (children.empty()) throw GrammarError("nonterminal '" + symbol + "' derived no children");
      out.push_back(node(symbol, std::move(children)));
    }
  }

 private:
  std::size_t choose(const std::string& lhs) {
    const auto& idx = g_.rules_for(lhs);
    const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng_);
    double acc = 0.0;
    for (std::size_t i : idx) {
      acc += g_.rules()[i].prob;
      if (u < acc) return i;
    }
    return idx.back();
  }

  const Pcfg& g_;
  std::mt19937_64 rng_;
  std::size_t max_depth_;
};

}  // namespace

Pcfg Pcfg::parse(std::istream& in) {
  Pcfg g;
  std::string line;
  std::size_t lineno = 0;
  std::string declared_start;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    if (t.rfind("%start", 0) == 0) {
      declared_start = trim(t.substr(6));
      continue;
    }
    const auto arrow = t.find("->");
    const auto hash = t.rfind('#');
    if (arrow == std::string::npos || hash == std::string::npos || hash < arrow) {
      throw GrammarError("line " + std::to_string(lineno) + ": expected 'LHS -> RHS... # prob'");
    }
    PcfgRule rule;
    rule.lhs = trim(t.substr(0, arrow));
    if (rule.lhs.empty() || rule.lhs.find(' ') != std::string::npos) {
      throw GrammarError("line " + std::to_string(lineno) + ": bad left-hand side");
    }
    std::istringstream rhs(t.substr(arrow + 2, hash - arrow - 2));
    for (std::string sym; rhs >> sym;) rule.rhs.push_back(sym);
    if (rule.rhs.empty()) throw GrammarError("line " + std::to_string(lineno) + ": empty right-hand side");
    try {
      std::size_t used = 0;
      const std::string p = trim(t.substr(hash + 1));
      rule.prob = std::stod(p, &used);
      if (used != p.size()) throw std::invalid_argument(p);
    } catch (const std::exception&) {
      throw GrammarError("line " + std::to_string(lineno) + ": bad probability");
    }
    if (!(rule.prob > 0.0) || rule.prob > 1.0) {
      throw GrammarError("line " + std::to_string(lineno) + ": probability must lie in (0, 1]");
    }
    if (g.start_.empty()) g.start_ = rule.lhs;
    g.by_lhs_[rule.lhs].push_back(g.rules_.size());
    g.rules_.push_back(std::move(rule));
  }
  if (g.rules_.empty()) throw GrammarError("grammar has no rules");
  if (!declared_start.empty()) g.start_ = declared_start;
  g.validate();
  return g;
}

Pcfg Pcfg::parse_string(const std::string& text) {
  std::istringstream in(text);
  return parse(in);
}

const std::vector<std::size_t>& Pcfg::rules_for(const std::string& lhs) const {
  const auto it = by_lhs_.find(lhs);
  if (it == by_lhs_.end()) throw GrammarError("no rules for '" + lhs + "'");
  return it->second;
}

std::vector<std::string> Pcfg::nonterminals() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : by_lhs_) out.push_back(k);
  return out;
}

double Pcfg::expected_branching_radius() const {
  const auto nts = nonterminals();
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < nts.size(); ++i) index[nts[i]] = i;
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(nts.size()),
                                            static_cast<Eigen::Index>(nts.size()));
  for (const auto& r : rules_) {
    for (const auto& s : r.rhs) {
      if (const auto it = index.find(s); it != index.end()) {
        m(static_cast<Eigen::Index>(index[r.lhs]), static_cast<Eigen::Index>(it->second)) += r.prob;
      }
    }
  }
  Eigen::EigenSolver<Eigen::MatrixXd> solver(m, false);
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

void Pcfg::validate() const {
  if (!is_nonterminal(start_)) throw GrammarError("start symbol '" + start_ + "' has no rules");
  if (start_.front() == '@') throw GrammarError("start symbol cannot be transparent");
  for (const auto& [lhs, idx] : by_lhs_) {
    double total = 0.0;
    for (std::size_t i : idx) total += rules_[i].prob;
    if (std::abs(total - 1.0) > 1e-9) {
      std::ostringstream msg;
      msg.precision(12);
      msg << "rule probabilities for '" << lhs << "' sum to " << total << ", expected 1";
      throw GrammarError(msg.str());
    }
  }
  const double radius = expected_branching_radius();
  if (!(radius < 1.0)) {
    throw GrammarError("grammar has infinite expected derivation size (branching radius " +
                       std::to_string(radius) + ")");
  }
}

SampleResult sample_corpus(const Pcfg& grammar, std::size_t n_sentences, std::uint64_t seed,
                           const SampleOptions& options) {
  Sampler sampler(grammar, seed, options.max_depth);
  SampleResult result;
  result.rule_counts.assign(grammar.rules().size(), 0);
  while (result.trees.size() < n_sentences) {
    std::vector<Tree> out;
    std::vector<std::size_t> used;
    try {
      sampler.expand(grammar.start(), 0, out, used);
    } catch (const DepthExceeded&) {
      ++result.cap_hits;
      if (result.cap_hits > 1000 * (n_sentences + 1)) {
        throw GrammarError("sampling keeps exceeding the depth cap of " + std::to_string(options.max_depth));
      }
      continue;
    }
    for (std::size_t r : used) ++result.rule_counts[r];
    result.trees.push_back(std::move(out.front()));
  }
  return result;
}

}  // namespace synlm::tb
