#include "synlm/treebank/filler_gap.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

#include "synlm/treebank/strip.hpp"

namespace synlm::tb {

namespace {

struct Located {
  const Tree* node;
  std::vector<const Tree*> ancestors;  // root first, immediate parent last
};

std::string base_label(const Tree& t) { return strip_label(t.label); }

bool is_clause(const std::string& base) { return base == "S" || base == "SQ" || base == "SINV"; }

bool is_verb(const Tree& t) {
  if (t.is_terminal()) return true;  // word attached directly to VP
  if (!t.is_preterminal()) return false;
  return t.label.rfind("VB", 0) == 0 || t.label == "MD";
}

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

void collect_words(const Tree& t, std::vector<std::string>& out) {
  if (t.is_terminal()) {
    out.push_back(t.label);
    return;
  }
  if (t.label == kEmptyCategoryLabel) return;
  for (const Tree& c : t.children) collect_words(c, out);
}

std::string filler_words(const Tree& wh) {
  std::vector<std::string> words;
  collect_words(wh, words);
  std::string out;
  for (std::size_t i = 0; i < words.size(); ++i) out += (i ? " " : "") + lower(words[i]);
  return out;
}

void walk(const Tree& t, std::vector<const Tree*>& path, std::vector<Located>& wh,
          std::map<int, Located>& traces) {
  if (t.is_terminal()) return;
  if (t.label == kEmptyCategoryLabel && t.is_preterminal()) {
    const std::string& word = t.children.front().label;
    if (word.rfind("*T*-", 0) == 0) {
      try {
        const int k = std::stoi(word.substr(4));
        traces.try_emplace(k, Located{&t, path});
      } catch (const std::exception&) {
      }
    }
    return;
  }
  if (base_label(t).rfind("WH", 0) == 0 && label_index(t.label)) wh.push_back(Located{&t, path});
  path.push_back(&t);
  for (const Tree& c : t.children) walk(c, path, wh, traces);
  path.pop_back();
}

std::size_t index_in(const Tree& parent, const Tree* child) {
  for (std::size_t i = 0; i < parent.children.size(); ++i) {
    if (&parent.children[i] == child) return i;
  }
  return parent.children.size();
}

GapPosition classify(const Located& trace, const FillerGapOptions& options) {
  const auto& anc = trace.ancestors;
  if (anc.size() < 2) return GapPosition::kOther;
  const Tree& gap = *anc.back();  // constituent wrapping the -NONE- node
  if (base_label(gap) != "NP") return GapPosition::kOther;
  const Tree& parent = *anc[anc.size() - 2];
  const std::string parent_base = base_label(parent);
  const std::size_t pos = index_in(parent, &gap);

  if (is_clause(parent_base)) {
    for (std::size_t i = 0; i < parent.children.size(); ++i) {
      if (parent.children[i].is_terminal() || base_label(parent.children[i]) != "NP") continue;
      return i == pos ? GapPosition::kSubject : GapPosition::kOther;
    }
    return GapPosition::kOther;
  }

  if (parent_base == "VP") {
    std::vector<std::size_t> nps;
    bool verb_before = false;
    for (std::size_t i = 0; i < parent.children.size(); ++i) {
      const Tree& c = parent.children[i];
      if (!c.is_terminal() && base_label(c) == "NP") nps.push_back(i);
      if (i < pos && is_verb(c)) verb_before = true;
    }
    if (options.double_object_rule && nps.size() >= 2 && nps.front() == pos) return GapPosition::kIndirectObject;
    return verb_before ? GapPosition::kObject : GapPosition::kOther;
  }

  if (parent_base == "PP" && options.dative_pp_rule && anc.size() >= 3) {
    const Tree& head = parent.children.front();
    const std::string prep = lower(head.is_terminal() ? head.label : (head.is_preterminal() ? head.children.front().label : ""));
    const Tree& vp = *anc[anc.size() - 3];
    if ((prep == "to" || prep == "for") && base_label(vp) == "VP") {
      for (const Tree& c : vp.children) {
        if (&c != &parent && !c.is_terminal() && base_label(c) == "NP") return GapPosition::kIndirectObject;
      }
    }
  }
  return GapPosition::kOther;
}

}  // namespace

std::string to_string(GapPosition position) {
  switch (position) {
    case GapPosition::kSubject:
      return "Subject Position";
    case GapPosition::kObject:
      return "Object Position";
    case GapPosition::kIndirectObject:
      return "Indirect Object Position";
    case GapPosition::kOther:
      return "Other Position";
  }
  return "?";
}

std::optional<int> label_index(const std::string& label) {
  if (label.empty() || label.front() == '-') return std::nullopt;
  std::size_t i = label.find_first_of("-=");
  while (i != std::string::npos) {
    std::size_t j = i + 1;
    while (j < label.size() && std::isdigit(static_cast<unsigned char>(label[j]))) ++j;
    if (label[i] == '-' && j > i + 1 && (j == label.size() || label[j] == '-' || label[j] == '=')) {
      return std::stoi(label.substr(i + 1, j - i - 1));
    }
    i = label.find_first_of("-=", i + 1);
  }
  return std::nullopt;
}

void FillerGapTable::add_tree(const Tree& raw_tree, const FillerGapOptions& options) {
  std::vector<const Tree*> path;
  std::vector<Located> wh;
  std::map<int, Located> traces;
  walk(raw_tree, path, wh, traces);
  for (const Located& w : wh) {
    const int k = *label_index(w.node->label);
    const auto it = traces.find(k);
    if (it == traces.end()) {
      unresolved_.push_back(UnresolvedFiller{w.node->label, filler_words(*w.node), k});
      continue;
    }
    dependencies_.push_back(
        FillerGapDependency{w.node->label, filler_words(*w.node), k, classify(it->second, options)});
  }
}

std::size_t FillerGapTable::count(std::optional<GapPosition> position, const std::string& filler) const {
  return static_cast<std::size_t>(std::count_if(dependencies_.begin(), dependencies_.end(), [&](const auto& d) {
    return (!position || d.position == *position) && (filler.empty() || d.filler_words == filler);
  }));
}

std::string FillerGapTable::to_tsv(const std::vector<std::string>& filler_columns) const {
  std::ostringstream out;
  out << "Location of Gap\tAll Fillers";
  for (const auto& f : filler_columns) out << "\t'" << f << "'";
  out << '\n';
  auto row = [&](const std::string& name, std::optional<GapPosition> pos) {
    out << name << '\t' << count(pos);
    for (const auto& f : filler_columns) out << '\t' << count(pos, f);
    out << '\n';
  };
  row("All Positions", std::nullopt);
  for (GapPosition p : {GapPosition::kSubject, GapPosition::kObject, GapPosition::kIndirectObject,
                        GapPosition::kOther}) {
    row(to_string(p), p);
  }
  out << "Unresolved\t" << unresolved_.size();
  for (const auto& f : filler_columns) {
    out << '\t' << std::count_if(unresolved_.begin(), unresolved_.end(), [&](const auto& u) { return u.filler_words == f; });
  }
  out << '\n';
  return out.str();
}

}  // namespace synlm::tb
