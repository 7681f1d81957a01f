#include "synlm/psych/measures.hpp"

#include <algorithm>

#include "synlm/errors.hpp"

namespace synlm::psych {

RecordIndex::RecordIndex(const RecordTable& table, const std::string& suite) {
  for (const auto& r : table.records) {
    if (r.suite != suite) continue;
    auto& slot = by_key_[{r.item, r.condition, r.model}];
    if (!slot.emplace(r.token_idx, &r).second) {
      throw IncompleteDataError("duplicate record for item '" + r.item + "', condition '" + r.condition +
                                "', model '" + r.model + "', token " + std::to_string(r.token_idx));
    }
  }
  for (const auto& f : table.failures) {
    if (f.suite == suite) failed_[{f.item, f.model}] = true;
  }
}

const SurprisalRecord* RecordIndex::find(const std::string& item, const std::string& condition,
                                         const std::string& model, std::size_t token_idx) const {
  const auto it = by_key_.find({item, condition, model});
  if (it == by_key_.end()) return nullptr;
  const auto r = it->second.find(token_idx);
  return r == it->second.end() ? nullptr : r->second;
}

bool RecordIndex::failed(const std::string& item, const std::string& model) const {
  return failed_.count({item, model}) > 0;
}

double aggregate_region(const RecordIndex& index, const TestSuite& suite, const std::string& item_id,
                        const std::string& condition, const std::string& model,
                        const std::optional<std::vector<std::string>>& regions) {
  const Item& item = suite.item(item_id);
  const auto cond = item.conditions.find(condition);
  if (cond == item.conditions.end()) {
    throw IncompleteDataError("item '" + item_id + "' lacks condition '" + condition + "'");
  }
  if (regions) {
    for (const auto& want : *regions) {
      bool known = false;
      for (const auto& r : cond->second) known = known || r.name == want;
      if (!known) throw DesignError("item '" + item_id + "' has no region '" + want + "'");
    }
  }
  double total = 0.0;
  std::size_t selected = 0;
  std::string gaps;
  std::size_t offset = 0;
  for (const auto& r : cond->second) {
    bool take = r.measure;
    if (regions) take = std::find(regions->begin(), regions->end(), r.name) != regions->end();
    if (take) {
      for (std::size_t t = 0; t < r.tokens.size(); ++t) {
        ++selected;
        const SurprisalRecord* rec = index.find(item_id, condition, model, offset + t);
        if (rec == nullptr || rec->region != r.name) {
          gaps += (gaps.empty() ? "" : "; ") + r.name + " token " + std::to_string(offset + t) + " ('" +
                  r.tokens[t] + "')";
          continue;
        }
        total += rec->surprisal_bits;
      }
    }
    offset += r.tokens.size();
  }
  if (selected == 0) {
    throw IncompleteDataError("empty measured selection for item '" + item_id + "', condition '" + condition + "'");
  }
  if (!gaps.empty()) {
    throw IncompleteDataError("missing surprisal records for item '" + item_id + "', condition '" + condition +
                              "', model '" + model + "': " + gaps);
  }
  return total;
}

double wh_interaction(double a, double b, double c, double d) { return (b - a) - (d - c); }

double NpiItem::licensor_effect() const { return ((s[1][0] - s[0][0]) + (s[1][1] - s[0][1])) / 2.0; }

double NpiItem::distractor_effect() const { return ((s[0][1] - s[0][0]) + (s[1][1] - s[1][0])) / 2.0; }

NpiAccuracy npi_accuracy(const std::vector<NpiItem>& items) {
  NpiAccuracy out;
  out.n = items.size();
  if (items.empty()) throw StatisticError("NPI accuracy over zero items");
  for (const auto& it : items) {
    const double licensed = it.s[1][0];
    const double distracted = it.s[0][1];
    if (licensed < distracted) {
      ++out.correct;
    } else if (licensed == distracted) {
      ++out.ties;
    } else {
      ++out.wrong;
    }
  }
  out.accuracy = static_cast<double>(out.correct) / static_cast<double>(out.n);
  out.ci = binomial_ci(out.correct, out.n);
  out.p = binomial_test(out.correct, out.n);
  return out;
}

}  // namespace synlm::psych
