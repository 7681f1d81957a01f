#pragma once

#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "synlm/psych/records.hpp"
#include "synlm/psych/stats.hpp"
#include "synlm/psych/suite.hpp"

namespace synlm::psych {

/// Records of one suite keyed by (item, condition, model) and token index.
class RecordIndex {
 public:
  RecordIndex(const RecordTable& table, const std::string& suite);

  const SurprisalRecord* find(const std::string& item, const std::string& condition, const std::string& model,
                              std::size_t token_idx) const;
  bool failed(const std::string& item, const std::string& model) const;

 private:
  std::map<std::tuple<std::string, std::string, std::string>, std::map<std::size_t, const SurprisalRecord*>> by_key_;
  std::map<std::pair<std::string, std::string>, bool> failed_;
};

/// Summed token surprisal over `regions` (the condition's measured regions
/// when not given). Throws IncompleteDataError for an empty selection and
/// for missing token records, listing every gap.
double aggregate_region(const RecordIndex& index, const TestSuite& suite, const std::string& item,
                        const std::string& condition, const std::string& model,
                        const std::optional<std::vector<std::string>>& regions = std::nullopt);

/// (b - a) - (d - c) for summed surprisals of -F-G, +F-G, -F+G, +F+G.
double wh_interaction(double a, double b, double c, double d);

/// Per-item NPI surprisals keyed by (licensor, distractor) polarity.
struct NpiItem {
  std::string item;
  double s[2][2] = {{0, 0}, {0, 0}};  // s[licensor][distractor]
  /// Mean over distractor levels of S(+licensor) - S(-licensor).
  double licensor_effect() const;
  /// Mean over licensor levels of S(+distractor) - S(-distractor).
  double distractor_effect() const;
};

struct NpiAccuracy {
  std::size_t n = 0;
  std::size_t correct = 0;
  std::size_t ties = 0;  // counted as incorrect
  std::size_t wrong = 0;
  double accuracy = 0.0;
  Interval ci;
  double p = 1.0;  // exact binomial test against 0.5
};

/// An item is correct when the NPI is less surprising with the licensor
/// alone than with the distractor alone.
NpiAccuracy npi_accuracy(const std::vector<NpiItem>& items);

}  // namespace synlm::psych
