#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "synlm/psych/records.hpp"
#include "synlm/psych/suite.hpp"

namespace synlm::psych {

struct AnalysisOptions {
  /// Region names to sum; each condition's measured regions when unset.
  std::optional<std::vector<std::string>> regions;
  std::size_t shuffles = 10000;
  std::uint64_t seed = 1;
};

/// Summary document for one (suite, model): per-condition means with
/// within-item intervals, the suite's headline effect with its statistics,
/// and per-item values. Items with a failed sentence for this model are
/// dropped listwise and counted.
nlohmann::json analyze_suite(const RecordTable& table, const TestSuite& suite, const std::string& model,
                             const AnalysisOptions& options = {});

/// Per-item rows of an analysis summary as TSV.
std::string items_tsv(const nlohmann::json& summary);

}  // namespace synlm::psych
