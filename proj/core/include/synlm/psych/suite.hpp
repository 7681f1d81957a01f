#pragma once

#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace synlm::psych {

enum class AnalysisKind { kWhInteraction, kNpi, kCustomContrast };

std::string to_string(AnalysisKind kind);
AnalysisKind analysis_kind_from_string(const std::string& name);

struct Region {
  std::string name;
  std::vector<std::string> tokens;
  bool measure = false;
};

struct Condition {
  std::string name;
  std::map<std::string, bool> factors;  // filler/gap or licensor/distractor
  bool grammatical = true;
  double weight = 0.0;  // contrast weight, custom-contrast suites only
};

struct Item {
  std::string id;
  std::map<std::string, std::vector<Region>> conditions;
};

/// A self-describing test suite: conditions with their factor map, and items
/// carrying one region-segmented sentence per condition.
///
/// JSON layout:
///   {"name": ..., "analysis": "wh-interaction" | "npi" | "custom-contrast",
///    "conditions": [{"name", "factors": {...}, "grammatical", "weight"}],
///    "items": [{"id", "conditions": {"<cond>": [{"region", "text", "measure"}]}}]}
struct TestSuite {
  std::string name;
  AnalysisKind analysis = AnalysisKind::kWhInteraction;
  std::vector<Condition> conditions;
  std::vector<Item> items;

  const Condition& condition(const std::string& name) const;
  const Item& item(const std::string& id) const;
  /// Tokens of the whole sentence for (item, condition).
  std::vector<std::string> sentence(const Item& item, const std::string& condition) const;
  /// Name of the condition whose factors match, e.g. {filler: true, gap: false}.
  const Condition& find_by_factors(const std::map<std::string, bool>& factors) const;

  /// Throws DesignError on schema violations: missing or duplicate
  /// conditions, region order differing across conditions, empty measured
  /// regions, or a factor map that does not fit the analysis kind.
  void validate() const;
};

TestSuite suite_from_json(const nlohmann::json& doc);
nlohmann::json suite_to_json(const TestSuite& suite);
TestSuite load_suite(const std::string& path);

std::vector<std::string> split_tokens(const std::string& text);

}  // namespace synlm::psych
