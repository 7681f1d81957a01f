#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace synlm::cli {

struct BarDatum {
  std::string model;
  std::string label;  // condition name, or "accuracy"
  bool grammatical = true;
  double mean = 0.0;
  double low = 0.0;  // NaN when no interval is available
  double high = 0.0;
};

struct ReportTables {
  std::string suite;
  std::vector<std::string> models;
  std::vector<std::string> conditions;
  std::vector<bool> grammatical;
  std::vector<BarDatum> bars;      // one per model and condition
  std::vector<BarDatum> accuracy;  // one per model, NPI suites only
  std::string tsv;                 // every plotted number, plus the effect rows
};

/// Collects the plotted values of several models' summaries of one suite.
ReportTables build_report(const std::vector<nlohmann::json>& summaries);

/// Grouped bars (conditions on the x axis, one bar per model) with interval
/// whiskers; ungrammatical conditions are starred.
std::string render_condition_chart(const std::string& title, const ReportTables& tables,
                                   const nlohmann::json& provenance);
/// Accuracy per model with binomial intervals and a chance line.
std::string render_accuracy_chart(const std::string& title, const ReportTables& tables,
                                  const nlohmann::json& provenance);

}  // namespace synlm::cli
