#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include <nlohmann/json.hpp>

namespace synlm::psych {

/// One token's surprisal for one (item, condition, model).
struct SurprisalRecord {
  std::string suite;
  std::string item;
  std::string condition;
  std::string region;
  std::size_t token_idx = 0;  // position in the full sentence
  std::string token;
  double surprisal_bits = 0.0;
  std::string model;
};

/// A sentence the scorer could not handle (beam failure).
struct FailureRecord {
  std::string suite;
  std::string item;
  std::string condition;
  std::string model;
  std::string reason;
};

/// Records plus the provenance document carried in the file header.
struct RecordTable {
  nlohmann::json provenance;
  std::vector<SurprisalRecord> records;
  std::vector<FailureRecord> failures;

  std::vector<std::string> models() const;
};

inline constexpr const char* kRecordColumns =
    "suite\titem\tcondition\tregion\ttoken_idx\ttoken\tsurprisal_bits\tmodel";

/// TSV layout: '#'-prefixed header lines ("# synlm-records 1" and
/// "# provenance <json>"), the column line, then one row per token. Failed
/// sentences appear as rows whose surprisal_bits cell is "FAILED" and whose
/// token cell carries the reason.
void write_records(std::ostream& out, const RecordTable& table);
/// Header lines are optional on input so third-party tables can be analyzed.
RecordTable read_records(std::istream& in);
RecordTable read_records_file(const std::string& path);

/// Fixed-precision rendering used in every numeric output cell.
std::string format_number(double value);

}  // namespace synlm::psych
