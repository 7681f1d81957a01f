#include "synlm/psych/records.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "synlm/errors.hpp"

namespace synlm::psych {

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t tab = line.find('\t', start);
    out.push_back(line.substr(start, tab == std::string::npos ? std::string::npos : tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  return out;
}

std::string clean(std::string s) {
  for (char& c : s) {
    if (c == '\t' || c == '\n' || c == '\r') c = ' ';
  }
  return s;
}

}  // namespace

std::string format_number(double value) {
  if (std::isnan(value)) return "NA";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9f", value);
  std::string s = buf;
  if (s == "-0.000000000") s = "0.000000000";
  return s;
}

std::vector<std::string> RecordTable::models() const {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const auto& r : records) {
    if (seen.insert(r.model).second) out.push_back(r.model);
  }
  for (const auto& f : failures) {
    if (seen.insert(f.model).second) out.push_back(f.model);
  }
  return out;
}

void write_records(std::ostream& out, const RecordTable& table) {
  out << "# synlm-records 1\n";
  if (!table.provenance.is_null()) out << "# provenance " << table.provenance.dump() << '\n';
  out << kRecordColumns << '\n';
  for (const auto& r : table.records) {
    out << clean(r.suite) << '\t' << clean(r.item) << '\t' << clean(r.condition) << '\t' << clean(r.region) << '\t'
        << r.token_idx << '\t' << clean(r.token) << '\t' << format_number(r.surprisal_bits) << '\t' << clean(r.model)
        << '\n';
  }
  for (const auto& f : table.failures) {
    out << clean(f.suite) << '\t' << clean(f.item) << '\t' << clean(f.condition) << "\t-\t0\t" << clean(f.reason)
        << "\tFAILED\t" << clean(f.model) << '\n';
  }
}

RecordTable read_records(std::istream& in) {
  RecordTable table;
  std::string line;
  std::size_t line_no = 0;
  bool have_columns = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      const std::string tag = "# provenance ";
      if (line.rfind(tag, 0) == 0) {
        try {
          table.provenance = nlohmann::json::parse(line.substr(tag.size()));
        } catch (const nlohmann::json::exception&) {
          throw ProvenanceError("line " + std::to_string(line_no) + ": unreadable provenance header");
        }
      }
      continue;
    }
    if (!have_columns) {
      if (line != kRecordColumns) {
        throw IncompleteDataError("line " + std::to_string(line_no) + ": expected column header '" +
                                  std::string(kRecordColumns) + "'");
      }
      have_columns = true;
      continue;
    }
    const auto cells = split_tabs(line);
    if (cells.size() != 8) {
      throw IncompleteDataError("line " + std::to_string(line_no) + ": expected 8 columns, found " +
                                std::to_string(cells.size()));
    }
    if (cells[6] == "FAILED") {
      table.failures.push_back(FailureRecord{cells[0], cells[1], cells[2], cells[7], cells[5]});
      continue;
    }
    SurprisalRecord r;
    r.suite = cells[0];
    r.item = cells[1];
    r.condition = cells[2];
    r.region = cells[3];
    r.token = cells[5];
    r.model = cells[7];
    try {
      std::size_t used = 0;
      const long long idx = std::stoll(cells[4], &used);
      if (used != cells[4].size() || idx < 0) throw std::invalid_argument("index");
      r.token_idx = static_cast<std::size_t>(idx);
      r.surprisal_bits = std::stod(cells[6], &used);
      if (used != cells[6].size()) throw std::invalid_argument("surprisal");
    } catch (const std::exception&) {
      throw IncompleteDataError("line " + std::to_string(line_no) + ": bad token index or surprisal value");
    }
    if (!std::isfinite(r.surprisal_bits)) {
      throw NumericalError("line " + std::to_string(line_no) + ": non-finite surprisal");
    }
    table.records.push_back(std::move(r));
  }
  if (!have_columns) throw IncompleteDataError("surprisal table has no column header");
  return table;
}

RecordTable read_records_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kData, "cannot open surprisal table '" + path + "'");
  return read_records(in);
}

}  // namespace synlm::psych
