#include "synlm/psych/suite.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "synlm/errors.hpp"

namespace synlm::psych {

std::string to_string(AnalysisKind kind) {
  switch (kind) {
    case AnalysisKind::kWhInteraction:
      return "wh-interaction";
    case AnalysisKind::kNpi:
      return "npi";
    case AnalysisKind::kCustomContrast:
      return "custom-contrast";
  }
  return "?";
}

AnalysisKind analysis_kind_from_string(const std::string& name) {
  if (name == "wh-interaction") return AnalysisKind::kWhInteraction;
  if (name == "npi") return AnalysisKind::kNpi;
  if (name == "custom-contrast") return AnalysisKind::kCustomContrast;
  throw DesignError("unknown analysis kind '" + name + "'");
}

std::vector<std::string> split_tokens(const std::string& text) {
  std::istringstream in(text);
  std::vector<std::string> out;
  for (std::string t; in >> t;) out.push_back(t);
  return out;
}

const Condition& TestSuite::condition(const std::string& cname) const {
  for (const auto& c : conditions) {
    if (c.name == cname) return c;
  }
  throw DesignError("suite '" + name + "' has no condition '" + cname + "'");
}

const Item& TestSuite::item(const std::string& id) const {
  for (const auto& it : items) {
    if (it.id == id) return it;
  }
  throw IncompleteDataError("suite '" + name + "' has no item '" + id + "'");
}

std::vector<std::string> TestSuite::sentence(const Item& it, const std::string& cname) const {
  const auto found = it.conditions.find(cname);
  if (found == it.conditions.end()) {
    throw IncompleteDataError("item '" + it.id + "' lacks condition '" + cname + "'");
  }
  std::vector<std::string> out;
  for (const auto& r : found->second) out.insert(out.end(), r.tokens.begin(), r.tokens.end());
  return out;
}

const Condition& TestSuite::find_by_factors(const std::map<std::string, bool>& factors) const {
  for (const auto& c : conditions) {
    bool match = true;
    for (const auto& [k, v] : factors) {
      const auto f = c.factors.find(k);
      if (f == c.factors.end() || f->second != v) match = false;
    }
    if (match) return c;
  }
  std::string want;
  for (const auto& [k, v] : factors) want += (v ? " +" : " -") + k;
  throw IncompleteDataError("suite '" + name + "' has no condition with factors" + want);
}

void TestSuite::validate() const {
  if (conditions.empty()) throw DesignError("suite '" + name + "' declares no conditions");
  std::set<std::string> names;
  for (const auto& c : conditions) {
    if (!names.insert(c.name).second) throw DesignError("duplicate condition '" + c.name + "'");
  }
  auto require_2x2 = [&](const std::string& f1, const std::string& f2) {
    if (conditions.size() != 4) throw DesignError("suite '" + name + "' needs exactly 4 conditions");
    std::set<std::pair<bool, bool>> cells;
    for (const auto& c : conditions) {
      if (!c.factors.count(f1) || !c.factors.count(f2)) {
        throw DesignError("condition '" + c.name + "' lacks factor '" + f1 + "' or '" + f2 + "'");
      }
      cells.insert({c.factors.at(f1), c.factors.at(f2)});
    }
    if (cells.size() != 4) throw DesignError("suite '" + name + "' does not cross " + f1 + " with " + f2);
  };
  switch (analysis) {
    case AnalysisKind::kWhInteraction:
      require_2x2("filler", "gap");
      break;
    case AnalysisKind::kNpi:
      require_2x2("licensor", "distractor");
      break;
    case AnalysisKind::kCustomContrast: {
      bool any = false;
      for (const auto& c : conditions) any = any || c.weight != 0.0;
      if (!any) throw DesignError("custom-contrast suite '" + name + "' has all-zero weights");
      break;
    }
  }
  if (items.empty()) throw DesignError("suite '" + name + "' has no items");
  std::set<std::string> ids;
  for (const auto& it : items) {
    if (!ids.insert(it.id).second) throw DesignError("duplicate item id '" + it.id + "'");
    if (it.conditions.size() != conditions.size()) {
      throw DesignError("item '" + it.id + "' has " + std::to_string(it.conditions.size()) + " conditions, expected " +
                        std::to_string(conditions.size()));
    }
    std::vector<std::string> order;
    for (const auto& c : conditions) {
      const auto found = it.conditions.find(c.name);
      if (found == it.conditions.end()) throw DesignError("item '" + it.id + "' lacks condition '" + c.name + "'");
      std::vector<std::string> these;
      for (const auto& r : found->second) {
        these.push_back(r.name);
        if (r.measure && r.tokens.empty()) {
          throw DesignError("item '" + it.id + "', condition '" + c.name + "': measured region '" + r.name +
                            "' is empty");
        }
      }
      if (order.empty()) {
        order = these;
      } else if (these != order) {
        throw DesignError("item '" + it.id + "': condition '" + c.name + "' orders regions differently");
      }
      if (these.empty()) throw DesignError("item '" + it.id + "', condition '" + c.name + "' has no regions");
    }
  }
}

TestSuite suite_from_json(const nlohmann::json& doc) {
  TestSuite s;
  try {
    s.name = doc.at("name").get<std::string>();
    s.analysis = analysis_kind_from_string(doc.at("analysis").get<std::string>());
    for (const auto& c : doc.at("conditions")) {
      Condition cond;
      cond.name = c.at("name").get<std::string>();
      if (c.contains("factors")) cond.factors = c["factors"].get<std::map<std::string, bool>>();
      cond.grammatical = c.value("grammatical", true);
      cond.weight = c.value("weight", 0.0);
      s.conditions.push_back(std::move(cond));
    }
    for (const auto& it : doc.at("items")) {
      Item item;
      item.id = it.at("id").is_string() ? it["id"].get<std::string>() : it["id"].dump();
      for (const auto& [cname, regions] : it.at("conditions").items()) {
        std::vector<Region> rs;
        for (const auto& r : regions) {
          rs.push_back(Region{r.at("region").get<std::string>(), split_tokens(r.at("text").get<std::string>()),
                              r.value("measure", false)});
        }
        item.conditions[cname] = std::move(rs);
      }
      s.items.push_back(std::move(item));
    }
  } catch (const nlohmann::json::exception& e) {
    throw DesignError(std::string("malformed test suite: ") + e.what());
  }
  s.validate();
  return s;
}

nlohmann::json suite_to_json(const TestSuite& suite) {
  nlohmann::json doc;
  doc["name"] = suite.name;
  doc["analysis"] = to_string(suite.analysis);
  doc["conditions"] = nlohmann::json::array();
  for (const auto& c : suite.conditions) {
    nlohmann::json jc{{"name", c.name}, {"factors", c.factors}, {"grammatical", c.grammatical}};
    if (suite.analysis == AnalysisKind::kCustomContrast) jc["weight"] = c.weight;
    doc["conditions"].push_back(jc);
  }
  doc["items"] = nlohmann::json::array();
  for (const auto& it : suite.items) {
    nlohmann::json ji{{"id", it.id}, {"conditions", nlohmann::json::object()}};
    for (const auto& c : suite.conditions) {
      nlohmann::json regions = nlohmann::json::array();
      for (const auto& r : it.conditions.at(c.name)) {
        std::string text;
        for (const auto& t : r.tokens) text += (text.empty() ? "" : " ") + t;
        regions.push_back({{"region", r.name}, {"text", text}, {"measure", r.measure}});
      }
      ji["conditions"][c.name] = regions;
    }
    doc["items"].push_back(ji);
  }
  return doc;
}

TestSuite load_suite(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kData, "cannot open test suite '" + path + "'");
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw DesignError("test suite '" + path + "' is not valid JSON: " + e.what());
  }
  return suite_from_json(doc);
}

}  // namespace synlm::psych
