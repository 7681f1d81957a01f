#include "synlm/psych/analysis.hpp"

#include <cmath>
#include <sstream>

#include "synlm/errors.hpp"
#include "synlm/psych/measures.hpp"
#include "synlm/psych/stats.hpp"

namespace synlm::psych {

namespace {

nlohmann::json num(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

nlohmann::json effect_json(const std::vector<double>& values, const AnalysisOptions& opt) {
  nlohmann::json out;
  out["n"] = values.size();
  out["mean"] = num(mean(values));
  if (values.size() >= 2) {
    const Interval iv = t_interval(values);
    out["ci_low"] = num(iv.low);
    out["ci_high"] = num(iv.high);
    const CohensD d = cohens_d(values);
    out["cohens_d"] = num(d.d);
    out["d_infinite"] = d.infinite;
    out["d_sign"] = d.sign;
  }
  const PermutationResult perm = sign_flip_test(values, opt.shuffles, opt.seed);
  out["p_permutation"] = perm.p;
  out["shuffles"] = perm.shuffles;
  out["seed"] = opt.seed;
  std::size_t positive = 0;
  for (double v : values) positive += v > 0 ? 1 : 0;
  out["positive_items"] = positive;
  return out;
}

nlohmann::json regression_json(const std::vector<Observation>& obs, const std::vector<std::string>& factors) {
  try {
    const RegressionResult r = sum_coded_regression(obs, factors, true);
    nlohmann::json terms = nlohmann::json::array();
    for (const auto& c : r.coefficients) {
      if (c.term.rfind("item[", 0) == 0) continue;
      terms.push_back({{"term", c.term}, {"estimate", num(c.estimate)}, {"se", num(c.se)}, {"t", num(c.t)},
                       {"p", num(c.p)}});
    }
    return {{"terms", terms}, {"residual_df", r.residual_df}, {"item_effects", "sum-coded fixed"}};
  } catch (const Error& e) {
    return {{"error", e.what()}};
  }
}

}  // namespace

nlohmann::json analyze_suite(const RecordTable& table, const TestSuite& suite, const std::string& model,
                             const AnalysisOptions& opt) {
  const RecordIndex index(table, suite.name);
  nlohmann::json out;
  out["suite"] = suite.name;
  out["analysis"] = to_string(suite.analysis);
  out["model"] = model;
  out["regions"] = opt.regions ? nlohmann::json(*opt.regions) : nlohmann::json("measured");
  out["items_total"] = suite.items.size();

  // sums[i][c]: summed surprisal of used item i under condition c.
  std::vector<std::string> used;
  std::vector<std::vector<double>> sums;
  nlohmann::json dropped = nlohmann::json::array();
  for (const auto& item : suite.items) {
    if (index.failed(item.id, model)) {
      dropped.push_back(item.id);
      continue;
    }
    std::vector<double> row;
    for (const auto& c : suite.conditions) row.push_back(aggregate_region(index, suite, item.id, c.name, model, opt.regions));
    used.push_back(item.id);
    sums.push_back(std::move(row));
  }
  out["items_used"] = used.size();
  out["items_dropped"] = dropped.size();
  out["dropped_items"] = dropped;
  if (used.empty()) throw IncompleteDataError("no usable items for suite '" + suite.name + "', model '" + model + "'");

  nlohmann::json conds = nlohmann::json::array();
  std::vector<Interval> cis;
  if (used.size() >= 2) cis = within_item_ci(sums);
  for (std::size_t c = 0; c < suite.conditions.size(); ++c) {
    const Condition& cond = suite.conditions[c];
    nlohmann::json jc{{"name", cond.name}, {"factors", cond.factors}, {"grammatical", cond.grammatical}};
    std::vector<double> col;
    for (const auto& row : sums) col.push_back(row[c]);
    jc["mean"] = num(mean(col));
    if (!cis.empty()) {
      jc["ci_low"] = num(cis[c].low);
      jc["ci_high"] = num(cis[c].high);
    }
    conds.push_back(jc);
  }
  out["conditions"] = conds;

  auto column = [&](const std::map<std::string, bool>& factors) {
    const std::string& name = suite.find_by_factors(factors).name;
    for (std::size_t c = 0; c < suite.conditions.size(); ++c) {
      if (suite.conditions[c].name == name) return c;
    }
    return std::size_t{0};
  };

  nlohmann::json items = nlohmann::json::array();
  switch (suite.analysis) {
    case AnalysisKind::kWhInteraction: {
      const std::size_t ca = column({{"filler", false}, {"gap", false}});
      const std::size_t cb = column({{"filler", true}, {"gap", false}});
      const std::size_t cc = column({{"filler", false}, {"gap", true}});
      const std::size_t cd = column({{"filler", true}, {"gap", true}});
      std::vector<double> values;
      std::vector<Observation> obs;
      for (std::size_t i = 0; i < used.size(); ++i) {
        const auto& row = sums[i];
        const double v = wh_interaction(row[ca], row[cb], row[cc], row[cd]);
        values.push_back(v);
        items.push_back({{"item", used[i]}, {"a", row[ca]}, {"b", row[cb]}, {"c", row[cc]}, {"d", row[cd]},
                         {"interaction", v}});
        for (std::size_t c = 0; c < suite.conditions.size(); ++c) {
          const auto& f = suite.conditions[c].factors;
          obs.push_back({used[i], {f.at("filler") ? 1 : -1, f.at("gap") ? 1 : -1}, row[c]});
        }
      }
      out["interaction"] = effect_json(values, opt);
      out["regression"] = regression_json(obs, {"filler", "gap"});
      break;
    }
    case AnalysisKind::kNpi: {
      std::size_t cell[2][2];
      for (int l = 0; l < 2; ++l) {
        for (int d = 0; d < 2; ++d) cell[l][d] = column({{"licensor", l == 1}, {"distractor", d == 1}});
      }
      std::vector<NpiItem> npi;
      std::vector<double> lic, dis;
      for (std::size_t i = 0; i < used.size(); ++i) {
        NpiItem it;
        it.item = used[i];
        for (int l = 0; l < 2; ++l) {
          for (int d = 0; d < 2; ++d) it.s[l][d] = sums[i][cell[l][d]];
        }
        lic.push_back(it.licensor_effect());
        dis.push_back(it.distractor_effect());
        items.push_back({{"item", it.item},
                         {"neither", it.s[0][0]},
                         {"licensor_only", it.s[1][0]},
                         {"distractor_only", it.s[0][1]},
                         {"both", it.s[1][1]},
                         {"licensor_effect", lic.back()},
                         {"distractor_effect", dis.back()},
                         {"correct", it.s[1][0] < it.s[0][1]}});
        npi.push_back(it);
      }
      out["licensor_effect"] = effect_json(lic, opt);
      out["distractor_effect"] = effect_json(dis, opt);
      const NpiAccuracy acc = npi_accuracy(npi);
      out["accuracy"] = {{"n", acc.n},         {"correct", acc.correct}, {"ties", acc.ties},
                         {"wrong", acc.wrong}, {"accuracy", acc.accuracy}, {"ci_low", acc.ci.low},
                         {"ci_high", acc.ci.high}, {"p_binomial", acc.p}};
      break;
    }
    case AnalysisKind::kCustomContrast: {
      std::vector<double> values;
      for (std::size_t i = 0; i < used.size(); ++i) {
        double v = 0.0;
        for (std::size_t c = 0; c < suite.conditions.size(); ++c) v += suite.conditions[c].weight * sums[i][c];
        values.push_back(v);
        items.push_back({{"item", used[i]}, {"contrast", v}});
      }
      out["contrast"] = effect_json(values, opt);
      break;
    }
  }
  // Per-condition sums for every used item, in condition order.
  for (std::size_t i = 0; i < used.size(); ++i) {
    nlohmann::json by_cond;
    for (std::size_t c = 0; c < suite.conditions.size(); ++c) by_cond[suite.conditions[c].name] = sums[i][c];
    items[i]["conditions"] = by_cond;
  }
  out["items"] = items;
  return out;
}

std::string items_tsv(const nlohmann::json& summary) {
  std::ostringstream out;
  std::vector<std::string> conds;
  for (const auto& c : summary.at("conditions")) conds.push_back(c.at("name").get<std::string>());
  const std::string kind = summary.at("analysis").get<std::string>();
  const std::string value_key = kind == "wh-interaction" ? "interaction"
                                : kind == "npi"          ? "licensor_effect"
                                                         : "contrast";
  out << "suite\tmodel\titem";
  for (const auto& c : conds) out << '\t' << c;
  out << '\t' << value_key << '\n';
  for (const auto& it : summary.at("items")) {
    out << summary.at("suite").get<std::string>() << '\t' << summary.at("model").get<std::string>() << '\t'
        << it.at("item").get<std::string>();
    for (const auto& c : conds) out << '\t' << format_number(it.at("conditions").at(c).get<double>());
    out << '\t' << format_number(it.at(value_key).get<double>()) << '\n';
  }
  return out.str();
}

}  // namespace synlm::psych
