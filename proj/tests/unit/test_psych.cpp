#include <doctest.h>

#include <cmath>
#include <sstream>

#include <nlohmann/json.hpp>

#include "synlm/errors.hpp"
#include "synlm/psych/analysis.hpp"
#include "synlm/psych/measures.hpp"
#include "synlm/psych/records.hpp"
#include "synlm/psych/stats.hpp"
#include "synlm/psych/suite.hpp"

using namespace synlm;
using namespace synlm::psych;

namespace {

// Two items, four conditions, a measured "gap" region after an unmeasured
// prefix.
nlohmann::json wh_suite_json() {
  auto cond = [](const char* name, bool f, bool g, bool ok) {
    return nlohmann::json{{"name", name}, {"factors", {{"filler", f}, {"gap", g}}}, {"grammatical", ok}};
  };
  auto regions = [](const char* prefix, const char* target) {
    return nlohmann::json::array({{{"region", "prefix"}, {"text", prefix}, {"measure", false}},
                                  {{"region", "target"}, {"text", target}, {"measure", true}},
                                  {{"region", "end"}, {"text", "."}, {"measure", false}}});
  };
  nlohmann::json items = nlohmann::json::array();
  for (const char* id : {"1", "2"}) {
    items.push_back({{"id", id},
                     {"conditions",
                      {{"that_nogap", regions("I know that you met", "Kim today")},
                       {"that_gap", regions("I know that you met", "today")},
                       {"what_nogap", regions("I know what you met", "Kim today")},
                       {"what_gap", regions("I know what you met", "today")}}}});
  }
  return {{"name", "demo"},
          {"analysis", "wh-interaction"},
          {"conditions",
           {cond("that_nogap", false, false, true), cond("that_gap", false, true, false),
            cond("what_nogap", true, false, false), cond("what_gap", true, true, true)}},
          {"items", items}};
}

RecordTable records_for(const TestSuite& suite, const std::string& model, double base) {
  RecordTable t;
  for (const auto& item : suite.items) {
    for (const auto& c : suite.conditions) {
      std::size_t idx = 0;
      for (const auto& r : item.conditions.at(c.name)) {
        for (const auto& tok : r.tokens) {
          t.records.push_back({suite.name, item.id, c.name, r.name, idx, tok, base + static_cast<double>(idx), model});
          ++idx;
        }
      }
    }
  }
  return t;
}

}  // namespace

TEST_SUITE("psych") {

TEST_CASE("regression recovers exact coefficients") {
  SUBCASE("one factor") {
    const auto r = sum_coded_regression({{"1", {-1}, 1.0}, {"1", {1}, 3.0}}, {"gap"}, false);
    CHECK(r.term("(Intercept)").estimate == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(r.term("gap").estimate == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("two by two") {
    const std::vector<Observation> d{{"1", {-1, -1}, 10}, {"1", {-1, 1}, 14}, {"1", {1, -1}, 12}, {"1", {1, 1}, 8}};
    const auto r = sum_coded_regression(d, {"filler", "gap"}, false);
    CHECK(r.term("(Intercept)").estimate == doctest::Approx(11.0).epsilon(1e-12));
    CHECK(r.term("filler").estimate == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(std::abs(r.term("gap").estimate) < 1e-12);
    CHECK(r.term("filler:gap").estimate == doctest::Approx(-2.0).epsilon(1e-12));
    // The interaction coefficient is a quarter of the difference of differences.
    CHECK(r.term("filler:gap").estimate == doctest::Approx(-wh_interaction(10, 14, 12, 8) / 4).epsilon(1e-12));
  }
  SUBCASE("item effects") {
    const std::vector<Observation> d{{"a", {-1}, 1}, {"a", {1}, 3}, {"b", {-1}, 5}, {"b", {1}, 7}};
    const auto r = sum_coded_regression(d, {"c"}, true);
    CHECK(r.term("(Intercept)").estimate == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(r.term("c").estimate == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r.term("item[b]").estimate == doctest::Approx(2.0).epsilon(1e-12));
  }
  SUBCASE("noisy replication has finite inference") {
    std::vector<Observation> d;
    const double noise[] = {0.3, -0.1, 0.2, -0.4, 0.1, 0.05, -0.2, 0.15};
    for (int rep = 0; rep < 2; ++rep) {
      for (int f : {-1, 1}) {
        for (int g : {-1, 1}) {
          d.push_back({"1", {f, g}, 5.0 + 2.0 * f * g + noise[rep * 4 + (f + 1) + (g + 1) / 2]});
        }
      }
    }
    const auto r = sum_coded_regression(d, {"filler", "gap"}, false);
    CHECK(r.residual_df == 4);
    const auto& fg = r.term("filler:gap");
    CHECK(fg.estimate == doctest::Approx(2.0).epsilon(0.1));
    CHECK(fg.se > 0);
    CHECK(fg.p < 0.01);
  }
  SUBCASE("aliased design names the term") {
    const std::vector<Observation> d{{"1", {-1, -1}, 1}, {"1", {1, 1}, 2}, {"2", {-1, -1}, 3}};
    try {
      sum_coded_regression(d, {"filler", "gap"}, false);
      FAIL("expected DesignError");
    } catch (const DesignError& e) {
      CHECK(std::string(e.what()).find("gap") != std::string::npos);
    }
  }
  CHECK_THROWS_AS(sum_coded_regression({{"1", {2}, 1.0}}, {"x"}, false), DesignError);
}

TEST_CASE("within-item intervals") {
  const auto ci = within_item_ci({{1, 2}, {2, 4}, {3, 3}});
  REQUIRE(ci.size() == 2);
  CHECK(ci[0].estimate == doctest::Approx(2.0));
  CHECK(ci[1].estimate == doctest::Approx(3.0));
  // Normalised column is {2, 1.5, 2.5}: sd 0.5, and t(0.975, 2) is 4.303 to
  // three decimals.
  const double half = 4.303 * 0.5 / std::sqrt(3.0);
  CHECK(ci[0].high - ci[0].estimate == doctest::Approx(half).epsilon(1.2e-4));
  CHECK(ci[0].estimate - ci[0].low == doctest::Approx(half).epsilon(1.2e-4));
  CHECK(t_quantile(0.975, 2) == doctest::Approx(4.302652729911275).epsilon(1e-10));
  CHECK_THROWS_AS(within_item_ci({{1, 2}, {3}}), IncompleteDataError);
  CHECK_THROWS_AS(within_item_ci({{1, 2}}), StatisticError);
}

TEST_CASE("effect sizes") {
  const auto d = cohens_d({1, 3});
  CHECK(d.d == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
  CHECK_FALSE(d.infinite);
  const auto flat = cohens_d({5, 5, 5});
  CHECK(flat.infinite);
  CHECK(flat.sign == 1);
  CHECK(cohens_d({-2, -2}).sign == -1);
  CHECK(cohens_d({0, 0}).sign == 0);
  CHECK_THROWS_AS(cohens_d({1}), StatisticError);
  CHECK_THROWS_AS(mean({1, std::nan("")}), StatisticError);
}

TEST_CASE("sign-flip permutation test") {
  const std::vector<double> zero(12, 0.0);
  CHECK(paired_permutation_test(zero, zero, 2000, 3).p == 1.0);

  std::vector<double> strong;
  for (int i = 0; i < 30; ++i) strong.push_back(10.0 + 0.1 * (i % 5));
  CHECK(sign_flip_test(strong, 10000, 1).p < 0.001);

  std::vector<double> mixed{0.5, -0.2, 1.1, 0.3, -0.7, 0.9, 0.4, -0.1, 0.6, 0.2};
  const auto a = sign_flip_test(mixed, 5000, 7);
  const auto b = sign_flip_test(mixed, 5000, 7);
  CHECK(a.p == b.p);
  const auto c = sign_flip_test(mixed, 10000, 7);
  CHECK(std::abs(a.p - c.p) < 2.0 / std::sqrt(5000.0));
  CHECK(a.p > 0.0);
  CHECK(a.p <= 1.0);
  CHECK_THROWS_AS(sign_flip_test({}, 10, 1), StatisticError);
}

TEST_CASE("binomial accuracy") {
  std::vector<NpiItem> items;
  for (int i = 0; i < 20; ++i) {
    NpiItem it;
    it.item = std::to_string(i);
    const bool right = i % 2 == 0;
    it.s[1][0] = right ? 1.0 : 3.0;
    it.s[0][1] = 2.0;
    items.push_back(it);
  }
  const auto acc = npi_accuracy(items);
  CHECK(acc.n == 20);
  CHECK(acc.correct == 10);
  CHECK(acc.accuracy == doctest::Approx(0.5));
  CHECK(acc.p == doctest::Approx(1.0));
  CHECK(acc.ci.low < 0.5);
  CHECK(acc.ci.high > 0.5);

  // Clopper-Pearson for 0/10 has upper bound 1 - 0.025^(1/10).
  const auto zero = binomial_ci(0, 10);
  CHECK(zero.low == 0.0);
  CHECK(zero.high == doctest::Approx(1 - std::pow(0.025, 0.1)).epsilon(1e-9));
  CHECK(binomial_test(10, 10) == doctest::Approx(2.0 / 1024.0).epsilon(1e-12));
  items[0].s[1][0] = 2.0;
  const auto tied = npi_accuracy(items);
  CHECK(tied.ties == 1);
  CHECK(tied.correct == 9);
}

TEST_CASE("wh interaction and NPI effects") {
  CHECK(wh_interaction(1, 3, 2, 2) == doctest::Approx(2.0));
  CHECK(wh_interaction(3, 1, 2, 2) == doctest::Approx(-2.0));
  CHECK(wh_interaction(1 + 7, 3 + 7, 2 + 7, 2 + 7) == doctest::Approx(2.0));
  NpiItem it;
  it.s[0][0] = 10;  // no licensor, no distractor
  it.s[0][1] = 9;
  it.s[1][0] = 6;
  it.s[1][1] = 9;
  CHECK(it.licensor_effect() == doctest::Approx(-2.0));
  // ((9 - 10) + (9 - 6)) / 2
  CHECK(it.distractor_effect() == doctest::Approx(1.0));
}

TEST_CASE("suite parsing and validation") {
  const auto suite = suite_from_json(wh_suite_json());
  CHECK(suite.items.size() == 2);
  CHECK(suite.find_by_factors({{"filler", true}, {"gap", false}}).name == "what_nogap");
  const auto s = suite.sentence(suite.item("1"), "that_gap");
  CHECK(s == std::vector<std::string>{"I", "know", "that", "you", "met", "today", "."});
  CHECK(suite_to_json(suite_from_json(suite_to_json(suite))) == suite_to_json(suite));

  auto missing = wh_suite_json();
  missing["items"][1]["conditions"].erase("what_gap");
  CHECK_THROWS_AS(suite_from_json(missing).validate(), DesignError);

  auto dup = wh_suite_json();
  dup["conditions"][1]["factors"]["gap"] = false;
  CHECK_THROWS_AS(suite_from_json(dup).validate(), DesignError);

  auto bad = wh_suite_json();
  bad["analysis"] = "anova";
  CHECK_THROWS(suite_from_json(bad));
  CHECK(split_tokens("  a  b\tc ") == std::vector<std::string>{"a", "b", "c"});
}

TEST_CASE("region aggregation") {
  const auto suite = suite_from_json(wh_suite_json());
  const auto table = records_for(suite, "m", 0.0);
  const RecordIndex index(table, suite.name);
  // Target "Kim today" sits at tokens 5 and 6.
  CHECK(aggregate_region(index, suite, "1", "that_nogap", "m") == doctest::Approx(11.0));
  CHECK(aggregate_region(index, suite, "1", "that_gap", "m") == doctest::Approx(5.0));
  CHECK(aggregate_region(index, suite, "1", "that_gap", "m", std::vector<std::string>{"prefix", "end"}) ==
        doctest::Approx(0 + 1 + 2 + 3 + 4 + 6));
  CHECK_THROWS_AS(aggregate_region(index, suite, "1", "that_gap", "m", std::vector<std::string>{"nowhere"}),
                  DesignError);
  CHECK_THROWS_AS(aggregate_region(index, suite, "1", "that_gap", "other"), IncompleteDataError);

  auto gappy = table;
  gappy.records.erase(gappy.records.begin() + 5);
  const RecordIndex gi(gappy, suite.name);
  try {
    aggregate_region(gi, suite, "1", "that_nogap", "m");
    FAIL("expected IncompleteDataError");
  } catch (const IncompleteDataError& e) {
    CHECK(std::string(e.what()).find("Kim") != std::string::npos);
  }
}

TEST_CASE("records round trip") {
  const auto suite = suite_from_json(wh_suite_json());
  auto table = records_for(suite, "rnng", 0.25);
  table.records[3].surprisal_bits = 1.0 / 3.0;
  table.provenance = {{"seed", 4}, {"models", {"rnng"}}};
  table.failures.push_back({"demo", "2", "what_gap", "rnng", "beam exhausted at word 3"});
  std::stringstream ss;
  write_records(ss, table);
  const auto back = read_records(ss);
  CHECK(back.provenance == table.provenance);
  REQUIRE(back.records.size() == table.records.size());
  CHECK(back.records[3].surprisal_bits == doctest::Approx(1.0 / 3.0).epsilon(1e-9));
  CHECK(back.records[10].token == table.records[10].token);
  REQUIRE(back.failures.size() == 1);
  CHECK(back.failures[0].reason == "beam exhausted at word 3");
  CHECK(back.models() == std::vector<std::string>{"rnng"});
  std::stringstream broken("suite\titem\n");
  CHECK_THROWS(read_records(broken));
}

TEST_CASE("suite analysis summary") {
  const auto suite = suite_from_json(wh_suite_json());
  auto table = records_for(suite, "m", 0.0);
  // Inflate the ungrammatical gap condition for item 2 only.
  for (auto& r : table.records) {
    if (r.condition == "that_gap" && r.region == "target") r.surprisal_bits += r.item == "1" ? 2.0 : 4.0;
  }
  AnalysisOptions opt;
  opt.shuffles = 500;
  const auto summary = analyze_suite(table, suite, "m", opt);
  CHECK(summary["items_used"] == 2);
  CHECK(summary["conditions"].size() == 4);
  // Items differ only through the interaction, by 2 and 4 bits respectively
  // on top of the baseline token-count difference.
  const double base = wh_interaction(11, 5, 11, 5);
  CHECK(summary["interaction"]["mean"].get<double>() == doctest::Approx(base + 3.0));
  CHECK(!items_tsv(summary).empty());

  table.failures.push_back({"demo", "2", "what_gap", "m", "beam exhausted"});
  const auto dropped = analyze_suite(table, suite, "m", opt);
  CHECK(dropped["items_dropped"] == 1);
}

}
