#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace synlm::psych {

double mean(const std::vector<double>& xs);
/// Sample standard deviation (n-1 denominator). Needs >= 2 values.
double sample_sd(const std::vector<double>& xs);

struct CohensD {
  double d = 0.0;
  bool infinite = false;  // zero spread; `sign` then gives the direction
  int sign = 0;
};

/// mean / sample sd. Throws StatisticError for fewer than two values.
CohensD cohens_d(const std::vector<double>& xs);

/// Two-sided Student t quantile, e.g. t_quantile(0.975, 2) = 4.3027.
double t_quantile(double p, double df);
double chi_square_quantile(double p, double df);

struct Interval {
  double estimate = 0.0;
  double low = 0.0;
  double high = 0.0;
};

/// mean ± t_{0.975, n-1} · sd / sqrt(n).
Interval t_interval(const std::vector<double>& xs, double level = 0.95);

/// Per-condition means with within-item intervals: every value has its
/// item's mean removed and the grand mean added back before the t interval
/// is taken. `table[i][c]` is item i under condition c.
std::vector<Interval> within_item_ci(const std::vector<std::vector<double>>& table, double level = 0.95);

struct PermutationResult {
  double p = 1.0;
  double observed = 0.0;  // mean of the paired differences
  std::size_t shuffles = 0;
};

/// Sign-flip permutation test of mean(diffs) = 0, two-sided:
/// p = (1 + #{|mean*| >= |mean|}) / (1 + shuffles).
PermutationResult sign_flip_test(const std::vector<double>& diffs, std::size_t shuffles = 10000,
                                 std::uint64_t seed = 1);
/// Paired test on x - y.
PermutationResult paired_permutation_test(const std::vector<double>& x, const std::vector<double>& y,
                                          std::size_t shuffles = 10000, std::uint64_t seed = 1);

/// Exact (Clopper-Pearson) interval for a binomial proportion.
Interval binomial_ci(std::size_t successes, std::size_t trials, double level = 0.95);
/// Two-sided exact binomial test.
double binomial_test(std::size_t successes, std::size_t trials, double p0 = 0.5);

/// One observation of a factorial design: factor levels coded ±1.
struct Observation {
  std::string item;
  std::vector<int> levels;
  double y = 0.0;
};

struct Coefficient {
  std::string term;
  double estimate = 0.0;
  double se = 0.0;  // NaN without residual degrees of freedom
  double t = 0.0;
  double p = 0.0;
};

struct RegressionResult {
  std::vector<Coefficient> coefficients;
  double residual_df = 0.0;
  double sigma = 0.0;

  const Coefficient& term(const std::string& name) const;
};

/// Least squares on sum-coded factors with every interaction of the factors,
/// plus sum-coded item intercepts when `item_effects` is set (the first item
/// in order of appearance is the -1 level). Terms are named after the factors
/// ("F", "F:G") and items ("item[<id>]"). Throws DesignError listing aliased
/// terms when the design is rank deficient.
RegressionResult sum_coded_regression(const std::vector<Observation>& data, const std::vector<std::string>& factors,
                                      bool item_effects);

}  // namespace synlm::psych
