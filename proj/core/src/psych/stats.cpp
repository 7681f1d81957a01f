#include "synlm/psych/stats.hpp"

#include <Eigen/Dense>
#include <boost/math/distributions/beta.hpp>
#include <boost/math/distributions/binomial.hpp>
#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <random>

#include "synlm/errors.hpp"

namespace synlm::psych {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void require_finite(const std::vector<double>& xs, const char* what) {
  for (double x : xs) {
    if (!std::isfinite(x)) throw StatisticError(std::string(what) + ": non-finite input");
  }
}

}  // namespace

double mean(const std::vector<double>& xs) {
  if (xs.empty()) throw StatisticError("mean of an empty sample");
  require_finite(xs, "mean");
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

double sample_sd(const std::vector<double>& xs) {
  if (xs.size() < 2) throw StatisticError("standard deviation needs at least two values");
  const double m = mean(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

CohensD cohens_d(const std::vector<double>& xs) {
  require_finite(xs, "cohens_d");
  if (xs.size() < 2) throw StatisticError("Cohen's d needs at least two values");
  const double m = mean(xs);
  const double sd = sample_sd(xs);
  CohensD out;
  out.sign = m > 0 ? 1 : (m < 0 ? -1 : 0);
  if (sd == 0.0) {
    out.infinite = true;
    out.d = out.sign == 0 ? kNaN : out.sign * std::numeric_limits<double>::infinity();
    return out;
  }
  out.d = m / sd;
  return out;
}

double t_quantile(double p, double df) {
  if (!(df > 0)) throw StatisticError("t quantile needs positive degrees of freedom");
  return boost::math::quantile(boost::math::students_t(df), p);
}

double chi_square_quantile(double p, double df) {
  if (!(df > 0)) throw StatisticError("chi-square quantile needs positive degrees of freedom");
  return boost::math::quantile(boost::math::chi_squared(df), p);
}

Interval t_interval(const std::vector<double>& xs, double level) {
  require_finite(xs, "t_interval");
  if (xs.size() < 2) throw StatisticError("confidence interval needs at least two items");
  const double n = static_cast<double>(xs.size());
  const double half = t_quantile(0.5 + level / 2.0, n - 1) * sample_sd(xs) / std::sqrt(n);
  const double m = mean(xs);
  return {m, m - half, m + half};
}

std::vector<Interval> within_item_ci(const std::vector<std::vector<double>>& table, double level) {
  if (table.size() < 2) throw StatisticError("within-item interval needs at least two items");
  const std::size_t conditions = table.front().size();
  if (conditions == 0) throw StatisticError("within-item interval needs at least one condition");
  double grand = 0.0;
  for (const auto& row : table) {
    if (row.size() != conditions) throw IncompleteDataError("item x condition table is ragged");
    require_finite(row, "within_item_ci");
    grand += std::accumulate(row.begin(), row.end(), 0.0);
  }
  grand /= static_cast<double>(table.size() * conditions);
  std::vector<std::vector<double>> adjusted(conditions);
  for (const auto& row : table) {
    const double item_mean = std::accumulate(row.begin(), row.end(), 0.0) / static_cast<double>(conditions);
    for (std::size_t c = 0; c < conditions; ++c) adjusted[c].push_back(row[c] - item_mean + grand);
  }
  std::vector<Interval> out;
  for (const auto& col : adjusted) out.push_back(t_interval(col, level));
  return out;
}

PermutationResult sign_flip_test(const std::vector<double>& diffs, std::size_t shuffles, std::uint64_t seed) {
  require_finite(diffs, "sign_flip_test");
  if (diffs.empty()) throw StatisticError("permutation test on an empty sample");
  if (shuffles == 0) throw StatisticError("permutation test needs at least one shuffle");
  PermutationResult r;
  r.shuffles = shuffles;
  r.observed = mean(diffs);
  const double n = static_cast<double>(diffs.size());
  const double threshold = std::abs(r.observed) * n;
  // Sums are compared instead of means; the tolerance absorbs reordering error.
  const double tol = 1e-12 * std::max(1.0, threshold);
  std::mt19937_64 rng(seed);
  std::size_t extreme = 0;
  for (std::size_t s = 0; s < shuffles; ++s) {
    double sum = 0.0;
    for (double d : diffs) sum += (rng() & 1) ? d : -d;
    if (std::abs(sum) >= threshold - tol) ++extreme;
  }
  r.p = static_cast<double>(extreme + 1) / static_cast<double>(shuffles + 1);
  return r;
}

PermutationResult paired_permutation_test(const std::vector<double>& x, const std::vector<double>& y,
                                          std::size_t shuffles, std::uint64_t seed) {
  if (x.size() != y.size()) throw StatisticError("paired test needs equally long samples");
  std::vector<double> d(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) d[i] = x[i] - y[i];
  return sign_flip_test(d, shuffles, seed);
}

Interval binomial_ci(std::size_t k, std::size_t n, double level) {
  if (n == 0) throw StatisticError("binomial interval needs at least one trial");
  if (k > n) throw StatisticError("more successes than trials");
  const double alpha = 1.0 - level;
  const double kk = static_cast<double>(k), nn = static_cast<double>(n);
  Interval out;
  out.estimate = kk / nn;
  out.low = k == 0 ? 0.0 : boost::math::quantile(boost::math::beta_distribution<>(kk, nn - kk + 1), alpha / 2);
  out.high = k == n ? 1.0 : boost::math::quantile(boost::math::beta_distribution<>(kk + 1, nn - kk), 1 - alpha / 2);
  return out;
}

double binomial_test(std::size_t k, std::size_t n, double p0) {
  if (n == 0) throw StatisticError("binomial test needs at least one trial");
  if (k > n) throw StatisticError("more successes than trials");
  const boost::math::binomial_distribution<> dist(static_cast<double>(n), p0);
  const double observed = boost::math::pdf(dist, static_cast<double>(k));
  double p = 0.0;
  for (std::size_t j = 0; j <= n; ++j) {
    const double pj = boost::math::pdf(dist, static_cast<double>(j));
    if (pj <= observed * (1 + 1e-7)) p += pj;
  }
  return std::min(1.0, p);
}

const Coefficient& RegressionResult::term(const std::string& name) const {
  for (const auto& c : coefficients) {
    if (c.term == name) return c;
  }
  throw StatisticError("no regression term '" + name + "'");
}

RegressionResult sum_coded_regression(const std::vector<Observation>& data, const std::vector<std::string>& factors,
                                      bool item_effects) {
  if (data.empty()) throw StatisticError("regression on an empty table");
  const std::size_t k = factors.size();
  if (k > 16) throw DesignError("too many factors");
  for (const auto& o : data) {
    if (o.levels.size() != k) throw DesignError("observation has " + std::to_string(o.levels.size()) + " factor levels, expected " + std::to_string(k));
    for (int l : o.levels) {
      if (l != 1 && l != -1) throw DesignError("factor levels must be sum-coded as -1 or +1");
    }
    if (!std::isfinite(o.y)) throw StatisticError("regression: non-finite response");
  }

  // Factorial terms ordered by size, then by mask: F, G, F:G, ...
  std::vector<unsigned> masks;
  for (unsigned m = 1; m < (1u << k); ++m) masks.push_back(m);
  std::stable_sort(masks.begin(), masks.end(),
                   [](unsigned a, unsigned b) { return __builtin_popcount(a) < __builtin_popcount(b); });
  std::vector<std::string> names{"(Intercept)"};
  for (unsigned m : masks) {
    std::string n;
    for (std::size_t f = 0; f < k; ++f) {
      if (m & (1u << f)) n += (n.empty() ? "" : ":") + factors[f];
    }
    names.push_back(n);
  }
  std::vector<std::string> items;
  std::map<std::string, std::size_t> item_index;
  if (item_effects) {
    for (const auto& o : data) {
      if (item_index.emplace(o.item, items.size()).second) items.push_back(o.item);
    }
    for (std::size_t i = 1; i < items.size(); ++i) names.push_back("item[" + items[i] + "]");
  }

  const auto rows = static_cast<Eigen::Index>(data.size());
  const auto cols = static_cast<Eigen::Index>(names.size());
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(rows, cols);
  Eigen::VectorXd y(rows);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto& o = data[static_cast<std::size_t>(r)];
    y(r) = o.y;
    x(r, 0) = 1.0;
    for (std::size_t t = 0; t < masks.size(); ++t) {
      int v = 1;
      for (std::size_t f = 0; f < k; ++f) {
        if (masks[t] & (1u << f)) v *= o.levels[f];
      }
      x(r, static_cast<Eigen::Index>(t + 1)) = v;
    }
    if (item_effects) {
      const std::size_t idx = item_index.at(o.item);
      const Eigen::Index base = static_cast<Eigen::Index>(masks.size() + 1);
      if (idx == 0) {
        for (std::size_t i = 1; i < items.size(); ++i) x(r, base + static_cast<Eigen::Index>(i - 1)) = -1.0;
      } else {
        x(r, base + static_cast<Eigen::Index>(idx - 1)) = 1.0;
      }
    }
  }

  // Detect aliased columns by growing the design one column at a time.
  std::vector<std::string> aliased;
  {
    Eigen::Index rank = 0;
    for (Eigen::Index c = 0; c < cols; ++c) {
      Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x.leftCols(c + 1));
      qr.setThreshold(1e-10);
      if (qr.rank() <= rank) {
        aliased.push_back(names[static_cast<std::size_t>(c)]);
      } else {
        rank = qr.rank();
      }
    }
  }
  if (!aliased.empty()) {
    std::string list;
    for (const auto& a : aliased) list += (list.empty() ? "" : ", ") + a;
    throw DesignError("rank-deficient design; aliased terms: " + list);
  }

  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  const Eigen::VectorXd beta = qr.solve(y);
  const Eigen::VectorXd resid = y - x * beta;
  RegressionResult out;
  out.residual_df = static_cast<double>(rows - cols);
  const Eigen::MatrixXd xtx_inv = (x.transpose() * x).inverse();
  double sigma2 = kNaN;
  if (out.residual_df > 0) sigma2 = resid.squaredNorm() / out.residual_df;
  out.sigma = std::sqrt(sigma2);
  for (Eigen::Index c = 0; c < cols; ++c) {
    Coefficient co;
    co.term = names[static_cast<std::size_t>(c)];
    co.estimate = beta(c);
    if (out.residual_df > 0) {
      co.se = std::sqrt(sigma2 * xtx_inv(c, c));
      co.t = co.se > 0 ? co.estimate / co.se : kNaN;
      co.p = std::isfinite(co.t) ? 2.0 * boost::math::cdf(boost::math::complement(
                                            boost::math::students_t(out.residual_df), std::abs(co.t)))
                                 : kNaN;
    } else {
      co.se = co.t = co.p = kNaN;
    }
    out.coefficients.push_back(co);
  }
  return out;
}

}  // namespace synlm::psych
