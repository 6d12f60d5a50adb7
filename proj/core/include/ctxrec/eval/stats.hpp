#pragma once

#include <span>
#include <stdexcept>
#include <vector>

namespace ctxrec::eval {

/// Raised when a statistic is undefined for the input (e.g. zero variance).
class UndefinedStatistic : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Pearson correlation of paired samples; needs >= 3 pairs and nonzero
/// variance on both sides (UndefinedStatistic otherwise).
[[nodiscard]] double pearson(std::span<const double> x, std::span<const double> y);

inline constexpr std::size_t kExactRankSumLimit = 12;

struct RankSumResult {
  double w = 0.0;   // sum of midranks of x in the pooled sample
  double u = 0.0;   // Mann-Whitney U for x: w - nx(nx+1)/2
  double z = 0.0;   // normal score (approximate mode only)
  double p = 1.0;   // two-sided
  bool exact = false;
};

/// Midranks (1-based) of the pooled sample; ties share their average rank.
[[nodiscard]] std::vector<double> midranks(std::span<const double> values);

/// Two-sided Wilcoxon rank-sum test. Exact permutation distribution of the
/// midrank sum when nx + ny <= 12, else normal approximation with tie and
/// continuity corrections.
[[nodiscard]] RankSumResult ranksum_test(std::span<const double> x, std::span<const double> y);

/// Forces one mode regardless of sample size.
[[nodiscard]] RankSumResult ranksum_exact(std::span<const double> x, std::span<const double> y);
[[nodiscard]] RankSumResult ranksum_normal(std::span<const double> x, std::span<const double> y);

struct AnovaResult {
  double f = 0.0;
  double p = 1.0;
  int df_between = 0;
  int df_within = 0;
  double ss_between = 0.0;
  double ss_within = 0.0;
  /// Zero within-group variance: F is +inf (p = 0) when the groups differ and
  /// NaN (p NaN) when every observation is equal.
  bool degenerate = false;
};

[[nodiscard]] AnovaResult anova_oneway(const std::vector<std::vector<double>>& groups);

/// Bernoulli standard error sqrt(p(1-p)/n); 0 for n <= 1.
[[nodiscard]] double sem_binary(double accuracy, std::size_t n);

}  // namespace ctxrec::eval
