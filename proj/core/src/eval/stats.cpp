#include "ctxrec/eval/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/normal.hpp>

namespace ctxrec::eval {

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("pearson: samples differ in length");
  if (x.size() < 3) throw std::invalid_argument("pearson: at least 3 pairs required");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0, syy = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw UndefinedStatistic("pearson: zero variance");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::vector<double> midranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    const double r = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

namespace {

struct Pooled {
  std::vector<double> ranks;  // x first, then y
  std::size_t nx = 0;
  double w = 0.0;
};

Pooled pool(std::span<const double> x, std::span<const double> y) {
  if (x.empty() || y.empty()) throw std::invalid_argument("ranksum: both samples must be nonempty");
  std::vector<double> all(x.begin(), x.end());
  all.insert(all.end(), y.begin(), y.end());
  Pooled p;
  p.ranks = midranks(all);
  p.nx = x.size();
  p.w = std::accumulate(p.ranks.begin(), p.ranks.begin() + static_cast<std::ptrdiff_t>(x.size()), 0.0);
  return p;
}

RankSumResult base_result(const Pooled& p) {
  RankSumResult r;
  r.w = p.w;
  const double nx = static_cast<double>(p.nx);
  r.u = p.w - nx * (nx + 1.0) / 2.0;
  return r;
}

// Visits every size-k subset sum of `ranks`.
template <typename F>
void subset_sums(const std::vector<double>& ranks, std::size_t k, F&& visit) {
  std::vector<std::size_t> idx(k);
  std::iota(idx.begin(), idx.end(), 0);
  const std::size_t n = ranks.size();
  while (true) {
    double s = 0.0;
    for (std::size_t i : idx) s += ranks[i];
    visit(s);
    std::size_t i = k;
    while (i > 0 && idx[i - 1] == n - k + i - 1) --i;
    if (i == 0) return;
    ++idx[i - 1];
    for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

}  // namespace

RankSumResult ranksum_exact(std::span<const double> x, std::span<const double> y) {
  const Pooled p = pool(x, y);
  RankSumResult r = base_result(p);
  r.exact = true;
  const double n = static_cast<double>(p.ranks.size());
  const double expected = static_cast<double>(p.nx) * (n + 1.0) / 2.0;
  const double observed = std::abs(p.w - expected);
  const double tol = 1e-9 * std::max(1.0, n * n);
  std::size_t extreme = 0, total = 0;
  subset_sums(p.ranks, p.nx, [&](double s) {
    ++total;
    if (std::abs(s - expected) >= observed - tol) ++extreme;
  });
  r.p = static_cast<double>(extreme) / static_cast<double>(total);
  return r;
}

RankSumResult ranksum_normal(std::span<const double> x, std::span<const double> y) {
  const Pooled p = pool(x, y);
  RankSumResult r = base_result(p);
  const double nx = static_cast<double>(p.nx);
  const double ny = static_cast<double>(y.size());
  const double n = nx + ny;
  std::vector<double> sorted = p.ranks;
  std::sort(sorted.begin(), sorted.end());
  double tie_term = 0.0;
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    const double t = static_cast<double>(j - i);
    tie_term += t * t * t - t;
    i = j;
  }
  const double variance = nx * ny / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
  if (!(variance > 0.0)) {
    r.p = 1.0;
    return r;
  }
  const double dev = std::abs(p.w - nx * (n + 1.0) / 2.0);
  r.z = std::max(0.0, dev - 0.5) / std::sqrt(variance);
  if (p.w < nx * (n + 1.0) / 2.0) r.z = -r.z;
  const boost::math::normal_distribution<double> normal;
  r.p = std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(normal, std::abs(r.z))));
  return r;
}

RankSumResult ranksum_test(std::span<const double> x, std::span<const double> y) {
  return x.size() + y.size() <= kExactRankSumLimit ? ranksum_exact(x, y) : ranksum_normal(x, y);
}

AnovaResult anova_oneway(const std::vector<std::vector<double>>& groups) {
  if (groups.size() < 2) throw std::invalid_argument("anova: at least two groups required");
  std::size_t total_n = 0;
  double grand_sum = 0.0;
  for (const auto& g : groups) {
    if (g.empty()) throw std::invalid_argument("anova: every group needs an observation");
    total_n += g.size();
    grand_sum += std::accumulate(g.begin(), g.end(), 0.0);
  }
  AnovaResult r;
  r.df_between = static_cast<int>(groups.size()) - 1;
  r.df_within = static_cast<int>(total_n - groups.size());
  if (r.df_within < 1) throw std::invalid_argument("anova: no within-group degrees of freedom");
  const double grand_mean = grand_sum / static_cast<double>(total_n);
  for (const auto& g : groups) {
    const double mean = std::accumulate(g.begin(), g.end(), 0.0) / static_cast<double>(g.size());
    r.ss_between += static_cast<double>(g.size()) * (mean - grand_mean) * (mean - grand_mean);
    for (double v : g) r.ss_within += (v - mean) * (v - mean);
  }
  if (r.ss_within == 0.0) {
    r.degenerate = true;
    if (r.ss_between == 0.0) {
      r.f = r.p = std::numeric_limits<double>::quiet_NaN();
    } else {
      r.f = std::numeric_limits<double>::infinity();
      r.p = 0.0;
    }
    return r;
  }
  r.f = (r.ss_between / r.df_between) / (r.ss_within / r.df_within);
  const boost::math::fisher_f_distribution<double> dist(r.df_between, r.df_within);
  r.p = boost::math::cdf(boost::math::complement(dist, r.f));
  return r;
}

double sem_binary(double accuracy, std::size_t n) {
  if (n <= 1) return 0.0;
  return std::sqrt(accuracy * (1.0 - accuracy) / static_cast<double>(n));
}

}  // namespace ctxrec::eval
