#include "sknn/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>

#include "sknn/error.hpp"

namespace sknn {

std::vector<double> midranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    double mid = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = mid;
    i = j + 1;
  }
  return ranks;
}

namespace {

double normal_sf(double z) { return 0.5 * std::erfc(z / 1.4142135623730950488); }

// Tie-group cubic correction term sum(t^3 - t) over tied groups.
double tie_term(std::span<const double> sorted) {
  double s = 0;
  std::size_t i = 0;
  while (i < sorted.size()) {
    std::size_t j = i;
    while (j + 1 < sorted.size() && sorted[j + 1] == sorted[i]) ++j;
    double t = static_cast<double>(j - i + 1);
    s += t * t * t - t;
    i = j + 1;
  }
  return s;
}

}  // namespace

double wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw usage_error("wilcoxon: length mismatch");

  std::vector<double> diffs;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double d = a[i] - b[i];
    if (d != 0.0) diffs.push_back(d);
  }
  const std::size_t n = diffs.size();
  if (n == 0) return 1.0;  // every pair tied: no evidence either way

  std::vector<double> abs_d(n);
  for (std::size_t i = 0; i < n; ++i) abs_d[i] = std::fabs(diffs[i]);
  auto ranks = midranks(abs_d);

  double w_plus = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (diffs[i] > 0) w_plus += ranks[i];

  if (n <= 25) {
    // Exact: the signed-rank sum distribution by sign-flip counting over
    // doubled midranks (keeps .5 ranks integral).
    std::vector<int> r2(n);
    int total = 0;
    for (std::size_t i = 0; i < n; ++i) {
      r2[i] = static_cast<int>(std::llround(2.0 * ranks[i]));
      total += r2[i];
    }
    std::vector<double> count(static_cast<std::size_t>(total) + 1, 0.0);
    count[0] = 1.0;
    for (std::size_t i = 0; i < n; ++i)
      for (int s = total; s >= r2[i]; --s)
        count[static_cast<std::size_t>(s)] += count[static_cast<std::size_t>(s - r2[i])];

    // Distribution is symmetric about total/2; two-sided p counts outcomes
    // at least as far from the center as observed.
    double w2 = 2.0 * w_plus;
    double center = static_cast<double>(total) / 2.0;
    double dev = std::fabs(w2 - center);
    double extreme = 0, all = 0;
    for (int s = 0; s <= total; ++s) {
      all += count[static_cast<std::size_t>(s)];
      if (std::fabs(static_cast<double>(s) - center) >= dev - 1e-9)
        extreme += count[static_cast<std::size_t>(s)];
    }
    return extreme / all;
  }

  // Normal approximation with tie correction.
  double nn = static_cast<double>(n);
  double mean = nn * (nn + 1.0) / 4.0;
  std::vector<double> sorted(abs_d);
  std::sort(sorted.begin(), sorted.end());
  double var = nn * (nn + 1.0) * (2.0 * nn + 1.0) / 24.0 - tie_term(sorted) / 48.0;
  if (var <= 0) return 1.0;
  double z = (std::fabs(w_plus - mean) - 0.5) / std::sqrt(var);
  return std::min(1.0, 2.0 * normal_sf(std::max(0.0, z)));
}

double mann_whitney_u(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw usage_error("mann_whitney_u: empty sample");
  const std::size_t n1 = a.size(), n2 = b.size(), n = n1 + n2;

  std::vector<double> pooled(a.begin(), a.end());
  pooled.insert(pooled.end(), b.begin(), b.end());
  auto ranks = midranks(pooled);

  double r1 = 0;
  for (std::size_t i = 0; i < n1; ++i) r1 += ranks[i];
  double u1 = r1 - static_cast<double>(n1) * (static_cast<double>(n1) + 1.0) / 2.0;
  double mean = static_cast<double>(n1) * static_cast<double>(n2) / 2.0;

  if (n <= 20) {
    // Exact: count label assignments by rank-sum over doubled midranks.
    std::vector<int> r2(n);
    int total = 0;
    for (std::size_t i = 0; i < n; ++i) {
      r2[i] = static_cast<int>(std::llround(2.0 * ranks[i]));
      total += r2[i];
    }
    // dp[j][s] = #ways to pick j ranks summing (doubled) to s
    std::vector<std::vector<double>> dp(n1 + 1,
                                        std::vector<double>(static_cast<std::size_t>(total) + 1, 0.0));
    dp[0][0] = 1.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = std::min(n1, i + 1); j >= 1; --j)
        for (int s = total; s >= r2[i]; --s)
          dp[j][static_cast<std::size_t>(s)] +=
              dp[j - 1][static_cast<std::size_t>(s - r2[i])];

    double dev = std::fabs(u1 - mean);
    double extreme = 0, all = 0;
    double offset = static_cast<double>(n1) * (static_cast<double>(n1) + 1.0);  // doubled
    for (int s = 0; s <= total; ++s) {
      double ways = dp[n1][static_cast<std::size_t>(s)];
      if (ways == 0) continue;
      all += ways;
      double u = (static_cast<double>(s) - offset) / 2.0;  // undouble rank sum
      if (std::fabs(u - mean) >= dev - 1e-9) extreme += ways;
    }
    return extreme / all;
  }

  std::vector<double> sorted(pooled);
  std::sort(sorted.begin(), sorted.end());
  double nd = static_cast<double>(n);
  double var = mean / 6.0 * ((nd + 1.0) - tie_term(sorted) / (nd * (nd - 1.0)));
  if (var <= 0) return 1.0;
  double z = (std::fabs(u1 - mean) - 0.5) / std::sqrt(var);
  return std::min(1.0, 2.0 * normal_sf(std::max(0.0, z)));
}

}  // namespace sknn
