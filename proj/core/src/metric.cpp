#include "sknn/metric.hpp"

#include <algorithm>
#include <cmath>

#include "sknn/error.hpp"

namespace sknn {

namespace {
constexpr double kDiffFloor = 1e-300;  // underflow guard for the p=0 product
constexpr double kNominalEps = 1e-6;
}  // namespace

Confusion Confusion::smoothed_identity(int n, double eps) {
  Confusion c;
  c.size = n;
  c.p.assign(static_cast<std::size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i) c.at(i, i) = 1.0;
  c.normalize_rows(eps);
  return c;
}

void Confusion::normalize_rows(double eps) {
  for (int i = 0; i < size; ++i) {
    double total = 0;
    for (int j = 0; j < size; ++j) {
      at(i, j) += eps;
      total += at(i, j);
    }
    for (int j = 0; j < size; ++j) at(i, j) /= total;
  }
}

double lk_expected_distance_normal(double mu_xy, double sigma) {
  if (sigma <= 0) throw usage_error("lk_expected_distance_normal requires sigma > 0");
  const double root_pi = 1.7724538509055160272981674833411;
  double z = mu_xy / (2.0 * sigma);
  return mu_xy + (2.0 * sigma / root_pi) * std::exp(-z * z) - mu_xy * std::erfc(z);
}

double generalized_mean(std::span<const double> values, std::span<const double> weights,
                        double p) {
  if (values.size() != weights.size())
    throw usage_error("generalized_mean: length mismatch");
  if (values.empty()) throw usage_error("generalized_mean: empty input");
  for (double v : values)
    if (v < 0) throw usage_error("generalized_mean: negative value");

  if (p == 0.0) {
    double log_sum = 0;
    for (std::size_t i = 0; i < values.size(); ++i)
      log_sum += weights[i] * std::log(std::max(values[i], kDiffFloor));
    return std::exp(log_sum);
  }

  // Factor out an extreme to keep x^p in range.
  double pivot = p > 0 ? *std::max_element(values.begin(), values.end())
                       : *std::min_element(values.begin(), values.end());
  if (pivot <= 0) pivot = kDiffFloor;
  double acc = 0;
  for (std::size_t i = 0; i < values.size(); ++i)
    acc += weights[i] * std::pow(std::max(values[i], kDiffFloor) / pivot, p);
  return pivot * std::pow(acc, 1.0 / p);
}

double feature_difference(const FeatureSchema& f, double a, double b, double deviation,
                          DeviationMode mode, const Confusion* confusion) {
  switch (f.kind) {
    case FeatureKind::Continuous: {
      double mu = std::fabs(a - b);
      if (mode == DeviationMode::None) return mu;
      return lk_expected_distance_normal(mu, deviation);
    }
    case FeatureKind::Nominal: {
      bool equal = static_cast<int>(a) == static_cast<int>(b);
      if (!equal) return 1.0;
      if (mode == DeviationMode::None) return 0.0;
      int code = static_cast<int>(a);
      double diag = 0.0;
      if (confusion && confusion->size > code) diag = confusion->at(code, code);
      return std::max(kNominalEps, 1.0 - diag);
    }
    case FeatureKind::Ordinal:
      return std::fabs(a - b);
    case FeatureKind::Cyclic: {
      double delta = std::fmod(std::fabs(a - b), f.period);
      return std::min(delta, f.period - delta);
    }
  }
  return 0.0;
}

double case_distance(std::span<const FeatureSchema> schema,
                     const std::vector<Value>& x, const std::vector<Value>& y,
                     const MetricConfig& config, const DeviationVector& deviations,
                     std::span<const int> subset) {
  if (subset.empty()) throw infeasible_error("case_distance: empty feature subset");

  double weight_total = 0;
  for (int fi : subset) weight_total += schema[static_cast<std::size_t>(fi)].weight;

  std::vector<double> diffs, weights;
  diffs.reserve(subset.size());
  weights.reserve(subset.size());
  for (int fi : subset) {
    auto i = static_cast<std::size_t>(fi);
    const FeatureSchema& f = schema[i];
    double r = deviations.r.empty() ? 1.0 : deviations.r[i];
    const Confusion* conf =
        (i < deviations.confusion.size() && deviations.confusion[i].size > 0)
            ? &deviations.confusion[i]
            : nullptr;
    diffs.push_back(feature_difference(f, *x[i], *y[i], r, config.mode, conf));
    weights.push_back(f.weight / weight_total);
  }
  // Identical cases are exactly coincident; bypass the underflow floor so
  // that duplicate handling downstream can key on a true zero.
  if (std::all_of(diffs.begin(), diffs.end(), [](double d) { return d == 0.0; }))
    return 0.0;
  return generalized_mean(diffs, weights, config.p);
}

}  // namespace sknn
