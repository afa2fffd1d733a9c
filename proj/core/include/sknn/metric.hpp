#pragma once

#include <span>
#include <vector>

#include "sknn/data.hpp"

namespace sknn {

enum class DeviationMode { None, LkNormal };

struct MetricConfig {
  double p = 0.0;  // Lebesgue parameter; 0 selects the geometric-mean limit form
  DeviationMode mode = DeviationMode::LkNormal;
};

// Row-stochastic confusion matrix over a nominal feature's symbol codes.
struct Confusion {
  int size = 0;
  std::vector<double> p;  // row-major, size*size

  double at(int row, int col) const { return p[static_cast<std::size_t>(row) * size + col]; }
  double& at(int row, int col) { return p[static_cast<std::size_t>(row) * size + col]; }

  static Confusion smoothed_identity(int n, double eps = 1e-6);
  void normalize_rows(double eps = 1e-6);
};

// Per-feature expected deviations r_i plus per-nominal-feature confusion
// matrices. Every r_i is kept strictly positive.
struct DeviationVector {
  std::vector<double> r;
  std::vector<Confusion> confusion;  // empty Confusion for non-nominal features

  bool empty() const { return r.empty(); }
};

// Expected |x - y| for two normal distributions with means mu apart and a
// shared standard deviation sigma. Strictly greater than mu for sigma > 0.
double lk_expected_distance_normal(double mu_xy, double sigma);

// Weighted power mean (sum_i w_i x_i^p)^(1/p); p = 0 uses the closed-form
// limit prod_i x_i^(w_i). Weights must sum to 1.
double generalized_mean(std::span<const double> values, std::span<const double> weights,
                        double p);

// Per-feature expected difference between two known values.
double feature_difference(const FeatureSchema& f, double a, double b, double deviation,
                          DeviationMode mode, const Confusion* confusion);

// Distance between two cases over the given feature subset; weights are
// renormalized over the subset. Both cases must know every subset feature.
double case_distance(std::span<const FeatureSchema> schema,
                     const std::vector<Value>& x, const std::vector<Value>& y,
                     const MetricConfig& config, const DeviationVector& deviations,
                     std::span<const int> subset);

}  // namespace sknn
