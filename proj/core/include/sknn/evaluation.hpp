#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "sknn/engine.hpp"

namespace sknn {

struct EvalConfig {
  std::string label;
  double p = 0.0;
  DeviationMode mode = DeviationMode::LkNormal;
  bool standardize = false;  // z-score features from train-split stats
  int residual_iters = 3;    // lk-normal only
};

inline EvalConfig classic_config() { return {"p2-standardized", 2.0, DeviationMode::None, true, 0}; }
inline EvalConfig fractional_config() { return {"p0.5-fractional", 0.5, DeviationMode::None, false, 0}; }
inline EvalConfig lk_config() { return {"p0-lk", 0.0, DeviationMode::LkNormal, false, 3}; }

struct EvalDataset {
  std::string name;
  Dataset data;
  int target;            // feature index to score
  bool classification;   // accuracy if true, r^2 otherwise
};

struct EvalCell {
  std::string dataset, config;
  double score;  // accuracy or r^2
};

struct EvalResult {
  std::vector<EvalCell> cells;
  std::vector<std::string> configs;
  std::vector<double> aggregate;  // mean score per config, aligned with configs

  std::vector<double> scores_for(const std::string& config) const;
};

struct EvalOptions {
  int folds = 5;
  int k = 8;
  std::uint64_t seed = 7;
};

// Cross-validated fit/react/score over every dataset x configuration cell.
EvalResult evaluate(const std::vector<EvalDataset>& datasets,
                    const std::vector<EvalConfig>& configs, const EvalOptions& opts = {});

// Bundled desk-scale synthetic suite.
std::vector<EvalDataset> synthetic_regression_suite(int count = 10, std::uint64_t seed = 11);
std::vector<EvalDataset> synthetic_classification_suite(int count = 10, std::uint64_t seed = 13);

double r_squared(std::span<const double> actual, std::span<const double> predicted);
double accuracy(std::span<const double> actual, std::span<const double> predicted);

void write_eval_result(std::ostream& out, const EvalResult& r, char delim = ',');

}  // namespace sknn
