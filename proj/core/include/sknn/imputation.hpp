#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "sknn/engine.hpp"

namespace sknn {

struct ImputeOptions {
  int batch = 1;
  enum Until { Complete, SurprisalCeiling, SparsityTarget } until = Complete;
  double threshold = 0;            // ceiling s or target sparsity fraction
  bool stochastic = false;         // draw from the synthesis resampler instead of react
  bool feature_entropy_first = false;
  std::uint64_t seed = 0;
  double conviction = 1.0;         // nu for the stochastic resampler
};

struct ImputeRecord {
  std::int64_t case_id;
  int feature;
  double value;
  double self_info;  // at imputation time, conditioned on the known features
  int iteration;
};

// Fills missing values in order of (fewest nulls, then least surprisal
// conditioned on each case's known features), scaffolding each batch of
// filled values back into the model before re-ranking.
void impute(Model& m, const ImputeOptions& opts, std::vector<ImputeRecord>& log);

// Applies a log verbatim; with the same starting model this reproduces the
// imputed model exactly.
void replay_imputation(Model& m, const std::vector<ImputeRecord>& log);

void write_imputation_log(std::ostream& out, const Dataset& ds,
                          const std::vector<ImputeRecord>& log, char delim = ',');

}  // namespace sknn
