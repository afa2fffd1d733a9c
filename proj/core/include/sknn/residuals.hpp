#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "sknn/engine.hpp"

namespace sknn {

struct ResidualReport {
  std::vector<double> global;                 // r_i (MAE), floored
  std::vector<Confusion> confusion;           // per nominal feature
  std::vector<std::vector<double>> per_case;  // n x xi; negative where not evaluated
  std::vector<double> trace;                  // max relative change per iteration
  std::vector<bool> degenerate;               // bootstrap fallback fired for feature
};

// Smallest nonzero pairwise difference per feature; acts as the empirical
// lower bound for deviations. Nominal features start with an
// epsilon-smoothed identity confusion matrix.
DeviationVector bootstrap_deviations(const Dataset& ds, std::vector<bool>* flagged = nullptr);

struct ResidualOptions {
  std::size_t subsample_cap = 2000;  // hold-one-out over at most this many cases
  std::uint64_t subsample_seed = 0x5eed;
  bool keep_per_case = true;
};

// Hold-one-out residuals: every case is removed in turn and each of its
// known features predicted from the rest via react.
ResidualReport holdout_residuals(const Model& m, const ResidualOptions& opts = {});

// Feeds hold-one-out residuals back into the LK metric until the max
// relative change per feature drops below tol. Updates m.deviations.
DeviationVector iterate_residuals(Model& m, int max_iters, double tol,
                                  ResidualReport* report = nullptr,
                                  const ResidualOptions& opts = {});

void write_residual_report(std::ostream& out, const Dataset& ds, const ResidualReport& r,
                           char delim = ',');

}  // namespace sknn
