#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "sknn/conviction.hpp"

namespace sknn {

// Cases with prediction conviction below threshold, sorted ascending by
// pi_p. With require_unfamiliar the case must also sit in the lower half
// of familiarity conviction ("unusual and hard to predict").
std::vector<std::int64_t> detect_anomalies(Model& m, double threshold = 0.5,
                                           bool require_unfamiliar = false);

struct CasePrunePolicy {
  enum Kind { SurprisalFloor, Cap, RemoveCount } kind = Cap;
  double value = 0;
};

struct RemovalRecord {
  std::int64_t id;
  double self_info;
  double pred_conviction;
  double fam_conviction;
};

// Greedy removal of the lowest-self-information cases, recomputing I every
// batch. Batch size defaults to 10% of the planned removals.
Model prune_cases(const Model& m, CasePrunePolicy policy, std::vector<RemovalRecord>& log,
                  double batch_fraction = 0.1);

struct FeaturePrunePolicy {
  enum Kind { ConvictionFloor, KeepTop } kind = KeepTop;
  double value = 0;
  bool use_contribution = false;  // rank by pi_c instead of per-feature pi_p
};

Model prune_features(const Model& m, FeaturePrunePolicy policy,
                     std::vector<std::string>& dropped);

void write_removal_log(std::ostream& out, const std::vector<RemovalRecord>& log,
                       char delim = ',');

}  // namespace sknn
