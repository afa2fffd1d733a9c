#pragma once

#include <cstdint>
#include <span>
#include <unordered_set>
#include <vector>

#include "sknn/data.hpp"
#include "sknn/metric.hpp"

namespace sknn {

struct Hyperparams {
  int k = 8;
  MetricConfig metric;
  double alpha = 1.0;  // distance exponent for contribution/weighting
};

struct Neighbor {
  std::int64_t id;
  double distance;
  double weight;
  std::size_t index = 0;  // position in the model's case store
};

struct Neighborhood {
  std::vector<Value> query;
  std::vector<Neighbor> neighbors;  // distance non-decreasing, weights sum to 1
};

// Schema + case store + hyperparameters + deviations + cached
// self-information stats. Queries are safe on an immutable snapshot;
// mutations must invalidate the cache.
struct Model {
  Dataset data;
  Hyperparams omega;
  DeviationVector deviations;

  // cached stats (hold-one-out self-information per case)
  bool stats_valid = false;
  double expected_self_info = 0.0;
  std::vector<double> case_self_info;

  std::size_t size() const { return data.size(); }
  std::size_t feature_count() const { return data.feature_count(); }

  void invalidate_cache() {
    stats_valid = false;
    case_self_info.clear();
  }

  int index_of(std::int64_t case_id) const;  // -1 if absent
  int default_k() const;
};

Model make_model(Dataset ds, Hyperparams omega = {});

// Exhaustive scan by case_distance over the known-feature intersection of
// the context and each candidate; ties broken by lower case id.
Neighborhood knn_query(const Model& m, const std::vector<Value>& context, int k,
                       const std::unordered_set<std::int64_t>& exclude = {});

struct Prediction {
  std::vector<int> action_features;
  std::vector<double> values;  // aligned with action_features
  Neighborhood neighborhood;
};

// Inverse-distance-weighted prediction: weighted mean for continuous and
// ordinal, circular mean for cyclic, weighted plurality vote for nominal.
Prediction react(const Model& m, const std::vector<Value>& context,
                 std::span<const int> action_features, int k,
                 const std::unordered_set<std::int64_t>& exclude = {});

struct LocalSize {
  enum Kind { Count, Radius } kind = Count;
  double value = 0;
};

// Indices (into m.data.cases) of the cases nearest to the context,
// nearest first.
std::vector<std::size_t> local_model(const Model& m, const std::vector<Value>& context,
                                     LocalSize size,
                                     const std::unordered_set<std::int64_t>& exclude = {});

// Rounds a raw react output into a storable value for the feature kind
// (ordinal to the nearest level, cyclic into [0, period)).
double snap_prediction(const FeatureSchema& f, double predicted);

}  // namespace sknn
