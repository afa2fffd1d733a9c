#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "sknn/conviction.hpp"
#include "sknn/residuals.hpp"

namespace sknn {

struct CounterfactualEntry {
  std::int64_t id;
  double action_difference;
  double distance;
  double ratio;  // action_difference / distance
};

struct ConvictionRatioEntry {
  std::int64_t id;
  double local_pred, global_pred, pred_ratio;
  double local_fam, global_fam, fam_ratio;
  bool noise_flag;  // low local conviction, high global conviction
};

struct ExplanationBundle {
  std::vector<Value> query;
  std::vector<int> action_features;
  std::vector<double> decision;
  Neighborhood neighborhood;
  std::vector<CounterfactualEntry> counterfactuals;
  std::optional<std::int64_t> archetype_id;
  double archetype_separation = 0.0;
  std::vector<int> outside_range_features;
  std::vector<double> regional_residuals;  // per feature, local hold-one-out
  double action_probability = 0.0;
  double less_similar = 0.0;
  std::vector<ConvictionRatioEntry> conviction_ratios;
  std::vector<double> feature_contribution;  // pi_c snapshot per feature
};

struct ExplainOptions {
  int counterfactual_count = 3;
  double action_tolerance = 0.0;  // 0 -> action feature residual
  int local_count = 0;            // 0 -> 2k
  int less_similar_exclude = 0;   // 0 -> k
  bool plain_counterfactual_rank = false;  // nearest differing-action instead of ratio
};

ExplanationBundle explain_react(Model& m, const std::vector<Value>& context,
                                std::span<const int> action_features, int k,
                                const ExplainOptions& options = {});

// The `count` nearest cases whose action value differs from the
// suggestion, ranked by action-difference / total-distance descending.
std::vector<CounterfactualEntry> counterfactuals(const Model& m,
                                                 const std::vector<Value>& context,
                                                 int action_feature, double suggested,
                                                 int count, bool plain_rank = false);

// Among same-action cases, the one furthest from its nearest
// differing-action case; returns (case id, max-min separation).
std::pair<std::int64_t, double> archetype(const Model& m, const std::vector<Value>& context,
                                          int action_feature, double suggested);

// Weighted fraction of the neighborhood within +/- tolerance of the
// suggestion (exact symbol match for nominal).
double action_probability(const Model& m, const Neighborhood& hood, int action_feature,
                          double suggested, double tolerance);

struct LessSimilarExclusion {
  enum Kind { Count, Radius, DensityThreshold } kind = Count;
  double value = 0;
};

double less_similar_distance(const Model& m, const std::vector<Value>& context,
                             LessSimilarExclusion exclusion);

std::vector<ConvictionRatioEntry> conviction_ratios(Model& m,
                                                    const std::vector<std::size_t>& local,
                                                    double noise_low = 0.75,
                                                    double noise_high = 1.25);

// Hold-one-out residuals over the N nearest cases only.
std::vector<double> regional_residuals(const Model& m, const std::vector<Value>& context,
                                       std::size_t n_nearest);

// Stable, diffable text form; doubles printed to round-trip precision.
void write_bundle(std::ostream& out, const Dataset& ds, const ExplanationBundle& b);

}  // namespace sknn
