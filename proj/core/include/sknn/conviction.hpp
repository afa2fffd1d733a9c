#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "sknn/engine.hpp"

namespace sknn {

// Harmonic mean of d(x, k_i)^alpha over the k nearest neighbors. In-model
// points pass their id as self to be excluded. Exact duplicates share one
// contribution computed against the nearest distinct neighbor, split
// equally; with no distinct neighbor at all the contribution is 0.
double distance_contribution(const Model& m, const std::vector<Value>& values,
                             std::optional<std::int64_t> self,
                             std::span<const int> subset, int k, double alpha);

// I(x) = phi(x) / ||r||_p with the norm taken at the model's p over the
// subset's renormalized weights. Nats.
double self_information(const Model& m, const std::vector<Value>& values,
                        std::optional<std::int64_t> self, std::span<const int> subset);

// Mean hold-one-out self-information over the model's cases; cached.
double expected_self_information(Model& m);

// pi_p(x) = E[I] / I(x); +inf when I(x) = 0 (fully redundant point).
double prediction_conviction(Model& m, const std::vector<Value>& values,
                             std::optional<std::int64_t> self = std::nullopt);

// l(i) = phi(x_i) / sum_j phi(x_j), hold-one-out contributions.
std::vector<double> point_probabilities(const Model& m);

// pi_f per case from the KL impact of replacing l(i) with 1/n
// (replace-and-renormalize). Uniform distributions give pi_f = 1.
std::vector<double> familiarity_conviction_all(const Model& m);
double familiarity_conviction(const Model& m, std::size_t case_index);

// Mean self-information with feature i removed from distance and residual
// roles.
double mean_self_information_without(const Model& m, int feature);

// pi_c(i) = (E I(M) - E I(M_-i)) / E I(M); may be negative.
double feature_prediction_contribution(Model& m, int feature);
std::vector<double> feature_prediction_contribution_all(Model& m);

// pi_p(i) = mean_j E I(M_-j) / E I(M_-i).
std::vector<double> feature_prediction_conviction_all(Model& m);

// Mean self-information of other's cases measured against reference.
// Cases identical to a reference case exclude that one match, so a model
// compared against itself reports its own E[I].
double model_surprisal(const Model& reference, const Dataset& other);

struct ConvictionReport {
  // per-case rows
  std::vector<std::int64_t> ids;
  std::vector<double> phi, self_info, pred_conviction, fam_conviction;
  // per-feature rows
  std::vector<std::string> feature_names;
  std::vector<double> feature_contribution, feature_conviction;
  double expected_info = 0.0;
};

ConvictionReport conviction_report_cases(Model& m);
ConvictionReport conviction_report_features(Model& m);
void write_conviction_report(std::ostream& out, const ConvictionReport& r, char delim = ',');

}  // namespace sknn
