#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "sknn/engine.hpp"
#include "sknn/random.hpp"

namespace sknn {

struct SynthesisRequest {
  std::vector<std::pair<int, double>> conditions;  // (feature index, value)
  double conviction = 1.0;                         // nu
  int count = 1;
  std::uint64_t seed = 0;
  bool order_by_feature_conviction = false;
};

// Laplace scale 1/zeta_i = r_i * (E[I]/nu)^xi per feature.
std::vector<double> laplace_scales(Model& m, double nu);

// Laplace(center, scale) draw: fair side choice then an exponential
// magnitude. Out-of-bounds draws are retried up to 100 times, then
// clamped.
double resample_continuous(double center, double scale, Rng& rng,
                           const FeatureSchema* bounds = nullptr);

int resample_nominal(int value, const Confusion& confusion, Rng& rng);

Case synthesize_case(Model& m, const SynthesisRequest& request, Rng& rng);

// count cases from a seeded stream; ids assigned after the model's last id.
std::vector<Case> synthesize(Model& m, const SynthesisRequest& request);

}  // namespace sknn
