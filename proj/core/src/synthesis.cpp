#include "sknn/synthesis.hpp"

#include <algorithm>
#include <cmath>

#include "sknn/conviction.hpp"
#include "sknn/error.hpp"
#include "sknn/residuals.hpp"

namespace sknn {

std::vector<double> laplace_scales(Model& m, double nu) {
  if (nu <= 0) throw usage_error("conviction target nu must be positive");
  if (m.deviations.empty())
    throw infeasible_error("model has no deviations; run residuals first");
  double ei = expected_self_information(m);
  double factor = std::pow(ei / nu, static_cast<double>(m.feature_count()));
  std::vector<double> scales(m.feature_count());
  for (std::size_t i = 0; i < scales.size(); ++i)
    scales[i] = m.deviations.r[i] * factor;
  return scales;
}

double resample_continuous(double center, double scale, Rng& rng,
                           const FeatureSchema* bounds) {
  if (scale <= 0) return center;
  double lo = bounds && bounds->lower ? *bounds->lower : -std::numeric_limits<double>::infinity();
  double hi = bounds && bounds->upper ? *bounds->upper : std::numeric_limits<double>::infinity();
  double draw = center;
  for (int attempt = 0; attempt < 100; ++attempt) {
    draw = rng.laplace(center, scale);
    if (draw >= lo && draw <= hi) return draw;
  }
  return std::min(std::max(draw, lo), hi);
}

int resample_nominal(int value, const Confusion& confusion, Rng& rng) {
  if (confusion.size == 0 || value >= confusion.size) return value;
  double total = 0;
  for (int j = 0; j < confusion.size; ++j) total += confusion.at(value, j);
  if (total <= 0) {
    // Degenerate row: fall back to uniform.
    return static_cast<int>(rng.integer(static_cast<std::uint64_t>(confusion.size)));
  }
  double u = rng.uniform() * total;
  double acc = 0;
  for (int j = 0; j < confusion.size; ++j) {
    acc += confusion.at(value, j);
    if (u < acc) return j;
  }
  return confusion.size - 1;
}

namespace {

// Local residual for one feature over the 2k nearest cases to the partial
// values, when enough cases exist; falls back to the global r_i.
double local_residual(Model& m, const std::vector<Value>& partial, std::size_t feature,
                      double global_r) {
  const std::size_t want = 2 * static_cast<std::size_t>(m.default_k());
  if (m.size() < want || want < 4) return global_r;

  std::vector<std::size_t> local;
  try {
    local = local_model(m, partial, {LocalSize::Count, static_cast<double>(want)});
  } catch (const Error&) {
    return global_r;
  }
  if (local.size() < want) return global_r;

  // Mean absolute deviation of the feature within the local pocket.
  std::vector<double> vals;
  for (std::size_t idx : local) {
    const auto& v = m.data.cases[idx].values[feature];
    if (v.has_value()) vals.push_back(*v);
  }
  if (vals.size() < 2) return global_r;
  if (m.data.schema[feature].kind == FeatureKind::Nominal) return global_r;
  double mean = 0;
  for (double v : vals) mean += v;
  mean /= static_cast<double>(vals.size());
  double mad = 0;
  for (double v : vals) mad += std::fabs(v - mean);
  mad /= static_cast<double>(vals.size());
  return mad > 0 ? mad : global_r;
}

}  // namespace

Case synthesize_case(Model& m, const SynthesisRequest& request, Rng& rng) {
  const std::size_t xi = m.feature_count();
  if (m.size() == 0) throw infeasible_error("cannot synthesize from an empty model");
  if (m.deviations.empty())
    throw infeasible_error("model has no deviations; run residuals first");
  for (const auto& [fi, v] : request.conditions)
    if (fi < 0 || static_cast<std::size_t>(fi) >= xi)
      throw usage_error("condition references an unknown feature");

  double ei = expected_self_information(m);
  double factor = std::pow(ei / request.conviction, static_cast<double>(xi));

  Case out;
  out.origin = Origin::Synthesized;
  out.values.assign(xi, std::nullopt);
  std::vector<bool> filled(xi, false);
  for (const auto& [fi, v] : request.conditions) {
    out.values[static_cast<std::size_t>(fi)] = v;
    filled[static_cast<std::size_t>(fi)] = true;
  }

  // Remaining feature order: random shuffle or descending feature conviction.
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < xi; ++i)
    if (!filled[i]) order.push_back(i);
  if (request.order_by_feature_conviction && xi >= 2) {
    auto conviction = feature_prediction_conviction_all(m);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return conviction[a] > conviction[b];
    });
  } else {
    for (std::size_t i = 0; i + 1 < order.size(); ++i) {
      std::size_t j = i + static_cast<std::size_t>(rng.integer(order.size() - i));
      std::swap(order[i], order[j]);
    }
  }

  auto resample_feature = [&](std::size_t j, double center) -> double {
    const FeatureSchema& f = m.data.schema[j];
    if (f.kind == FeatureKind::Nominal) {
      const Confusion& conf = m.deviations.confusion[j];
      return resample_nominal(static_cast<int>(center), conf, rng);
    }
    double r = local_residual(m, out.values, j, m.deviations.r[j]);
    double draw = resample_continuous(center, r * factor, rng,
                                      f.kind == FeatureKind::Continuous ? &f : nullptr);
    return snap_prediction(f, draw);
  };

  bool have_any = !request.conditions.empty();
  std::size_t start = 0;
  if (!have_any && !order.empty()) {
    // Seed the chain: random feature of a uniformly random observation.
    std::size_t j = order[0];
    const Case& seed_case =
        m.data.cases[static_cast<std::size_t>(rng.integer(m.size()))];
    double base = seed_case.values[j].has_value()
                      ? *seed_case.values[j]
                      : *m.data.cases[0].values[j];
    out.values[j] = resample_feature(j, base);
    start = 1;
  }

  for (std::size_t oi = start; oi < order.size(); ++oi) {
    std::size_t j = order[oi];
    std::vector<int> action{static_cast<int>(j)};
    double center;
    try {
      center = react(m, out.values, action, m.default_k()).values[0];
    } catch (const Error&) {
      // No usable context (fully unconditioned degenerate call): seed from a
      // random observation instead.
      const Case& seed_case =
          m.data.cases[static_cast<std::size_t>(rng.integer(m.size()))];
      center = seed_case.values[j].has_value() ? *seed_case.values[j] : 0.0;
    }
    out.values[j] = resample_feature(j, center);
  }
  return out;
}

std::vector<Case> synthesize(Model& m, const SynthesisRequest& request) {
  Rng rng(request.seed);
  std::int64_t next_id = 0;
  for (const auto& cs : m.data.cases) next_id = std::max(next_id, cs.id + 1);

  std::vector<Case> out;
  for (int i = 0; i < request.count; ++i) {
    Case cs = synthesize_case(m, request, rng);
    cs.id = next_id++;
    out.push_back(std::move(cs));
  }
  return out;
}

}  // namespace sknn
