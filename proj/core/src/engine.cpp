#include "sknn/engine.hpp"

#include <algorithm>
#include <cmath>

#include "sknn/error.hpp"

namespace sknn {

int Model::index_of(std::int64_t case_id) const {
  for (std::size_t i = 0; i < data.cases.size(); ++i)
    if (data.cases[i].id == case_id) return static_cast<int>(i);
  return -1;
}

int Model::default_k() const {
  auto n = static_cast<int>(data.size());
  return std::max(1, std::min(omega.k, n - 1));
}

Model make_model(Dataset ds, Hyperparams omega) {
  Model m;
  m.data = std::move(ds);
  m.data.normalize_weights();
  m.omega = omega;
  return m;
}

namespace {

// Known-feature intersection of context and candidate.
std::vector<int> known_intersection(const std::vector<Value>& context, const Case& cand) {
  std::vector<int> subset;
  for (std::size_t i = 0; i < context.size(); ++i)
    if (context[i].has_value() && cand.values[i].has_value())
      subset.push_back(static_cast<int>(i));
  return subset;
}

struct Scored {
  double distance;
  std::int64_t id;
  std::size_t index;
};

std::vector<Scored> scan(const Model& m, const std::vector<Value>& context,
                         const std::unordered_set<std::int64_t>& exclude) {
  std::vector<Scored> scored;
  scored.reserve(m.data.size());
  bool any_context = false;
  for (const auto& v : context)
    if (v.has_value()) any_context = true;
  if (!any_context) throw usage_error("query context is empty");

  for (std::size_t i = 0; i < m.data.cases.size(); ++i) {
    const Case& cand = m.data.cases[i];
    if (exclude.contains(cand.id)) continue;
    auto subset = known_intersection(context, cand);
    if (subset.empty()) continue;
    double d = case_distance(m.data.schema, context, cand.values, m.omega.metric,
                             m.deviations, subset);
    scored.push_back({d, cand.id, i});
  }
  if (scored.empty())
    throw infeasible_error("no candidate shares a known feature with the context");
  std::sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) {
    return a.distance != b.distance ? a.distance < b.distance : a.id < b.id;
  });
  return scored;
}

std::vector<double> inverse_distance_weights(const std::vector<Scored>& top, double alpha) {
  std::vector<double> w(top.size(), 0.0);
  std::size_t zeros = 0;
  for (const auto& s : top)
    if (s.distance == 0.0) ++zeros;
  if (zeros > 0) {
    // Limit of inverse-distance weights: zero-distance neighbors share all mass.
    for (std::size_t i = 0; i < top.size(); ++i)
      if (top[i].distance == 0.0) w[i] = 1.0 / static_cast<double>(zeros);
    return w;
  }
  double total = 0;
  for (std::size_t i = 0; i < top.size(); ++i) {
    w[i] = 1.0 / std::pow(top[i].distance, alpha);
    total += w[i];
  }
  for (auto& x : w) x /= total;
  return w;
}

}  // namespace

Neighborhood knn_query(const Model& m, const std::vector<Value>& context, int k,
                       const std::unordered_set<std::int64_t>& exclude) {
  if (k < 1) throw usage_error("k must be positive");
  auto scored = scan(m, context, exclude);
  if (scored.size() > static_cast<std::size_t>(k)) scored.resize(static_cast<std::size_t>(k));

  Neighborhood hood;
  hood.query = context;
  auto weights = inverse_distance_weights(scored, m.omega.alpha);
  for (std::size_t i = 0; i < scored.size(); ++i)
    hood.neighbors.push_back({scored[i].id, scored[i].distance, weights[i], scored[i].index});
  return hood;
}

Prediction react(const Model& m, const std::vector<Value>& context,
                 std::span<const int> action_features, int k,
                 const std::unordered_set<std::int64_t>& exclude) {
  for (int a : action_features)
    if (context[static_cast<std::size_t>(a)].has_value())
      throw usage_error("action feature '" + m.data.schema[static_cast<std::size_t>(a)].name +
                        "' also appears in the context");

  Prediction pred;
  pred.neighborhood = knn_query(m, context, k, exclude);
  pred.action_features.assign(action_features.begin(), action_features.end());

  for (int a : action_features) {
    auto ai = static_cast<std::size_t>(a);
    const FeatureSchema& f = m.data.schema[ai];

    // Restrict to neighbors that know the action feature; renormalize.
    double total_w = 0;
    std::vector<std::pair<double, double>> known;  // (value, weight)
    for (const auto& nb : pred.neighborhood.neighbors) {
      const Case& cs = m.data.cases[nb.index];
      if (!cs.values[ai].has_value()) continue;
      known.emplace_back(*cs.values[ai], nb.weight);
      total_w += nb.weight;
    }
    if (known.empty() || total_w <= 0)
      throw infeasible_error("all neighbors are missing action feature " + f.name);

    double value = 0;
    switch (f.kind) {
      case FeatureKind::Continuous:
      case FeatureKind::Ordinal: {
        for (auto [v, w] : known) value += v * (w / total_w);
        break;
      }
      case FeatureKind::Cyclic: {
        double s = 0, c = 0;
        const double two_pi = 6.283185307179586476925287;
        for (auto [v, w] : known) {
          double theta = two_pi * v / f.period;
          s += (w / total_w) * std::sin(theta);
          c += (w / total_w) * std::cos(theta);
        }
        double angle = std::atan2(s, c);
        if (angle < 0) angle += two_pi;
        value = angle * f.period / two_pi;
        break;
      }
      case FeatureKind::Nominal: {
        std::vector<double> votes(f.symbols.size(), 0.0);
        for (auto [v, w] : known) votes[static_cast<std::size_t>(v)] += w / total_w;
        // Plurality; ties resolved by lexicographic symbol order.
        int best = -1;
        for (std::size_t c2 = 0; c2 < votes.size(); ++c2) {
          if (votes[c2] <= 0) continue;
          if (best < 0 || votes[c2] > votes[static_cast<std::size_t>(best)] ||
              (votes[c2] == votes[static_cast<std::size_t>(best)] &&
               f.symbols[c2] < f.symbols[static_cast<std::size_t>(best)]))
            best = static_cast<int>(c2);
        }
        value = best;
        break;
      }
    }
    pred.values.push_back(value);
  }
  return pred;
}

std::vector<std::size_t> local_model(const Model& m, const std::vector<Value>& context,
                                     LocalSize size,
                                     const std::unordered_set<std::int64_t>& exclude) {
  if (m.data.size() == 0) throw infeasible_error("local_model on an empty model");
  if (size.value < 0) throw usage_error("local model size must be positive");
  auto scored = scan(m, context, exclude);

  std::vector<std::size_t> out;
  if (size.kind == LocalSize::Count) {
    auto n = static_cast<std::size_t>(size.value);
    for (std::size_t i = 0; i < scored.size() && i < n; ++i) out.push_back(scored[i].index);
  } else {
    for (const auto& s : scored)
      if (s.distance <= size.value) out.push_back(s.index);
  }
  return out;
}

double snap_prediction(const FeatureSchema& f, double predicted) {
  switch (f.kind) {
    case FeatureKind::Ordinal: {
      double r = std::round(predicted);
      r = std::max(0.0, std::min(r, static_cast<double>(f.levels.size()) - 1.0));
      return r;
    }
    case FeatureKind::Cyclic: {
      double v = std::fmod(predicted, f.period);
      if (v < 0) v += f.period;
      return v;
    }
    default:
      return predicted;
  }
}

}  // namespace sknn
