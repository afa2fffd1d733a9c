#include "sknn/explain.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include "sknn/error.hpp"

namespace sknn {

namespace {

std::vector<int> known_features(const std::vector<Value>& values) {
  std::vector<int> s;
  for (std::size_t i = 0; i < values.size(); ++i)
    if (values[i].has_value()) s.push_back(static_cast<int>(i));
  return s;
}

double total_distance(const Model& m, const std::vector<Value>& context, const Case& cand) {
  std::vector<int> subset;
  for (int fi : known_features(context))
    if (cand.values[static_cast<std::size_t>(fi)].has_value()) subset.push_back(fi);
  if (subset.empty()) return std::numeric_limits<double>::infinity();
  return case_distance(m.data.schema, context, cand.values, m.omega.metric, m.deviations,
                       subset);
}

bool action_matches(const FeatureSchema& f, double a, double suggested) {
  if (f.kind == FeatureKind::Nominal || f.kind == FeatureKind::Ordinal)
    return static_cast<int>(a) == static_cast<int>(suggested);
  return a == suggested;
}

double action_difference(const FeatureSchema& f, double a, double suggested,
                         double residual) {
  if (f.kind == FeatureKind::Nominal)
    return action_matches(f, a, suggested) ? 0.0 : 1.0;
  double delta = std::fabs(a - suggested);
  if (f.kind == FeatureKind::Cyclic) {
    delta = std::fmod(delta, f.period);
    delta = std::min(delta, f.period - delta);
  }
  return residual > 0 ? delta / residual : delta;
}

}  // namespace

std::vector<CounterfactualEntry> counterfactuals(const Model& m,
                                                 const std::vector<Value>& context,
                                                 int action_feature, double suggested,
                                                 int count, bool plain_rank) {
  auto af = static_cast<std::size_t>(action_feature);
  const FeatureSchema& f = m.data.schema[af];
  double residual = m.deviations.empty() ? 1.0 : m.deviations.r[af];

  std::vector<CounterfactualEntry> entries;
  for (const auto& cand : m.data.cases) {
    if (!cand.values[af].has_value()) continue;
    if (action_matches(f, *cand.values[af], suggested)) continue;
    double dist = total_distance(m, context, cand);
    if (!std::isfinite(dist)) continue;
    double diff = action_difference(f, *cand.values[af], suggested, residual);
    double ratio = dist > 0 ? diff / dist : std::numeric_limits<double>::infinity();
    entries.push_back({cand.id, diff, dist, ratio});
  }
  if (entries.empty()) throw infeasible_error("no counterfactual exists");

  if (plain_rank) {
    std::sort(entries.begin(), entries.end(),
              [](const CounterfactualEntry& x, const CounterfactualEntry& y) {
                return x.distance != y.distance ? x.distance < y.distance : x.id < y.id;
              });
  } else {
    std::sort(entries.begin(), entries.end(),
              [](const CounterfactualEntry& x, const CounterfactualEntry& y) {
                if (x.ratio != y.ratio) return x.ratio > y.ratio;
                return x.distance != y.distance ? x.distance < y.distance : x.id < y.id;
              });
  }
  if (entries.size() > static_cast<std::size_t>(count))
    entries.resize(static_cast<std::size_t>(count));
  return entries;
}

std::pair<std::int64_t, double> archetype(const Model& m, const std::vector<Value>& context,
                                          int action_feature, double suggested) {
  auto af = static_cast<std::size_t>(action_feature);
  const FeatureSchema& f = m.data.schema[af];

  std::vector<const Case*> same, differ;
  for (const auto& cand : m.data.cases) {
    if (!cand.values[af].has_value()) continue;
    (action_matches(f, *cand.values[af], suggested) ? same : differ).push_back(&cand);
  }
  if (same.empty() || differ.empty())
    throw infeasible_error("archetype requires both same- and differing-action cases");

  std::int64_t best_id = same.front()->id;
  double best_sep = -1;
  for (const Case* s : same) {
    double nearest = std::numeric_limits<double>::infinity();
    for (const Case* d : differ)
      nearest = std::min(nearest, total_distance(m, s->values, *d));
    if (nearest > best_sep || (nearest == best_sep && s->id < best_id)) {
      best_sep = nearest;
      best_id = s->id;
    }
  }
  (void)context;
  return {best_id, best_sep};
}

double action_probability(const Model& m, const Neighborhood& hood, int action_feature,
                          double suggested, double tolerance) {
  auto af = static_cast<std::size_t>(action_feature);
  const FeatureSchema& f = m.data.schema[af];
  double mass = 0, hit = 0;
  for (const auto& nb : hood.neighbors) {
    const Case& cs = m.data.cases[nb.index];
    if (!cs.values[af].has_value()) continue;
    mass += nb.weight;
    bool within;
    if (f.kind == FeatureKind::Nominal || f.kind == FeatureKind::Ordinal)
      within = action_matches(f, *cs.values[af], suggested);
    else
      within = std::fabs(*cs.values[af] - suggested) <= tolerance;
    if (within) hit += nb.weight;
  }
  return mass > 0 ? hit / mass : 0.0;
}

double less_similar_distance(const Model& m, const std::vector<Value>& context,
                             LessSimilarExclusion exclusion) {
  auto hood = knn_query(m, context, static_cast<int>(m.size()));
  const auto& nbs = hood.neighbors;
  std::size_t skip = 0;
  switch (exclusion.kind) {
    case LessSimilarExclusion::Count:
      skip = static_cast<std::size_t>(exclusion.value);
      break;
    case LessSimilarExclusion::Radius:
      while (skip < nbs.size() && nbs[skip].distance <= exclusion.value) ++skip;
      break;
    case LessSimilarExclusion::DensityThreshold: {
      // Exclude neighbors whose inverse-distance weight exceeds the threshold.
      while (skip < nbs.size() && nbs[skip].weight > exclusion.value) ++skip;
      break;
    }
  }
  if (skip >= nbs.size())
    throw infeasible_error("less-similar exclusion exhausts the model");
  return nbs[skip].distance;
}

std::vector<ConvictionRatioEntry> conviction_ratios(Model& m,
                                                    const std::vector<std::size_t>& local,
                                                    double noise_low, double noise_high) {
  if (local.empty()) throw usage_error("conviction_ratios: empty local model");

  Model sub;
  sub.omega = m.omega;
  sub.omega.k = std::min<int>(m.omega.k, std::max<int>(1, static_cast<int>(local.size()) - 1));
  sub.deviations = m.deviations;
  sub.data.schema = m.data.schema;
  for (std::size_t idx : local) sub.data.cases.push_back(m.data.cases[idx]);

  double ei_local = expected_self_information(sub);
  double ei_global = expected_self_information(m);
  auto fam_local = familiarity_conviction_all(sub);
  auto fam_global = familiarity_conviction_all(m);

  std::vector<ConvictionRatioEntry> out;
  for (std::size_t li = 0; li < local.size(); ++li) {
    std::size_t gi = local[li];
    double il = sub.case_self_info[li];
    double ig = m.case_self_info[gi];
    double pl = il == 0 ? std::numeric_limits<double>::infinity() : ei_local / il;
    double pg = ig == 0 ? std::numeric_limits<double>::infinity() : ei_global / ig;
    ConvictionRatioEntry e;
    e.id = m.data.cases[gi].id;
    e.local_pred = pl;
    e.global_pred = pg;
    e.pred_ratio = pg > 0 ? pl / pg : std::numeric_limits<double>::infinity();
    e.local_fam = fam_local[li];
    e.global_fam = fam_global[gi];
    e.fam_ratio = fam_global[gi] > 0 ? fam_local[li] / fam_global[gi]
                                     : std::numeric_limits<double>::infinity();
    e.noise_flag = pl < noise_low && pg > noise_high;
    out.push_back(e);
  }
  return out;
}

std::vector<double> regional_residuals(const Model& m, const std::vector<Value>& context,
                                       std::size_t n_nearest) {
  if (n_nearest < 2) throw usage_error("regional residuals need N >= 2");
  if (n_nearest > m.size()) throw usage_error("regional residuals: N exceeds model size");
  auto local = local_model(m, context, {LocalSize::Count, static_cast<double>(n_nearest)});

  Model sub;
  sub.omega = m.omega;
  sub.omega.k = std::min<int>(m.omega.k, std::max<int>(1, static_cast<int>(local.size()) - 1));
  sub.deviations = m.deviations;
  sub.data.schema = m.data.schema;
  for (std::size_t idx : local) sub.data.cases.push_back(m.data.cases[idx]);

  ResidualOptions opts;
  opts.keep_per_case = false;
  return holdout_residuals(sub, opts).global;
}

ExplanationBundle explain_react(Model& m, const std::vector<Value>& context,
                                std::span<const int> action_features, int k,
                                const ExplainOptions& options) {
  ExplanationBundle b;
  b.query = context;
  b.action_features.assign(action_features.begin(), action_features.end());

  auto pred = react(m, context, action_features, k);
  b.decision = pred.values;
  b.neighborhood = pred.neighborhood;

  int local_count = options.local_count > 0 ? options.local_count : 2 * k;
  local_count = std::min<int>(local_count, static_cast<int>(m.size()));
  auto local = local_model(m, context, {LocalSize::Count, static_cast<double>(local_count)});

  // Outside-range flags: context value strictly outside the local model's
  // observed [min,max] for that feature.
  for (int fi : known_features(context)) {
    auto i = static_cast<std::size_t>(fi);
    if (m.data.schema[i].kind == FeatureKind::Nominal) continue;
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    bool any = false;
    for (std::size_t idx : local) {
      const auto& v = m.data.cases[idx].values[i];
      if (!v.has_value()) continue;
      lo = std::min(lo, *v);
      hi = std::max(hi, *v);
      any = true;
    }
    if (any && (*context[i] < lo || *context[i] > hi))
      b.outside_range_features.push_back(fi);
  }

  if (!action_features.empty()) {
    int af = action_features[0];
    double suggested = pred.values[0];
    try {
      b.counterfactuals = counterfactuals(m, context, af, suggested,
                                          options.counterfactual_count,
                                          options.plain_counterfactual_rank);
    } catch (const Error&) {
      // homogeneous action: no counterfactual section
    }
    try {
      auto [id, sep] = archetype(m, context, af, suggested);
      b.archetype_id = id;
      b.archetype_separation = sep;
    } catch (const Error&) {
    }
    double tol = options.action_tolerance;
    if (tol <= 0 && !m.deviations.empty())
      tol = m.deviations.r[static_cast<std::size_t>(af)];
    b.action_probability = action_probability(m, pred.neighborhood, af, suggested, tol);
  }

  if (local.size() >= 2) {
    try {
      b.regional_residuals = regional_residuals(m, context, local.size());
    } catch (const Error&) {
    }
  }

  int exclude = options.less_similar_exclude > 0 ? options.less_similar_exclude : k;
  try {
    b.less_similar = less_similar_distance(
        m, context, {LessSimilarExclusion::Count, static_cast<double>(exclude)});
  } catch (const Error&) {
  }

  b.conviction_ratios = conviction_ratios(m, local);
  if (m.feature_count() >= 2) b.feature_contribution = feature_prediction_contribution_all(m);
  return b;
}

namespace {
void put(std::ostream& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out << buf;
}
}  // namespace

void write_bundle(std::ostream& out, const Dataset& ds, const ExplanationBundle& b) {
  out << "[query]\n";
  for (std::size_t i = 0; i < b.query.size(); ++i)
    if (b.query[i].has_value())
      out << ds.schema[i].name << " = " << format_value(ds.schema[i], b.query[i]) << '\n';

  out << "[decision]\n";
  for (std::size_t i = 0; i < b.action_features.size(); ++i) {
    const auto& f = ds.schema[static_cast<std::size_t>(b.action_features[i])];
    out << f.name << " = " << format_value(f, b.decision[i]) << '\n';
  }

  out << "[neighbors]\n";
  for (const auto& nb : b.neighborhood.neighbors) {
    out << nb.id << " distance=";
    put(out, nb.distance);
    out << " weight=";
    put(out, nb.weight);
    out << '\n';
  }

  out << "[counterfactuals]\n";
  for (const auto& cf : b.counterfactuals) {
    out << cf.id << " action_difference=";
    put(out, cf.action_difference);
    out << " distance=";
    put(out, cf.distance);
    out << " ratio=";
    put(out, cf.ratio);
    out << '\n';
  }

  out << "[archetype]\n";
  if (b.archetype_id) {
    out << *b.archetype_id << " separation=";
    put(out, b.archetype_separation);
    out << '\n';
  }

  out << "[outside_range]\n";
  for (int fi : b.outside_range_features)
    out << ds.schema[static_cast<std::size_t>(fi)].name << '\n';

  out << "[regional_residuals]\n";
  for (std::size_t i = 0; i < b.regional_residuals.size(); ++i) {
    out << ds.schema[i].name << " = ";
    put(out, b.regional_residuals[i]);
    out << '\n';
  }

  out << "[action_probability]\n";
  put(out, b.action_probability);
  out << '\n';

  out << "[less_similar_distance]\n";
  put(out, b.less_similar);
  out << '\n';

  out << "[conviction_ratios]\n";
  for (const auto& e : b.conviction_ratios) {
    out << e.id << " pred_local=";
    put(out, e.local_pred);
    out << " pred_global=";
    put(out, e.global_pred);
    out << " pred_ratio=";
    put(out, e.pred_ratio);
    out << " fam_local=";
    put(out, e.local_fam);
    out << " fam_global=";
    put(out, e.global_fam);
    out << " fam_ratio=";
    put(out, e.fam_ratio);
    out << " noise=" << (e.noise_flag ? 1 : 0) << '\n';
  }

  out << "[feature_contribution]\n";
  for (std::size_t i = 0; i < b.feature_contribution.size(); ++i) {
    out << ds.schema[i].name << " = ";
    put(out, b.feature_contribution[i]);
    out << '\n';
  }
}

}  // namespace sknn
