#include "sknn/imputation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "sknn/conviction.hpp"
#include "sknn/error.hpp"
#include "sknn/synthesis.hpp"

namespace sknn {

namespace {

struct Ranked {
  std::size_t index;
  std::size_t nulls;
  double self_info;
};

// Candidates sorted by (fewest nulls, then least surprisal conditioned on
// the known features, then id).
std::vector<Ranked> rank_incomplete(const Model& m) {
  std::vector<int> all;
  for (std::size_t i = 0; i < m.feature_count(); ++i) all.push_back(static_cast<int>(i));

  std::vector<Ranked> out;
  for (std::size_t i = 0; i < m.size(); ++i) {
    const Case& cs = m.data.cases[i];
    std::size_t nulls = cs.missing_count();
    if (nulls == 0 || nulls == m.feature_count()) continue;
    double info;
    try {
      info = self_information(m, cs.values, cs.id, all);
    } catch (const Error&) {
      info = std::numeric_limits<double>::infinity();
    }
    out.push_back({i, nulls, info});
  }
  std::sort(out.begin(), out.end(), [&](const Ranked& a, const Ranked& b) {
    if (a.nulls != b.nulls) return a.nulls < b.nulls;
    if (a.self_info != b.self_info) return a.self_info < b.self_info;
    return m.data.cases[a.index].id < m.data.cases[b.index].id;
  });
  return out;
}

std::size_t total_missing(const Model& m) {
  std::size_t n = 0;
  for (const auto& cs : m.data.cases) n += cs.missing_count();
  return n;
}

}  // namespace

void impute(Model& m, const ImputeOptions& opts, std::vector<ImputeRecord>& log) {
  if (opts.batch < 1) throw usage_error("impute batch must be positive");
  log.clear();

  for (std::size_t j = 0; j < m.feature_count(); ++j) {
    bool any = false;
    for (const auto& cs : m.data.cases)
      if (cs.values[j].has_value()) any = true;
    if (!any)
      throw infeasible_error("feature " + m.data.schema[j].name +
                             " has no known values to impute from");
  }

  std::size_t skipped_all_missing = 0;
  for (const auto& cs : m.data.cases)
    if (cs.missing_count() == m.feature_count()) ++skipped_all_missing;

  const std::size_t imputable_total = total_missing(m);
  if (imputable_total == 0) return;

  Rng rng(opts.seed);
  std::vector<double> scales;
  if (opts.stochastic) scales = laplace_scales(m, opts.conviction);

  std::vector<std::size_t> feature_order;
  if (opts.feature_entropy_first && m.feature_count() >= 2) {
    // Fill low-conviction features first; exploratory path.
    auto conviction = feature_prediction_conviction_all(m);
    for (std::size_t i = 0; i < m.feature_count(); ++i) feature_order.push_back(i);
    std::stable_sort(feature_order.begin(), feature_order.end(),
                     [&](std::size_t a, std::size_t b) { return conviction[a] < conviction[b]; });
  }

  int iteration = 0;
  while (true) {
    ++iteration;
    auto ranked = rank_incomplete(m);
    if (ranked.empty()) break;

    if (opts.until == ImputeOptions::SurprisalCeiling &&
        ranked.front().self_info > opts.threshold)
      break;
    if (opts.until == ImputeOptions::SparsityTarget) {
      double sparsity = static_cast<double>(total_missing(m)) /
                        (static_cast<double>(m.size()) * static_cast<double>(m.feature_count()));
      if (sparsity <= opts.threshold) break;
    }

    std::size_t take = std::min<std::size_t>(static_cast<std::size_t>(opts.batch), ranked.size());
    struct Pending {
      std::size_t index;
      std::size_t feature;
      double value;
      double self_info;
    };
    std::vector<Pending> pending;
    for (std::size_t b = 0; b < take; ++b) {
      const Case& cs = m.data.cases[ranked[b].index];
      std::unordered_set<std::int64_t> self{cs.id};
      for (std::size_t j = 0; j < m.feature_count(); ++j) {
        if (cs.values[j].has_value()) continue;
        std::vector<int> action{static_cast<int>(j)};
        double value;
        try {
          double center = react(m, cs.values, action, m.default_k(), self).values[0];
          if (opts.stochastic) {
            const FeatureSchema& f = m.data.schema[j];
            if (f.kind == FeatureKind::Nominal)
              value = resample_nominal(static_cast<int>(center), m.deviations.confusion[j], rng);
            else
              value = snap_prediction(
                  f, resample_continuous(center, scales[j], rng,
                                         f.kind == FeatureKind::Continuous ? &f : nullptr));
          } else {
            value = snap_prediction(m.data.schema[j], center);
          }
        } catch (const Error&) {
          continue;  // feature not predictable for this case right now
        }
        pending.push_back({ranked[b].index, j, value, ranked[b].self_info});
      }
    }
    if (pending.empty()) break;

    for (const auto& p : pending) {
      Case& cs = m.data.cases[p.index];
      cs.values[p.feature] = p.value;
      cs.origin = cs.origin == Origin::Observed ? Origin::Imputed : cs.origin;
      log.push_back({cs.id, static_cast<int>(p.feature), p.value, p.self_info, iteration});
    }
    m.invalidate_cache();
  }
  (void)skipped_all_missing;
}

void replay_imputation(Model& m, const std::vector<ImputeRecord>& log) {
  for (const auto& rec : log) {
    int idx = m.index_of(rec.case_id);
    if (idx < 0) throw data_error("imputation log references unknown case id");
    Case& cs = m.data.cases[static_cast<std::size_t>(idx)];
    cs.values[static_cast<std::size_t>(rec.feature)] = rec.value;
    cs.origin = cs.origin == Origin::Observed ? Origin::Imputed : cs.origin;
  }
  m.invalidate_cache();
}

void write_imputation_log(std::ostream& out, const Dataset& ds,
                          const std::vector<ImputeRecord>& log, char delim) {
  out << "case" << delim << "feature" << delim << "value" << delim << "self_information"
      << delim << "iteration\n";
  char buf[40];
  for (const auto& r : log) {
    out << r.case_id << delim << ds.schema[static_cast<std::size_t>(r.feature)].name << delim;
    std::snprintf(buf, sizeof buf, "%.17g", r.value);
    out << buf << delim;
    std::snprintf(buf, sizeof buf, "%.17g", r.self_info);
    out << buf << delim << r.iteration << '\n';
  }
}

}  // namespace sknn
