#include "sknn/reduction.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "sknn/error.hpp"

namespace sknn {

std::vector<std::int64_t> detect_anomalies(Model& m, double threshold,
                                           bool require_unfamiliar) {
  if (!(threshold > 0.0 && threshold <= 1.0))
    throw usage_error("anomaly threshold must lie in (0,1]");
  double ei = expected_self_information(m);

  std::vector<double> fam;
  double fam_median = 0;
  if (require_unfamiliar) {
    fam = familiarity_conviction_all(m);
    auto sorted = fam;
    std::sort(sorted.begin(), sorted.end());
    fam_median = sorted[sorted.size() / 2];
  }

  std::vector<std::pair<double, std::int64_t>> flagged;
  for (std::size_t i = 0; i < m.size(); ++i) {
    double info = m.case_self_info[i];
    double conv = info == 0.0 ? std::numeric_limits<double>::infinity() : ei / info;
    if (conv >= threshold) continue;
    if (require_unfamiliar && fam[i] >= fam_median) continue;
    flagged.emplace_back(conv, m.data.cases[i].id);
  }
  std::sort(flagged.begin(), flagged.end());
  std::vector<std::int64_t> out;
  for (const auto& [conv, id] : flagged) out.push_back(id);
  return out;
}

Model prune_cases(const Model& m, CasePrunePolicy policy, std::vector<RemovalRecord>& log,
                  double batch_fraction) {
  log.clear();
  Model cur = m;
  const int k = m.omega.k;

  auto removals_needed = [&](Model& model) -> std::size_t {
    auto n = model.size();
    switch (policy.kind) {
      case CasePrunePolicy::Cap: {
        auto cap = static_cast<std::size_t>(policy.value);
        return n > cap ? n - cap : 0;
      }
      case CasePrunePolicy::RemoveCount: {
        auto q = static_cast<std::size_t>(policy.value);
        return q > log.size() ? q - log.size() : 0;
      }
      case CasePrunePolicy::SurprisalFloor: {
        expected_self_information(model);
        std::size_t below = 0;
        for (double info : model.case_self_info)
          if (info < policy.value) ++below;
        return below;
      }
    }
    return 0;
  };

  std::size_t initial = removals_needed(cur);
  if (cur.size() < initial + static_cast<std::size_t>(k) + 1)
    throw infeasible_error("prune policy would leave fewer than k+1 cases");
  if (initial == 0) return cur;
  std::size_t batch =
      std::max<std::size_t>(1, static_cast<std::size_t>(
                                   std::ceil(batch_fraction * static_cast<double>(initial))));

  while (true) {
    std::size_t need = removals_needed(cur);
    if (need == 0) break;
    if (cur.size() <= static_cast<std::size_t>(k) + 1)
      throw infeasible_error("prune policy would leave fewer than k+1 cases");
    need = std::min(need, cur.size() - static_cast<std::size_t>(k) - 1);
    if (need == 0) break;

    double ei = expected_self_information(cur);
    auto fam = familiarity_conviction_all(cur);
    std::vector<std::pair<double, std::size_t>> ranked;  // (I, index)
    for (std::size_t i = 0; i < cur.size(); ++i)
      ranked.emplace_back(cur.case_self_info[i], i);
    std::sort(ranked.begin(), ranked.end(),
              [&](const auto& a, const auto& b) {
                return a.first != b.first
                           ? a.first < b.first
                           : cur.data.cases[a.second].id < cur.data.cases[b.second].id;
              });

    std::size_t take = std::min(batch, need);
    std::vector<std::size_t> to_remove;
    for (std::size_t i = 0; i < take; ++i) {
      auto [info, idx] = ranked[i];
      double conv = info == 0.0 ? std::numeric_limits<double>::infinity() : ei / info;
      log.push_back({cur.data.cases[idx].id, info, conv, fam[idx]});
      to_remove.push_back(idx);
    }
    std::sort(to_remove.rbegin(), to_remove.rend());
    for (std::size_t idx : to_remove)
      cur.data.cases.erase(cur.data.cases.begin() + static_cast<std::ptrdiff_t>(idx));
    cur.invalidate_cache();
  }
  return cur;
}

Model prune_features(const Model& m, FeaturePrunePolicy policy,
                     std::vector<std::string>& dropped) {
  dropped.clear();
  if (m.feature_count() < 2)
    throw usage_error("prune_features requires at least 2 features");

  Model cur = m;
  auto drop_feature = [&](std::size_t j) {
    dropped.push_back(cur.data.schema[j].name);
    cur.data.schema.erase(cur.data.schema.begin() + static_cast<std::ptrdiff_t>(j));
    for (auto& cs : cur.data.cases)
      cs.values.erase(cs.values.begin() + static_cast<std::ptrdiff_t>(j));
    if (!cur.deviations.empty()) {
      cur.deviations.r.erase(cur.deviations.r.begin() + static_cast<std::ptrdiff_t>(j));
      cur.deviations.confusion.erase(cur.deviations.confusion.begin() +
                                     static_cast<std::ptrdiff_t>(j));
    }
    cur.data.normalize_weights();
    cur.invalidate_cache();
  };

  while (cur.feature_count() > 1) {
    std::vector<double> score = policy.use_contribution
                                    ? feature_prediction_contribution_all(cur)
                                    : feature_prediction_conviction_all(cur);
    std::size_t lowest = 0;
    for (std::size_t j = 1; j < score.size(); ++j)
      if (score[j] < score[lowest]) lowest = j;

    bool done = false;
    switch (policy.kind) {
      case FeaturePrunePolicy::KeepTop:
        done = cur.feature_count() <= static_cast<std::size_t>(policy.value);
        break;
      case FeaturePrunePolicy::ConvictionFloor:
        done = score[lowest] >= policy.value;
        break;
    }
    if (done) break;
    drop_feature(lowest);
  }
  if (policy.kind == FeaturePrunePolicy::KeepTop &&
      cur.feature_count() > static_cast<std::size_t>(policy.value))
    throw infeasible_error("feature prune policy infeasible");
  return cur;
}

void write_removal_log(std::ostream& out, const std::vector<RemovalRecord>& log,
                       char delim) {
  out << "id" << delim << "self_information" << delim << "prediction_conviction" << delim
      << "familiarity_conviction\n";
  char buf[40];
  for (const auto& r : log) {
    out << r.id << delim;
    std::snprintf(buf, sizeof buf, "%.17g", r.self_info);
    out << buf << delim;
    std::snprintf(buf, sizeof buf, "%.17g", r.pred_conviction);
    out << buf << delim;
    std::snprintf(buf, sizeof buf, "%.17g", r.fam_conviction);
    out << buf << '\n';
  }
}

}  // namespace sknn
