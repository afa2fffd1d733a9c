#include "sknn/conviction.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include "sknn/error.hpp"
#include "sknn/parallel.hpp"

namespace sknn {

namespace {

std::vector<int> full_subset(std::size_t xi) {
  std::vector<int> s(xi);
  for (std::size_t i = 0; i < xi; ++i) s[i] = static_cast<int>(i);
  return s;
}

std::vector<int> known_subset(const std::vector<Value>& values, std::span<const int> within) {
  std::vector<int> s;
  for (int fi : within)
    if (values[static_cast<std::size_t>(fi)].has_value()) s.push_back(fi);
  return s;
}

// Residual norm ||r||_p over the subset with renormalized weights.
double residual_norm(const Model& m, std::span<const int> subset) {
  if (m.deviations.empty())
    throw infeasible_error("model has no deviations; run residuals first");
  double wtot = 0;
  for (int fi : subset) wtot += m.data.schema[static_cast<std::size_t>(fi)].weight;
  std::vector<double> rs, ws;
  for (int fi : subset) {
    auto i = static_cast<std::size_t>(fi);
    rs.push_back(m.deviations.r[i]);
    ws.push_back(m.data.schema[i].weight / wtot);
  }
  return generalized_mean(rs, ws, m.omega.metric.p);
}

double holdout_self_information(const Model& m, std::size_t case_index,
                                std::span<const int> subset) {
  const Case& cs = m.data.cases[case_index];
  auto sub = known_subset(cs.values, subset);
  if (sub.empty()) return 0.0;
  double phi = distance_contribution(m, cs.values, cs.id, sub, m.default_k(),
                                     m.omega.alpha);
  double norm = residual_norm(m, sub);
  if (norm <= 0) throw infeasible_error("residual norm is zero");
  return phi / norm;
}

std::vector<double> holdout_phi_all(const Model& m) {
  auto subset = full_subset(m.feature_count());
  std::vector<double> phi(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) {
    const Case& cs = m.data.cases[i];
    auto sub = known_subset(cs.values, subset);
    phi[i] = sub.empty() ? 0.0
                         : distance_contribution(m, cs.values, cs.id, sub,
                                                 m.default_k(), m.omega.alpha);
  }
  return phi;
}

}  // namespace

double distance_contribution(const Model& m, const std::vector<Value>& values,
                             std::optional<std::int64_t> self,
                             std::span<const int> subset, int k, double alpha) {
  if (m.size() < 2) throw infeasible_error("distance_contribution needs >= 2 cases");
  auto sub = known_subset(values, subset);
  if (sub.empty()) throw infeasible_error("no known features in subset");

  std::vector<std::pair<double, std::int64_t>> dists;
  dists.reserve(m.size());
  for (const auto& cand : m.data.cases) {
    if (self && cand.id == *self) continue;
    std::vector<int> both;
    for (int fi : sub)
      if (cand.values[static_cast<std::size_t>(fi)].has_value()) both.push_back(fi);
    if (both.empty()) continue;
    double d = case_distance(m.data.schema, values, cand.values, m.omega.metric,
                             m.deviations, both);
    dists.emplace_back(d, cand.id);
  }
  if (dists.empty()) throw infeasible_error("no comparable cases");
  std::sort(dists.begin(), dists.end());

  if (dists.front().first == 0.0) {
    // Duplicate rule: identical points split one contribution computed
    // against the nearest distinct neighbor.
    std::size_t dup = 0;
    while (dup < dists.size() && dists[dup].first == 0.0) ++dup;
    if (dup == dists.size()) return 0.0;  // everything identical
    double d_star = dists[dup].first;
    return std::pow(d_star, alpha) / static_cast<double>(dup + 1);
  }

  std::size_t use = std::min<std::size_t>(static_cast<std::size_t>(k), dists.size());
  double recip = 0;
  for (std::size_t i = 0; i < use; ++i) recip += 1.0 / std::pow(dists[i].first, alpha);
  return static_cast<double>(use) / recip;
}

double self_information(const Model& m, const std::vector<Value>& values,
                        std::optional<std::int64_t> self, std::span<const int> subset) {
  auto sub = known_subset(values, subset);
  if (sub.empty()) throw infeasible_error("no known features in subset");
  double phi = distance_contribution(m, values, self, sub, m.default_k(), m.omega.alpha);
  double norm = residual_norm(m, sub);
  if (norm <= 0) throw infeasible_error("residual norm is zero");
  return phi / norm;
}

double expected_self_information(Model& m) {
  if (m.stats_valid) return m.expected_self_info;
  auto subset = full_subset(m.feature_count());
  m.case_self_info.resize(m.size());
  parallel_for(m.size(), [&](std::size_t i) {
    m.case_self_info[i] = holdout_self_information(m, i, subset);
  });
  double total = 0;
  for (std::size_t i = 0; i < m.size(); ++i) total += m.case_self_info[i];
  m.expected_self_info = m.size() ? total / static_cast<double>(m.size()) : 0.0;
  m.stats_valid = true;
  return m.expected_self_info;
}

double prediction_conviction(Model& m, const std::vector<Value>& values,
                             std::optional<std::int64_t> self) {
  double ei = expected_self_information(m);
  double info;
  if (self) {
    int idx = m.index_of(*self);
    if (idx < 0) throw usage_error("unknown case id");
    info = m.case_self_info[static_cast<std::size_t>(idx)];
  } else {
    info = self_information(m, values, std::nullopt, full_subset(m.feature_count()));
  }
  if (info == 0.0) return std::numeric_limits<double>::infinity();
  return ei / info;
}

std::vector<double> point_probabilities(const Model& m) {
  if (m.size() < 2) throw infeasible_error("point_probabilities needs >= 2 cases");
  auto phi = holdout_phi_all(m);
  double total = 0;
  for (double p : phi) total += p;
  if (total <= 0) {
    // Fully degenerate model: every point identical. Uniform by symmetry.
    std::vector<double> l(m.size(), 1.0 / static_cast<double>(m.size()));
    return l;
  }
  for (auto& p : phi) p /= total;
  // Keep strict positivity for KL.
  double floor = 1e-300;
  for (auto& p : phi) p = std::max(p, floor);
  return phi;
}

namespace {
// KL(L || L') where L' replaces l_i with u = 1/n and renormalizes:
// KL_i = ln S + l_i ln(l_i / u), with S = 1 - l_i + u.
double kl_replace(const std::vector<double>& l, std::size_t i, double u) {
  double s = 1.0 - l[i] + u;
  return std::log(s) + l[i] * std::log(l[i] / u);
}
}  // namespace

std::vector<double> familiarity_conviction_all(const Model& m) {
  auto l = point_probabilities(m);
  const std::size_t n = l.size();
  const double u = 1.0 / static_cast<double>(n);

  std::vector<double> kl(n);
  double mean_kl = 0;
  for (std::size_t i = 0; i < n; ++i) {
    kl[i] = std::max(0.0, kl_replace(l, i, u));
    mean_kl += kl[i];
  }
  mean_kl /= static_cast<double>(n);

  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (kl[i] == 0.0)
      out[i] = mean_kl == 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
    else
      out[i] = mean_kl / kl[i];
  }
  return out;
}

double familiarity_conviction(const Model& m, std::size_t case_index) {
  return familiarity_conviction_all(m).at(case_index);
}

double mean_self_information_without(const Model& m, int feature) {
  if (m.feature_count() < 2)
    throw usage_error("feature removal requires at least 2 features");
  std::vector<int> subset;
  for (std::size_t i = 0; i < m.feature_count(); ++i)
    if (static_cast<int>(i) != feature) subset.push_back(static_cast<int>(i));
  std::vector<double> info(m.size());
  parallel_for(m.size(), [&](std::size_t i) {
    info[i] = holdout_self_information(m, i, subset);
  });
  double total = 0;
  for (double v : info) total += v;
  return m.size() ? total / static_cast<double>(m.size()) : 0.0;
}

double feature_prediction_contribution(Model& m, int feature) {
  double ei = expected_self_information(m);
  if (ei == 0.0) return 0.0;
  return (ei - mean_self_information_without(m, feature)) / ei;
}

std::vector<double> feature_prediction_contribution_all(Model& m) {
  std::vector<double> out;
  for (std::size_t i = 0; i < m.feature_count(); ++i)
    out.push_back(feature_prediction_contribution(m, static_cast<int>(i)));
  return out;
}

std::vector<double> feature_prediction_conviction_all(Model& m) {
  const std::size_t xi = m.feature_count();
  std::vector<double> without(xi);
  double mean = 0;
  for (std::size_t i = 0; i < xi; ++i) {
    without[i] = mean_self_information_without(m, static_cast<int>(i));
    mean += without[i];
  }
  mean /= static_cast<double>(xi);
  std::vector<double> out(xi);
  for (std::size_t i = 0; i < xi; ++i)
    out[i] = without[i] == 0.0 ? std::numeric_limits<double>::infinity()
                               : mean / without[i];
  return out;
}

double model_surprisal(const Model& reference, const Dataset& other) {
  if (reference.feature_count() != other.feature_count())
    throw data_error("model_surprisal: schema size mismatch");
  for (std::size_t i = 0; i < other.feature_count(); ++i)
    if (reference.data.schema[i].kind != other.schema[i].kind)
      throw data_error("model_surprisal: feature kind mismatch at " + other.schema[i].name);

  auto subset = full_subset(reference.feature_count());
  double total = 0;
  std::size_t counted = 0;
  for (const auto& cs : other.cases) {
    // Exclude one identical reference case if present so that comparing a
    // model to itself reports its own hold-one-out E[I].
    std::optional<std::int64_t> self;
    for (const auto& ref : reference.data.cases) {
      if (ref.values == cs.values) {
        self = ref.id;
        break;
      }
    }
    try {
      total += self_information(reference, cs.values, self, subset);
      ++counted;
    } catch (const Error&) {
      // skip incomparable cases
    }
  }
  if (counted == 0) throw infeasible_error("no comparable cases between models");
  return total / static_cast<double>(counted);
}

ConvictionReport conviction_report_cases(Model& m) {
  ConvictionReport rep;
  rep.expected_info = expected_self_information(m);
  auto fam = familiarity_conviction_all(m);
  auto phi = holdout_phi_all(m);
  for (std::size_t i = 0; i < m.size(); ++i) {
    rep.ids.push_back(m.data.cases[i].id);
    rep.phi.push_back(phi[i]);
    double info = m.case_self_info[i];
    rep.self_info.push_back(info);
    rep.pred_conviction.push_back(info == 0.0 ? std::numeric_limits<double>::infinity()
                                              : rep.expected_info / info);
    rep.fam_conviction.push_back(fam[i]);
  }
  return rep;
}

ConvictionReport conviction_report_features(Model& m) {
  ConvictionReport rep;
  rep.expected_info = expected_self_information(m);
  rep.feature_contribution = feature_prediction_contribution_all(m);
  rep.feature_conviction = feature_prediction_conviction_all(m);
  for (const auto& f : m.data.schema) rep.feature_names.push_back(f.name);
  return rep;
}

namespace {
void put(std::ostream& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out << buf;
}
}  // namespace

void write_conviction_report(std::ostream& out, const ConvictionReport& r, char delim) {
  out << "# expected_self_information ";
  put(out, r.expected_info);
  out << '\n';
  if (!r.ids.empty()) {
    out << "id" << delim << "distance_contribution" << delim << "self_information"
        << delim << "prediction_conviction" << delim << "familiarity_conviction\n";
    for (std::size_t i = 0; i < r.ids.size(); ++i) {
      out << r.ids[i] << delim;
      put(out, r.phi[i]);
      out << delim;
      put(out, r.self_info[i]);
      out << delim;
      put(out, r.pred_conviction[i]);
      out << delim;
      put(out, r.fam_conviction[i]);
      out << '\n';
    }
  }
  if (!r.feature_names.empty()) {
    out << "feature" << delim << "prediction_contribution" << delim
        << "prediction_conviction\n";
    for (std::size_t i = 0; i < r.feature_names.size(); ++i) {
      out << r.feature_names[i] << delim;
      put(out, r.feature_contribution[i]);
      out << delim;
      put(out, r.feature_conviction[i]);
      out << '\n';
    }
  }
}

}  // namespace sknn
