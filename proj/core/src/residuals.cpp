#include "sknn/residuals.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "sknn/error.hpp"
#include "sknn/parallel.hpp"
#include "sknn/random.hpp"

namespace sknn {

namespace {
constexpr double kNominalFloor = 1e-6;

double wrap_difference(const FeatureSchema& f, double a, double b) {
  switch (f.kind) {
    case FeatureKind::Cyclic: {
      double delta = std::fmod(std::fabs(a - b), f.period);
      return std::min(delta, f.period - delta);
    }
    case FeatureKind::Nominal:
      return static_cast<int>(a) == static_cast<int>(b) ? 0.0 : 1.0;
    default:
      return std::fabs(a - b);
  }
}
}  // namespace

DeviationVector bootstrap_deviations(const Dataset& ds, std::vector<bool>* flagged) {
  const std::size_t xi = ds.feature_count();
  DeviationVector dev;
  dev.r.assign(xi, 0.0);
  dev.confusion.assign(xi, Confusion{});
  if (flagged) flagged->assign(xi, false);

  for (std::size_t j = 0; j < xi; ++j) {
    const FeatureSchema& f = ds.schema[j];
    if (f.kind == FeatureKind::Nominal) {
      // Max-entropy starting guess for mis-observation; the confusion
      // matrix carries the per-symbol structure once residuals run.
      int n_sym = std::max<int>(1, static_cast<int>(f.symbols.size()));
      dev.confusion[j] = Confusion::smoothed_identity(n_sym);
      dev.r[j] = 0.5;
      continue;
    }
    std::vector<double> vals;
    for (const auto& cs : ds.cases)
      if (cs.values[j].has_value()) vals.push_back(*cs.values[j]);
    std::sort(vals.begin(), vals.end());
    double min_gap = 0;
    for (std::size_t i = 1; i < vals.size(); ++i) {
      double gap = wrap_difference(f, vals[i], vals[i - 1]);
      if (gap > 0 && (min_gap == 0 || gap < min_gap)) min_gap = gap;
    }
    if (min_gap > 0) {
      dev.r[j] = min_gap;
    } else {
      // All observed values identical (or none).
      double mag = vals.empty() ? 0.0 : std::fabs(vals.front());
      dev.r[j] = mag > 0 ? 1e-6 * mag : 1e-6;
      if (flagged) (*flagged)[j] = true;
    }
  }
  return dev;
}

ResidualReport holdout_residuals(const Model& m, const ResidualOptions& opts) {
  const std::size_t n = m.data.size();
  const std::size_t xi = m.feature_count();
  if (n < static_cast<std::size_t>(m.default_k()) + 1)
    throw infeasible_error("holdout_residuals needs at least k+1 cases");

  ResidualReport rep;
  rep.global.assign(xi, 0.0);
  rep.confusion.assign(xi, Confusion{});
  rep.degenerate.assign(xi, false);
  if (opts.keep_per_case) rep.per_case.assign(n, std::vector<double>(xi, -1.0));

  std::vector<std::size_t> sample(n);
  for (std::size_t i = 0; i < n; ++i) sample[i] = i;
  if (n > opts.subsample_cap) {
    Rng rng(opts.subsample_seed);
    for (std::size_t i = 0; i < opts.subsample_cap; ++i) {
      std::size_t j = i + static_cast<std::size_t>(rng.integer(n - i));
      std::swap(sample[i], sample[j]);
    }
    sample.resize(opts.subsample_cap);
    std::sort(sample.begin(), sample.end());
  }

  std::vector<double> err_sum(xi, 0.0);
  std::vector<std::size_t> err_count(xi, 0);
  std::vector<std::vector<double>> conf_counts(xi);
  for (std::size_t j = 0; j < xi; ++j)
    if (m.data.schema[j].kind == FeatureKind::Nominal) {
      auto s = m.data.schema[j].symbols.size();
      conf_counts[j].assign(s * s, 0.0);
    }

  const int k = m.default_k();
  // Hold-one-out predictions are independent per case; errors land in
  // index-addressed storage and are reduced serially afterwards.
  std::vector<std::vector<double>> predictions(sample.size(),
                                               std::vector<double>(xi, -1.0));
  std::vector<std::vector<bool>> predicted_ok(sample.size(), std::vector<bool>(xi, false));
  parallel_for(sample.size(), [&](std::size_t si) {
    std::size_t ci = sample[si];
    const Case& cs = m.data.cases[ci];
    std::unordered_set<std::int64_t> self{cs.id};
    for (std::size_t j = 0; j < xi; ++j) {
      if (!cs.values[j].has_value()) continue;
      // Targetless hold-one-out: feature j from all of the case's other
      // known features.
      std::vector<Value> context = cs.values;
      context[j] = std::nullopt;
      bool any = false;
      for (const auto& v : context)
        if (v.has_value()) any = true;
      if (!any) continue;

      std::vector<int> action{static_cast<int>(j)};
      try {
        predictions[si][j] = react(m, context, action, k, self).values[0];
        predicted_ok[si][j] = true;
      } catch (const Error&) {
        // feature not predictable for this case
      }
    }
  });

  for (std::size_t si = 0; si < sample.size(); ++si) {
    std::size_t ci = sample[si];
    const Case& cs = m.data.cases[ci];
    for (std::size_t j = 0; j < xi; ++j) {
      if (!predicted_ok[si][j]) continue;
      double actual = *cs.values[j];
      double predicted = predictions[si][j];
      double err;
      if (m.data.schema[j].kind == FeatureKind::Nominal) {
        int a = static_cast<int>(actual), p = static_cast<int>(predicted);
        err = a == p ? 0.0 : 1.0;
        auto s = m.data.schema[j].symbols.size();
        conf_counts[j][static_cast<std::size_t>(a) * s + static_cast<std::size_t>(p)] += 1.0;
      } else {
        err = wrap_difference(m.data.schema[j], actual, predicted);
      }
      err_sum[j] += err;
      ++err_count[j];
      if (opts.keep_per_case) rep.per_case[ci][j] = err;
    }
  }

  DeviationVector floor = bootstrap_deviations(m.data, &rep.degenerate);
  for (std::size_t j = 0; j < xi; ++j) {
    const FeatureSchema& f = m.data.schema[j];
    if (err_count[j] == 0) {
      if (f.kind == FeatureKind::Nominal) {
        rep.global[j] = floor.r[j];
        rep.confusion[j] = floor.confusion[j];
      } else {
        rep.global[j] = floor.r[j];
        rep.degenerate[j] = true;
      }
      continue;
    }
    double mae = err_sum[j] / static_cast<double>(err_count[j]);
    if (f.kind == FeatureKind::Nominal) {
      rep.global[j] = std::max(mae, kNominalFloor);
      auto s = f.symbols.size();
      Confusion c;
      c.size = static_cast<int>(s);
      c.p = conf_counts[j];
      c.normalize_rows();
      rep.confusion[j] = c;
    } else {
      rep.global[j] = std::max(mae, floor.r[j]);
    }
  }
  return rep;
}

DeviationVector iterate_residuals(Model& m, int max_iters, double tol,
                                  ResidualReport* report, const ResidualOptions& opts) {
  if (max_iters < 1) throw usage_error("max_iters must be >= 1");
  if (m.deviations.empty()) m.deviations = bootstrap_deviations(m.data);

  ResidualReport last;
  std::vector<double> trace;
  for (int it = 0; it < max_iters; ++it) {
    last = holdout_residuals(m, opts);
    double max_change = 0;
    for (std::size_t j = 0; j < last.global.size(); ++j) {
      double prev = m.deviations.r[j];
      if (prev > 0)
        max_change = std::max(max_change, std::fabs(last.global[j] - prev) / prev);
    }
    trace.push_back(max_change);

    m.deviations.r = last.global;
    m.deviations.confusion = last.confusion;
    m.invalidate_cache();
    if (max_change < tol) break;
  }
  last.trace = trace;
  if (report) *report = last;
  return m.deviations;
}

void write_residual_report(std::ostream& out, const Dataset& ds, const ResidualReport& r,
                           char delim) {
  out << "feature" << delim << "residual" << delim << "degenerate\n";
  for (std::size_t j = 0; j < r.global.size(); ++j) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", r.global[j]);
    out << ds.schema[j].name << delim << buf << delim
        << (j < r.degenerate.size() && r.degenerate[j] ? 1 : 0) << '\n';
  }
  if (!r.trace.empty()) {
    out << "# iteration trace (max relative change):";
    for (double t : r.trace) out << ' ' << t;
    out << '\n';
  }
}

}  // namespace sknn
