#include "sknn/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>

#include "sknn/error.hpp"
#include "sknn/random.hpp"
#include "sknn/residuals.hpp"

namespace sknn {

std::vector<double> EvalResult::scores_for(const std::string& config) const {
  std::vector<double> out;
  for (const auto& cell : cells)
    if (cell.config == config) out.push_back(cell.score);
  return out;
}

double r_squared(std::span<const double> actual, std::span<const double> predicted) {
  double mean = 0;
  for (double a : actual) mean += a;
  mean /= static_cast<double>(actual.size());
  double sse = 0, sst = 0;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    sse += (actual[i] - predicted[i]) * (actual[i] - predicted[i]);
    sst += (actual[i] - mean) * (actual[i] - mean);
  }
  if (sst == 0) return 0.0;  // degenerate target: mean-predictor convention
  return 1.0 - sse / sst;
}

double accuracy(std::span<const double> actual, std::span<const double> predicted) {
  std::size_t hit = 0;
  for (std::size_t i = 0; i < actual.size(); ++i)
    if (static_cast<int>(actual[i]) == static_cast<int>(predicted[i])) ++hit;
  return static_cast<double>(hit) / static_cast<double>(actual.size());
}

namespace {

// z-scores continuous context features in place from train-split stats.
void standardize(Dataset& train, Dataset& test, int target) {
  for (std::size_t j = 0; j < train.feature_count(); ++j) {
    if (static_cast<int>(j) == target) continue;
    if (train.schema[j].kind != FeatureKind::Continuous) continue;
    double mean = 0, count = 0;
    for (const auto& cs : train.cases)
      if (cs.values[j].has_value()) {
        mean += *cs.values[j];
        ++count;
      }
    if (count < 2) continue;
    mean /= count;
    double var = 0;
    for (const auto& cs : train.cases)
      if (cs.values[j].has_value()) var += (*cs.values[j] - mean) * (*cs.values[j] - mean);
    double sd = std::sqrt(var / count);
    if (sd <= 0) continue;
    for (auto* ds : {&train, &test})
      for (auto& cs : ds->cases)
        if (cs.values[j].has_value()) cs.values[j] = (*cs.values[j] - mean) / sd;
  }
}

}  // namespace

EvalResult evaluate(const std::vector<EvalDataset>& datasets,
                    const std::vector<EvalConfig>& configs, const EvalOptions& opts) {
  EvalResult result;
  for (const auto& cfg : configs) result.configs.push_back(cfg.label);

  for (const auto& ed : datasets) {
    const std::size_t n = ed.data.size();
    if (n < static_cast<std::size_t>(opts.folds) * 2)
      throw infeasible_error("dataset " + ed.name + " too small for the split");

    // Seeded fold assignment, shared across configurations.
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    Rng rng(opts.seed ^ std::hash<std::string>{}(ed.name));
    for (std::size_t i = 0; i + 1 < n; ++i) {
      std::size_t j = i + static_cast<std::size_t>(rng.integer(n - i));
      std::swap(perm[i], perm[j]);
    }

    for (const auto& cfg : configs) {
      std::vector<double> actual, predicted;
      for (int fold = 0; fold < opts.folds; ++fold) {
        Dataset train, test;
        train.schema = ed.data.schema;
        test.schema = ed.data.schema;
        for (std::size_t i = 0; i < n; ++i) {
          auto& dst = (static_cast<int>(i % static_cast<std::size_t>(opts.folds)) == fold)
                          ? test
                          : train;
          dst.cases.push_back(ed.data.cases[perm[i]]);
        }
        if (cfg.standardize) standardize(train, test, ed.target);

        Hyperparams omega;
        omega.k = opts.k;
        omega.alpha = 1.0;
        omega.metric.p = cfg.p;
        omega.metric.mode = cfg.mode;
        Model m = make_model(std::move(train), omega);
        m.deviations = bootstrap_deviations(m.data);
        if (cfg.mode == DeviationMode::LkNormal && cfg.residual_iters > 0)
          iterate_residuals(m, cfg.residual_iters, 0.05);

        std::vector<int> action{ed.target};
        for (const auto& cs : test.cases) {
          if (!cs.values[static_cast<std::size_t>(ed.target)].has_value()) continue;
          std::vector<Value> context = cs.values;
          context[static_cast<std::size_t>(ed.target)] = std::nullopt;
          try {
            double p = react(m, context, action, m.default_k()).values[0];
            actual.push_back(*cs.values[static_cast<std::size_t>(ed.target)]);
            predicted.push_back(p);
          } catch (const Error&) {
          }
        }
      }
      double score = ed.classification ? accuracy(actual, predicted)
                                       : r_squared(actual, predicted);
      result.cells.push_back({ed.name, cfg.label, score});
    }
  }

  for (const auto& cfg : configs) {
    auto scores = result.scores_for(cfg.label);
    double mean = 0;
    for (double s : scores) mean += s;
    result.aggregate.push_back(scores.empty() ? 0.0 : mean / static_cast<double>(scores.size()));
  }
  return result;
}

namespace {

FeatureSchema continuous_feature(const std::string& name, double weight) {
  FeatureSchema f;
  f.name = name;
  f.kind = FeatureKind::Continuous;
  f.weight = weight;
  return f;
}

}  // namespace

std::vector<EvalDataset> synthetic_regression_suite(int count, std::uint64_t seed) {
  std::vector<EvalDataset> suite;
  for (int d = 0; d < count; ++d) {
    Rng rng(seed + static_cast<std::uint64_t>(d) * 1000003);
    // Two latent factors, each observed through a redundant pair of features
    // with occasional single-coordinate corruption (sensor glitches); the
    // redundancy lets robust metrics recover the neighborhood while squared
    // distances are thrown off by the corrupted coordinate.
    int informative = 4;
    int noise = 1 + d % 2;
    int xi = informative + noise + 1;  // + target
    int n = 120;

    Dataset ds;
    for (int j = 0; j < informative; ++j)
      ds.schema.push_back(continuous_feature("x" + std::to_string(j), 1.0));
    for (int j = 0; j < noise; ++j)
      ds.schema.push_back(continuous_feature("n" + std::to_string(j), 1.0));
    ds.schema.push_back(continuous_feature("y", 1.0));
    ds.normalize_weights();

    // Modest per-feature scale variation; noise features are irrelevant to
    // the target.
    std::vector<double> scale(static_cast<std::size_t>(xi - 1));
    for (auto& s : scale) s = std::pow(10.0, rng.uniform(-0.75, 0.75));
    double coef0 = rng.uniform(0.5, 2.0), coef1 = rng.uniform(0.5, 2.0);
    bool curved = d % 2 == 1;

    for (int i = 0; i < n; ++i) {
      Case cs;
      cs.id = i;
      cs.values.assign(static_cast<std::size_t>(xi), std::nullopt);
      double u = rng.normal(0.0, 1.0), v = rng.normal(0.0, 1.0);
      std::vector<double> x(static_cast<std::size_t>(xi - 1));
      for (std::size_t j = 0; j < x.size(); ++j) {
        double base = j < 2 ? u : (j < 4 ? v : 0.0);
        x[j] = (base + rng.normal(0.0, j < 4 ? 0.1 : 1.0)) * scale[j];
        if (j < 4 && rng.uniform(0.0, 1.0) < 0.08) x[j] += rng.normal(0.0, 8.0) * scale[j];
      }
      double y = coef0 * u + coef1 * v;
      if (curved) y += 0.5 * u * v;
      y += rng.normal(0.0, 0.05);
      for (std::size_t j = 0; j < x.size(); ++j) cs.values[j] = x[j];
      cs.values[static_cast<std::size_t>(xi - 1)] = y;
      ds.cases.push_back(std::move(cs));
    }
    suite.push_back({"reg" + std::to_string(d), std::move(ds), xi - 1, false});
  }
  return suite;
}

std::vector<EvalDataset> synthetic_classification_suite(int count, std::uint64_t seed) {
  std::vector<EvalDataset> suite;
  for (int d = 0; d < count; ++d) {
    Rng rng(seed + static_cast<std::uint64_t>(d) * 999983);
    int informative = 2;
    int noise = 1 + d % 3;
    int classes = 2 + d % 2;
    int xi = informative + noise + 1;
    int n = 120;

    Dataset ds;
    for (int j = 0; j < informative; ++j)
      ds.schema.push_back(continuous_feature("x" + std::to_string(j), 1.0));
    for (int j = 0; j < noise; ++j)
      ds.schema.push_back(continuous_feature("n" + std::to_string(j), 1.0));
    FeatureSchema label;
    label.name = "class";
    label.kind = FeatureKind::Nominal;
    label.weight = 1.0;
    for (int c = 0; c < classes; ++c) label.symbols.push_back("c" + std::to_string(c));
    ds.schema.push_back(label);
    ds.normalize_weights();

    std::vector<double> scale(static_cast<std::size_t>(xi - 1));
    for (auto& s : scale) s = std::pow(10.0, rng.uniform(-1.5, 1.5));
    std::vector<std::vector<double>> centers(static_cast<std::size_t>(classes),
                                             std::vector<double>(2));
    for (auto& c : centers)
      for (auto& v : c) v = rng.uniform(-2.0, 2.0);

    for (int i = 0; i < n; ++i) {
      int cls = static_cast<int>(rng.integer(static_cast<std::uint64_t>(classes)));
      Case cs;
      cs.id = i;
      cs.values.assign(static_cast<std::size_t>(xi), std::nullopt);
      for (int j = 0; j < informative; ++j)
        cs.values[static_cast<std::size_t>(j)] =
            (centers[static_cast<std::size_t>(cls)][static_cast<std::size_t>(j)] +
             rng.normal(0.0, 0.45)) *
            scale[static_cast<std::size_t>(j)];
      for (int j = informative; j < xi - 1; ++j)
        cs.values[static_cast<std::size_t>(j)] =
            rng.normal(0.0, scale[static_cast<std::size_t>(j)]);
      cs.values[static_cast<std::size_t>(xi - 1)] = cls;
      ds.cases.push_back(std::move(cs));
    }
    suite.push_back({"cls" + std::to_string(d), std::move(ds), xi - 1, true});
  }
  return suite;
}

void write_eval_result(std::ostream& out, const EvalResult& r, char delim) {
  out << "dataset" << delim << "configuration" << delim << "score\n";
  char buf[40];
  for (const auto& cell : r.cells) {
    std::snprintf(buf, sizeof buf, "%.17g", cell.score);
    out << cell.dataset << delim << cell.config << delim << buf << '\n';
  }
  out << "# aggregate:";
  for (std::size_t i = 0; i < r.configs.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.6g", r.aggregate[i]);
    out << ' ' << r.configs[i] << '=' << buf;
  }
  out << '\n';
}

}  // namespace sknn
