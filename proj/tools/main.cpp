#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "sknn/conviction.hpp"
#include "sknn/data.hpp"
#include "sknn/engine.hpp"
#include "sknn/error.hpp"
#include "sknn/evaluation.hpp"
#include "sknn/explain.hpp"
#include "sknn/imputation.hpp"
#include "sknn/parallel.hpp"
#include "sknn/persistence.hpp"
#include "sknn/reduction.hpp"
#include "sknn/residuals.hpp"
#include "sknn/stats.hpp"
#include "sknn/synthesis.hpp"

namespace {

using namespace sknn;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Model load_snapshot(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw data_error("cannot open snapshot: " + path);
  return load_model(in);
}

// Splits "a=1,b=2" into (feature index, raw value string) pairs against a
// schema, interning nominal symbols. Unknown names are usage errors.
std::vector<std::pair<int, double>> parse_assignments(Dataset& ds, const std::string& text) {
  std::vector<std::pair<int, double>> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto eq = item.find('=');
    if (eq == std::string::npos)
      throw usage_error("expected name=value, got '" + item + "'");
    std::string name = item.substr(0, eq), raw = item.substr(eq + 1);
    int j = ds.feature_index(name);
    if (j < 0) throw usage_error("unknown feature '" + name + "'");
    FeatureSchema& f = ds.schema[static_cast<std::size_t>(j)];
    double v;
    switch (f.kind) {
      case FeatureKind::Nominal:
        v = f.intern(raw);
        break;
      case FeatureKind::Ordinal: {
        int lvl = f.level_of(raw);
        if (lvl < 0) throw usage_error("feature '" + name + "' has no level '" + raw + "'");
        v = lvl;
        break;
      }
      default:
        try {
          std::size_t pos = 0;
          v = std::stod(raw, &pos);
          if (pos != raw.size()) throw std::invalid_argument(raw);
        } catch (const std::exception&) {
          throw usage_error("feature '" + name + "': not a number: '" + raw + "'");
        }
    }
    out.emplace_back(j, v);
  }
  return out;
}

std::vector<int> parse_feature_list(const Dataset& ds, const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string name;
  while (std::getline(ss, name, ',')) {
    int j = ds.feature_index(name);
    if (j < 0) throw usage_error("unknown feature '" + name + "'");
    out.push_back(j);
  }
  return out;
}

void echo_invocation(int argc, char** argv, std::uint64_t seed, bool seed_used) {
  std::ostringstream line;
  for (int i = 0; i < argc; ++i) {
    if (i) line << ' ';
    line << argv[i];
  }
  if (seed_used) line << "  # seed=" << seed;
  std::cerr << "invocation: " << line.str() << '\n';
}

int run(int argc, char** argv) {
  CLI::App app{"targetless knn analysis engine"};
  app.require_subcommand(1);

  std::uint64_t seed = 0;
  bool seed_set = false;
  int threads = 0;
  app.add_option("--seed", seed, "random seed (drawn and printed when unset)")
      ->each([&](const std::string&) { seed_set = true; });
  app.add_option("--threads", threads, "worker threads (0 = all cores)")
      ->envname("SKNN_THREADS");

  // ingest
  auto* c_ingest = app.add_subcommand("ingest", "parse data, fit residuals, save snapshot");
  std::string in_path, schema_path, out_path;
  int k = 8, iters = 3;
  double p = 0.0, tol = 0.05;
  std::string mode = "lk";
  char delim = ',';
  c_ingest->add_option("data", in_path, "delimited input table")->required();
  c_ingest->add_option("--schema", schema_path, "schema override file");
  c_ingest->add_option("-o,--output", out_path, "snapshot path")->required();
  c_ingest->add_option("--k", k, "neighborhood size");
  c_ingest->add_option("--p", p, "distance parameter (0 = geometric limit)");
  c_ingest->add_option("--mode", mode, "deviation mode: lk | none");
  c_ingest->add_option("--iters", iters, "residual refinement iterations");
  c_ingest->add_option("--tol", tol, "residual convergence tolerance");
  c_ingest->add_option("--delim", delim, "field delimiter");

  // analyze
  auto* c_analyze = app.add_subcommand("analyze", "per-case or per-feature conviction report");
  std::string analyze_snap;
  bool per_case = false, per_feature = false;
  c_analyze->add_option("snapshot", analyze_snap)->required();
  c_analyze->add_flag("--per-case", per_case);
  c_analyze->add_flag("--per-feature", per_feature);

  // react
  auto* c_react = app.add_subcommand("react", "predict action features from a context");
  std::string react_snap, context_text, action_text;
  bool explain = false;
  int react_k = 0;
  c_react->add_option("snapshot", react_snap)->required();
  c_react->add_option("--context", context_text, "name=value,... context assignment")->required();
  c_react->add_option("--action", action_text, "comma-separated action features")->required();
  c_react->add_option("--k", react_k, "neighborhood size (0 = snapshot default)");
  c_react->add_flag("--explain", explain, "emit the full explanation bundle");

  // explain (audit): regenerate a bundle from a persisted snapshot
  auto* c_explain = app.add_subcommand("explain", "explanation bundle for a query");
  std::string explain_snap, explain_context, explain_action;
  c_explain->add_option("snapshot", explain_snap)->required();
  c_explain->add_option("--context", explain_context)->required();
  c_explain->add_option("--action", explain_action)->required();

  // impute
  auto* c_impute = app.add_subcommand("impute", "fill missing values by conviction order");
  std::string impute_snap, impute_out, until = "complete";
  int batch = 1;
  double imp_threshold = 0, imp_conviction = 1.0;
  bool stochastic = false;
  c_impute->add_option("snapshot", impute_snap)->required();
  c_impute->add_option("-o,--output", impute_out, "imputed snapshot path");
  c_impute->add_option("--batch", batch);
  c_impute->add_option("--until", until, "complete | ceiling | sparsity");
  c_impute->add_option("--threshold", imp_threshold, "ceiling surprisal or target sparsity");
  c_impute->add_option("--conviction", imp_conviction, "nu for the stochastic resampler");
  c_impute->add_flag("--stochastic", stochastic);

  // reduce
  auto* c_reduce = app.add_subcommand("reduce", "anomaly flags plus case/feature pruning");
  std::string reduce_snap, reduce_out, keep_features;
  double anomaly_threshold = 0.5, floor = -1;
  int cap = 0;
  c_reduce->add_option("snapshot", reduce_snap)->required();
  c_reduce->add_option("-o,--output", reduce_out, "pruned snapshot path");
  c_reduce->add_option("--anomaly-threshold", anomaly_threshold);
  c_reduce->add_option("--cap", cap, "keep at most this many cases");
  c_reduce->add_option("--floor", floor, "drop cases below this surprisal");
  c_reduce->add_option("--features", keep_features, "keep=N top features by conviction");

  // synth
  auto* c_synth = app.add_subcommand("synth", "generate synthetic cases");
  std::string synth_snap, condition_text;
  int count = 1;
  double nu = 1.0;
  c_synth->add_option("snapshot", synth_snap)->required();
  c_synth->add_option("--count", count)->required();
  c_synth->add_option("--conviction", nu, "target conviction nu (1 = balanced)");
  c_synth->add_option("--condition", condition_text, "name=value,... conditions");

  // compare
  auto* c_compare = app.add_subcommand("compare", "model-to-model surprisal, both directions");
  std::string snap_a, snap_b;
  c_compare->add_option("snapshotA", snap_a)->required();
  c_compare->add_option("snapshotB", snap_b)->required();

  // eval
  auto* c_eval = app.add_subcommand("eval", "benchmark harness over a dataset suite");
  std::string suite = "synthetic", configs_text = "p2-standardized,p0.5-fractional,p0-lk";
  int eval_folds = 5, eval_k = 8, suite_count = 10;
  c_eval->add_option("--suite", suite, "'synthetic' or a directory of csv files");
  c_eval->add_option("--configs", configs_text);
  c_eval->add_option("--folds", eval_folds);
  c_eval->add_option("--k", eval_k);
  c_eval->add_option("--count", suite_count, "synthetic datasets per task kind");

  for (auto* sub : app.get_subcommands({})) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  if (!seed_set) {
    seed = std::random_device{}();
    seed_set = false;
  }
  echo_invocation(argc, argv, seed, true);
  set_thread_count(threads);

  if (*c_ingest) {
    std::ifstream in(in_path);
    if (!in) throw data_error("cannot open data file: " + in_path);
    std::vector<FeatureSchema> schema;
    if (!schema_path.empty()) {
      std::ifstream sf(schema_path);
      if (!sf) throw data_error("cannot open schema file: " + schema_path);
      schema = parse_schema_file(sf);
    } else {
      schema = infer_schema(in, delim);
      in.clear();
      in.seekg(0);
    }
    Dataset ds = parse_table(in, std::move(schema), delim);
    Hyperparams omega;
    omega.k = k;
    omega.metric.p = p;
    if (mode == "lk")
      omega.metric.mode = DeviationMode::LkNormal;
    else if (mode == "none")
      omega.metric.mode = DeviationMode::None;
    else
      throw usage_error("unknown deviation mode '" + mode + "'");
    Model m = make_model(std::move(ds), omega);
    ResidualReport rep;
    iterate_residuals(m, iters, tol, &rep);
    expected_self_information(m);
    save_model(m, out_path);
    write_residual_report(std::cout, m.data, rep);
    std::cout << "cases " << m.size() << " features " << m.feature_count() << " snapshot "
              << out_path << '\n';
    return 0;
  }

  if (*c_analyze) {
    Model m = load_snapshot(analyze_snap);
    if (!per_case && !per_feature) per_case = per_feature = true;
    if (per_case) write_conviction_report(std::cout, conviction_report_cases(m));
    if (per_feature) write_conviction_report(std::cout, conviction_report_features(m));
    return 0;
  }

  if (*c_react || *c_explain) {
    bool bundle = *c_explain || explain;
    Model m = load_snapshot(*c_react ? react_snap : explain_snap);
    auto assignments =
        parse_assignments(m.data, *c_react ? context_text : explain_context);
    std::vector<Value> context(m.feature_count());
    for (auto [j, v] : assignments) context[static_cast<std::size_t>(j)] = v;
    auto actions = parse_feature_list(m.data, *c_react ? action_text : explain_action);
    int use_k = (*c_react && react_k > 0) ? react_k : m.default_k();
    if (bundle) {
      ExplanationBundle b = explain_react(m, context, actions, use_k);
      write_bundle(std::cout, m.data, b);
    } else {
      Prediction pr = react(m, context, actions, use_k);
      for (std::size_t i = 0; i < actions.size(); ++i) {
        const FeatureSchema& f = m.data.schema[static_cast<std::size_t>(actions[i])];
        double snapped = snap_prediction(f, pr.values[i]);
        std::cout << f.name << ' ' << format_value(f, snapped) << '\n';
      }
    }
    return 0;
  }

  if (*c_impute) {
    Model m = load_snapshot(impute_snap);
    ImputeOptions opts;
    opts.batch = batch;
    opts.threshold = imp_threshold;
    opts.stochastic = stochastic;
    opts.seed = seed;
    opts.conviction = imp_conviction;
    if (until == "complete")
      opts.until = ImputeOptions::Complete;
    else if (until == "ceiling")
      opts.until = ImputeOptions::SurprisalCeiling;
    else if (until == "sparsity")
      opts.until = ImputeOptions::SparsityTarget;
    else
      throw usage_error("unknown stop rule '" + until + "'");
    std::vector<ImputeRecord> log;
    impute(m, opts, log);
    write_imputation_log(std::cout, m.data, log);
    if (!impute_out.empty()) save_model(m, impute_out);
    return 0;
  }

  if (*c_reduce) {
    Model m = load_snapshot(reduce_snap);
    auto anomalies = detect_anomalies(m, anomaly_threshold);
    std::cout << "anomalies";
    for (auto id : anomalies) std::cout << ' ' << id;
    std::cout << '\n';
    Model pruned = m;
    if (cap > 0 || floor >= 0) {
      CasePrunePolicy policy;
      if (cap > 0) {
        policy.kind = CasePrunePolicy::Cap;
        policy.value = cap;
      } else {
        policy.kind = CasePrunePolicy::SurprisalFloor;
        policy.value = floor;
      }
      std::vector<RemovalRecord> log;
      pruned = prune_cases(pruned, policy, log);
      write_removal_log(std::cout, log);
    }
    if (!keep_features.empty()) {
      if (keep_features.rfind("keep=", 0) != 0)
        throw usage_error("--features expects keep=N");
      FeaturePrunePolicy policy;
      policy.kind = FeaturePrunePolicy::KeepTop;
      policy.value = std::stod(keep_features.substr(5));
      std::vector<std::string> dropped;
      pruned = prune_features(pruned, policy, dropped);
      std::cout << "dropped-features";
      for (const auto& n : dropped) std::cout << ' ' << n;
      std::cout << '\n';
    }
    std::cout << "cases " << pruned.size() << " features " << pruned.feature_count() << '\n';
    if (!reduce_out.empty()) save_model(pruned, reduce_out);
    return 0;
  }

  if (*c_synth) {
    Model m = load_snapshot(synth_snap);
    SynthesisRequest req;
    req.count = count;
    req.conviction = nu;
    req.seed = seed;
    if (!condition_text.empty()) req.conditions = parse_assignments(m.data, condition_text);
    auto cases = synthesize(m, req);
    Dataset out;
    out.schema = m.data.schema;
    out.cases = std::move(cases);
    write_table(std::cout, out);
    return 0;
  }

  if (*c_compare) {
    Model a = load_snapshot(snap_a);
    Model b = load_snapshot(snap_b);
    double ab = model_surprisal(a, b.data);
    double ba = model_surprisal(b, a.data);
    std::cout << "surprisal A->B " << fmt(ab) << '\n';
    std::cout << "surprisal B->A " << fmt(ba) << '\n';
    return 0;
  }

  if (*c_eval) {
    std::vector<EvalDataset> datasets;
    if (suite == "synthetic") {
      datasets = synthetic_regression_suite(suite_count);
      auto cls = synthetic_classification_suite(suite_count);
      datasets.insert(datasets.end(), cls.begin(), cls.end());
    } else {
      throw usage_error("only the bundled 'synthetic' suite is supported");
    }
    std::vector<EvalConfig> configs;
    std::stringstream ss(configs_text);
    std::string label;
    while (std::getline(ss, label, ',')) {
      if (label == "p2-standardized")
        configs.push_back(classic_config());
      else if (label == "p0.5-fractional")
        configs.push_back(fractional_config());
      else if (label == "p0-lk")
        configs.push_back(lk_config());
      else
        throw usage_error("unknown configuration '" + label + "'");
    }
    EvalOptions opts;
    opts.folds = eval_folds;
    opts.k = eval_k;
    opts.seed = seed;
    EvalResult result = evaluate(datasets, configs, opts);
    write_eval_result(std::cout, result);
    if (configs.size() >= 2) {
      auto first = result.scores_for(configs.front().label);
      auto last = result.scores_for(configs.back().label);
      std::cout << "wilcoxon-p " << fmt(wilcoxon_signed_rank(first, last)) << '\n';
    }
    return 0;
  }

  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const sknn::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
}
