#include <algorithm>
#include <random>
#include <set>

#include "doctest.h"
#include "helpers.hpp"
#include "sknn/error.hpp"
#include "sknn/reduction.hpp"

using namespace sknn;
using namespace sknn::testing;

namespace {

Dataset duplicates_plus_distinct() {
  std::vector<std::vector<double>> rows;
  for (int i = 0; i < 100; ++i) rows.push_back({0.0, 0.0});
  for (int i = 1; i <= 10; ++i) rows.push_back({10.0 * i, -7.0 * i});
  return dataset({continuous("a"), continuous("b")}, rows);
}

}  // namespace

TEST_CASE("anomaly detection") {
  SUBCASE("a far outlier in a tight cluster is flagged") {
    std::mt19937_64 gen(51);
    std::normal_distribution<double> tight(0.0, 0.2);
    std::vector<std::vector<double>> rows;
    for (int i = 0; i < 50; ++i) rows.push_back({tight(gen), tight(gen)});
    rows.push_back({50.0, 50.0});
    Model m = plain_model(dataset({continuous("a"), continuous("b")}, rows), 1.0, 5);
    auto flagged = detect_anomalies(m, 0.5);
    REQUIRE(!flagged.empty());
    CHECK(flagged.front() == 50);
  }
  SUBCASE("a vanishing threshold flags nothing on even data") {
    Model m = line_model({0, 1, 2, 3, 4, 5}, 2);
    CHECK(detect_anomalies(m, 1e-9).empty());
  }
  SUBCASE("duplicates are never anomalies") {
    Model m = plain_model(duplicates_plus_distinct(), 1.0, 3);
    auto flagged = detect_anomalies(m, 0.5);
    for (auto id : flagged) CHECK(id >= 100);  // only distinct points may flag
  }
}

TEST_CASE("case pruning") {
  SUBCASE("a cap equal to the current size is the identity") {
    Model m = line_model({0, 1, 2, 3, 4, 5, 6, 7}, 2);
    std::vector<RemovalRecord> log;
    Model out = prune_cases(m, {CasePrunePolicy::Cap, 8}, log);
    CHECK(out.size() == 8);
    CHECK(log.empty());
  }
  SUBCASE("capping a duplicate-heavy model keeps every distinct case") {
    Hyperparams omega;
    omega.k = 3;
    omega.metric.p = 1.0;
    omega.metric.mode = DeviationMode::None;
    Model m = make_model(duplicates_plus_distinct(), omega);
    m.deviations = bootstrap_deviations(m.data);
    std::vector<RemovalRecord> log;
    Model out = prune_cases(m, {CasePrunePolicy::Cap, 12}, log);
    CHECK(out.size() == 12);
    CHECK(log.size() == 98);
    std::set<std::int64_t> kept;
    for (const auto& cs : out.data.cases) kept.insert(cs.id);
    for (std::int64_t id = 100; id < 110; ++id) CHECK(kept.count(id) == 1);
  }
  SUBCASE("remove-count logs exactly that many cases") {
    Model m = line_model({0, 1, 2, 3, 4, 5, 6, 7, 8, 9}, 2);
    std::vector<RemovalRecord> log;
    Model out = prune_cases(m, {CasePrunePolicy::RemoveCount, 3}, log);
    CHECK(out.size() == 7);
    CHECK(log.size() == 3);
  }
  SUBCASE("pruning below k+1 cases is infeasible") {
    Model m = line_model({0, 1, 2, 3}, 2);
    std::vector<RemovalRecord> log;
    CHECK_THROWS_AS(prune_cases(m, {CasePrunePolicy::Cap, 1}, log), Error);
  }
  SUBCASE("pruning is deterministic") {
    Model m = plain_model(duplicates_plus_distinct(), 1.0, 3);
    std::vector<RemovalRecord> l1, l2;
    Model a = prune_cases(m, {CasePrunePolicy::Cap, 20}, l1);
    Model b = prune_cases(m, {CasePrunePolicy::Cap, 20}, l2);
    REQUIRE(l1.size() == l2.size());
    for (std::size_t i = 0; i < l1.size(); ++i) CHECK(l1[i].id == l2[i].id);
    for (std::size_t i = 0; i < a.size(); ++i)
      CHECK(a.data.cases[i].id == b.data.cases[i].id);
  }
}

TEST_CASE("feature pruning") {
  std::mt19937_64 gen(53);
  std::uniform_real_distribution<double> u(-2, 2);

  SUBCASE("keeping every feature is the identity") {
    std::vector<std::vector<double>> rows;
    for (int i = 0; i < 30; ++i) rows.push_back({u(gen), u(gen)});
    Model m = lk_model(dataset({continuous("a"), continuous("b")}, rows));
    std::vector<std::string> dropped;
    Model out = prune_features(m, {FeaturePrunePolicy::KeepTop, 2, false}, dropped);
    CHECK(out.feature_count() == 2);
    CHECK(dropped.empty());
  }
  SUBCASE("drops proceed one at a time and are deterministic") {
    std::vector<std::vector<double>> rows;
    for (int i = 0; i < 60; ++i) rows.push_back({u(gen), 3 * u(gen), u(gen) - 1});
    Model m = lk_model(dataset({continuous("a"), continuous("b"), continuous("c")}, rows));
    std::vector<std::string> d1, d2;
    Model out1 = prune_features(m, {FeaturePrunePolicy::KeepTop, 1, true}, d1);
    Model out2 = prune_features(m, {FeaturePrunePolicy::KeepTop, 1, true}, d2);
    REQUIRE(d1.size() == 2);
    CHECK(d1 == d2);
    CHECK(out1.feature_count() == 1);
    CHECK(out1.data.schema[0].name == out2.data.schema[0].name);
    // dropped names really left the schema
    for (const auto& f : out1.data.schema)
      CHECK(std::find(d1.begin(), d1.end(), f.name) == d1.end());
  }
  SUBCASE("weights renormalize after a drop") {
    std::vector<std::vector<double>> rows;
    for (int i = 0; i < 40; ++i) rows.push_back({u(gen), u(gen), u(gen)});
    Model m = lk_model(dataset({continuous("a"), continuous("b"), continuous("c")}, rows));
    std::vector<std::string> dropped;
    Model out = prune_features(m, {FeaturePrunePolicy::KeepTop, 2, false}, dropped);
    double total = 0;
    for (const auto& f : out.data.schema) total += f.weight;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
  }
}
