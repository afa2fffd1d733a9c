#include <random>
#include <sstream>

#include "doctest.h"
#include "helpers.hpp"
#include "sknn/conviction.hpp"
#include "sknn/error.hpp"
#include "sknn/persistence.hpp"
#include "sknn/residuals.hpp"

using namespace sknn;
using namespace sknn::testing;

namespace {

Model rich_model() {
  std::mt19937_64 gen(103);
  std::uniform_real_distribution<double> u(-9, 9);
  std::vector<std::vector<double>> rows;
  for (int i = 0; i < 30; ++i)
    rows.push_back({u(gen), u(gen), double(i % 3), double(i % 4), std::fabs(u(gen))});
  auto schema = std::vector<FeatureSchema>{
      continuous("a", 2.0), continuous("b", 1.0), nominal("c", {"x", "y", "z"}),
      ordinal("o", {"w1", "w2", "w3", "w4"}), cyclic("t", 20.0)};
  auto ds = dataset(schema, rows);
  ds.cases[4].values[1] = std::nullopt;
  ds.cases[9].values[4] = std::nullopt;
  ds.cases[2].session = "s1";
  ds.cases[2].origin = Origin::Imputed;
  Model m = lk_model(ds, 0.5, 4);
  iterate_residuals(m, 2, 0.05);
  expected_self_information(m);
  return m;
}

}  // namespace

TEST_CASE("snapshot round-trip") {
  Model m = rich_model();
  std::ostringstream first;
  save_model(m, first);

  SUBCASE("save, load, save is byte-identical") {
    std::istringstream in(first.str());
    Model loaded = load_model(in);
    std::ostringstream second;
    save_model(loaded, second);
    CHECK(first.str() == second.str());
  }

  SUBCASE("everything observable survives the trip") {
    std::istringstream in(first.str());
    Model loaded = load_model(in);
    REQUIRE(loaded.size() == m.size());
    REQUIRE(loaded.feature_count() == m.feature_count());
    CHECK(loaded.omega.k == m.omega.k);
    CHECK(loaded.omega.metric.p == m.omega.metric.p);
    CHECK(loaded.omega.alpha == m.omega.alpha);
    CHECK(loaded.stats_valid == m.stats_valid);
    CHECK(loaded.expected_self_info == m.expected_self_info);
    for (std::size_t j = 0; j < m.feature_count(); ++j) {
      CHECK(loaded.data.schema[j].name == m.data.schema[j].name);
      CHECK(loaded.data.schema[j].kind == m.data.schema[j].kind);
      CHECK(loaded.data.schema[j].weight == m.data.schema[j].weight);
      CHECK(loaded.deviations.r[j] == m.deviations.r[j]);
    }
    CHECK(loaded.data.schema[2].symbols == m.data.schema[2].symbols);
    CHECK(loaded.data.schema[3].levels == m.data.schema[3].levels);
    CHECK(loaded.data.schema[4].period == m.data.schema[4].period);
    CHECK(loaded.deviations.confusion[2].p == m.deviations.confusion[2].p);
    for (std::size_t i = 0; i < m.size(); ++i) {
      CHECK(loaded.data.cases[i].id == m.data.cases[i].id);
      CHECK(loaded.data.cases[i].origin == m.data.cases[i].origin);
      CHECK(loaded.data.cases[i].session == m.data.cases[i].session);
      CHECK(loaded.data.cases[i].values == m.data.cases[i].values);
    }
  }

  SUBCASE("truncation is a corruption error with no partial model") {
    std::string text = first.str();
    std::istringstream in(text.substr(0, text.size() / 2));
    CHECK_THROWS_AS(load_model(in), Error);
    try {
      std::istringstream in2(text.substr(0, text.size() / 2));
      load_model(in2);
    } catch (const Error& e) {
      CHECK(e.exit_code() == 5);
    }
  }

  SUBCASE("a flipped body byte fails the digest check") {
    std::string text = first.str();
    text[text.size() - 3] ^= 0x40;
    std::istringstream in(text);
    CHECK_THROWS_AS(load_model(in), Error);
  }

  SUBCASE("a bad magic line is rejected") {
    std::string text = first.str();
    text[0] = 'X';
    std::istringstream in(text);
    CHECK_THROWS_AS(load_model(in), Error);
  }
}
