#include <sstream>

#include "doctest.h"
#include "helpers.hpp"
#include "sknn/data.hpp"
#include "sknn/error.hpp"

using namespace sknn;
using namespace sknn::testing;

TEST_CASE("table parsing") {
  SUBCASE("empty fields become missing values") {
    std::istringstream in("a,b\n1.5,x\n2.0,\n");
    auto ds = parse_table(in, {continuous("a"), nominal("b", {})});
    REQUIRE(ds.size() == 2);
    CHECK(*ds.cases[0].values[0] == 1.5);
    CHECK(ds.cases[0].values[1].has_value());
    CHECK(!ds.cases[1].values[1].has_value());
  }
  SUBCASE("question mark also means missing") {
    std::istringstream in("a\n?\n3\n");
    auto ds = parse_table(in, {continuous("a")});
    CHECK(!ds.cases[0].values[0].has_value());
    CHECK(*ds.cases[1].values[0] == 3.0);
  }
  SUBCASE("header-only input gives an empty dataset") {
    std::istringstream in("a,b\n");
    auto ds = parse_table(in, {continuous("a"), continuous("b")});
    CHECK(ds.size() == 0);
  }
  SUBCASE("ordinal tokens map to level indices") {
    std::istringstream in("s\nmid\nhigh\nlow\n");
    auto ds = parse_table(in, {ordinal("s", {"low", "mid", "high"})});
    CHECK(*ds.cases[0].values[0] == 1.0);
    CHECK(*ds.cases[1].values[0] == 2.0);
    CHECK(*ds.cases[2].values[0] == 0.0);
  }
  SUBCASE("unknown column is a data error") {
    std::istringstream in("a,zz\n1,2\n");
    CHECK_THROWS_AS(parse_table(in, {continuous("a"), continuous("b")}), Error);
  }
  SUBCASE("non-numeric token in a continuous column is a data error") {
    std::istringstream in("a\npotato\n");
    CHECK_THROWS_AS(parse_table(in, {continuous("a")}), Error);
  }
  SUBCASE("ordinal token outside the level list is a data error") {
    std::istringstream in("s\nhuge\n");
    CHECK_THROWS_AS(parse_table(in, {ordinal("s", {"low", "high"})}), Error);
  }
  SUBCASE("new nominal symbols intern without error") {
    std::istringstream in("c\nred\ngreen\nred\n");
    auto ds = parse_table(in, {nominal("c", {"red"})});
    CHECK(ds.schema[0].symbols.size() == 2);
    CHECK(*ds.cases[1].values[0] == 1.0);
  }
}

TEST_CASE("schema inference") {
  SUBCASE("numeric columns with gaps stay continuous") {
    std::istringstream in("a\n1\n2.5\n?\n");
    auto schema = infer_schema(in);
    CHECK(schema[0].kind == FeatureKind::Continuous);
  }
  SUBCASE("symbolic columns become nominal") {
    std::istringstream in("a\nred\nblue\n");
    auto schema = infer_schema(in);
    CHECK(schema[0].kind == FeatureKind::Nominal);
  }
  SUBCASE("mixed numeric and symbolic becomes nominal") {
    std::istringstream in("a\n1\nred\n");
    auto schema = infer_schema(in);
    CHECK(schema[0].kind == FeatureKind::Nominal);
  }
  SUBCASE("weights come out uniform") {
    std::istringstream in("a,b,c,d\n1,2,3,4\n");
    auto schema = infer_schema(in);
    for (const auto& f : schema) CHECK(f.weight == doctest::Approx(0.25));
  }
}

TEST_CASE("weight normalization is idempotent") {
  auto ds = dataset({continuous("a", 3.0), continuous("b", 1.0)}, {{1, 2}});
  CHECK(ds.schema[0].weight == doctest::Approx(0.75));
  ds.normalize_weights();
  CHECK(ds.schema[0].weight == doctest::Approx(0.75));
  CHECK(ds.schema[1].weight == doctest::Approx(0.25));
}

TEST_CASE("write/parse round-trips values at full precision") {
  auto ds = dataset({continuous("a"), continuous("b")},
                    {{0.1, 1.0 / 3.0}, {2.5e-17, 123456.789012345678}});
  std::ostringstream out;
  write_table(out, ds);
  std::istringstream in(out.str());
  auto back = parse_table(in, ds.schema);
  REQUIRE(back.size() == ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i)
    for (std::size_t j = 0; j < ds.feature_count(); ++j)
      CHECK(*back.cases[i].values[j] == *ds.cases[i].values[j]);
}

TEST_CASE("value masking") {
  std::vector<std::vector<double>> rows;
  for (int i = 0; i < 10; ++i) rows.push_back({1.0 * i, 2.0 * i, 3.0 * i, 4.0 * i,
                                               5.0 * i, 6.0 * i, 7.0 * i, 8.0 * i,
                                               9.0 * i, 10.0 * i});
  std::vector<FeatureSchema> schema;
  for (int j = 0; j < 10; ++j) schema.push_back(continuous("f" + std::to_string(j)));
  auto ds = dataset(schema, rows);

  SUBCASE("mask size follows the rounding rule") {
    std::vector<MaskEntry> mask;
    mask_values(ds, 0.1, 5, mask);
    CHECK(mask.size() == 10);  // 0.1 * 10 * 10
    mask.clear();
    mask_values(ds, 1e-9, 5, mask);
    CHECK(mask.size() == 1);  // max(1, ...)
  }
  SUBCASE("same seed gives an identical mask, masked cells go missing") {
    std::vector<MaskEntry> m1, m2;
    auto d1 = mask_values(ds, 0.2, 99, m1);
    auto d2 = mask_values(ds, 0.2, 99, m2);
    REQUIRE(m1.size() == m2.size());
    for (std::size_t i = 0; i < m1.size(); ++i) {
      CHECK(m1[i].case_index == m2[i].case_index);
      CHECK(m1[i].feature == m2[i].feature);
      CHECK(!d1.cases[m1[i].case_index].values[m1[i].feature].has_value());
      CHECK(m1[i].value == *ds.cases[m1[i].case_index].values[m1[i].feature]);
    }
    CHECK(!d2.cases.empty());
  }
  SUBCASE("fraction outside (0,1) is rejected") {
    std::vector<MaskEntry> mask;
    CHECK_THROWS_AS(mask_values(ds, 0.0, 1, mask), Error);
    CHECK_THROWS_AS(mask_values(ds, 1.0, 1, mask), Error);
  }
}
