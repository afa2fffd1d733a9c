#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "oracles.hpp"
#include "sknn/metric.hpp"

using namespace sknn;
using namespace sknn::testing;

TEST_CASE("expected normal distance closed form") {
  SUBCASE("zero-mean pair with sigma 10 is 20/sqrt(pi)") {
    double v = lk_expected_distance_normal(0.0, 10.0);
    CHECK(v == doctest::Approx(20.0 / std::sqrt(3.14159265358979323846)).epsilon(1e-12));
    CHECK(v == doctest::Approx(11.2838).epsilon(1e-4));
  }
  SUBCASE("vanishing sigma recovers the plain distance") {
    CHECK(lk_expected_distance_normal(5.0, 1e-9) == doctest::Approx(5.0).epsilon(1e-9));
  }
  SUBCASE("never falls below the mean separation") {
    // The uncertainty correction underflows to zero once mu >> sigma, so the
    // bound is only strict when the two scales are comparable.
    for (double mu : {0.0, 0.3, 1.0, 7.5})
      for (double sigma : {0.1, 1.0, 4.0})
        CHECK(lk_expected_distance_normal(mu, sigma) >= mu);
    CHECK(lk_expected_distance_normal(1.0, 1.0) > 1.0);
  }
  SUBCASE("monotone in both arguments") {
    double prev = 0;
    for (double mu : {0.0, 0.5, 1.0, 2.0, 4.0}) {
      double v = lk_expected_distance_normal(mu, 1.0);
      CHECK(v > prev);
      prev = v;
    }
    prev = 0;
    for (double sigma : {0.1, 0.5, 1.0, 2.0}) {
      double v = lk_expected_distance_normal(1.0, sigma);
      CHECK(v > prev);
      prev = v;
    }
  }
  SUBCASE("matches a 2-D quadrature reference") {
    CHECK(lk_expected_distance_normal(5.0, 2.0) ==
          doctest::Approx(oracle::lk_distance_quadrature(5.0, 2.0)).epsilon(1e-4));
    std::mt19937_64 gen(42);
    std::uniform_real_distribution<double> mu_d(0.0, 10.0), sig_d(0.1, 5.0);
    for (int t = 0; t < 10; ++t) {
      double mu = mu_d(gen), sigma = sig_d(gen);
      double expected = oracle::lk_distance_quadrature(mu, sigma);
      CHECK(lk_expected_distance_normal(mu, sigma) ==
            doctest::Approx(expected).epsilon(1e-4));
    }
  }
}

TEST_CASE("generalized mean") {
  std::vector<double> v{4.0, 9.0}, w{0.5, 0.5};
  CHECK(generalized_mean(v, w, 0.0) == doctest::Approx(6.0).epsilon(1e-12));
  CHECK(generalized_mean(v, w, 1.0) == doctest::Approx(6.5).epsilon(1e-12));
  CHECK(generalized_mean(v, w, -1.0) ==
        doctest::Approx(1.0 / (0.5 / 4 + 0.5 / 9)).epsilon(1e-12));

  SUBCASE("small p approaches the geometric closed form") {
    std::mt19937_64 gen(7);
    std::uniform_real_distribution<double> val(0.01, 100.0);
    for (int t = 0; t < 200; ++t) {
      std::size_t n = 2 + t % 6;
      std::vector<double> xs, ws(n, 1.0 / static_cast<double>(n));
      for (std::size_t i = 0; i < n; ++i) xs.push_back(val(gen));
      double limit = generalized_mean(xs, ws, 0.0);
      double near = generalized_mean(xs, ws, 1e-6);
      CHECK(std::fabs(near - limit) / limit < 1e-5);
      double ref = oracle::geometric_mean(xs, ws);
      CHECK(limit == doctest::Approx(ref).epsilon(1e-12));
    }
  }

  SUBCASE("uniform-weight limit matches the n-th root product") {
    std::mt19937_64 gen(8);
    std::uniform_real_distribution<double> val(0.01, 50.0);
    for (int t = 0; t < 100; ++t) {
      std::size_t n = 2 + t % 5;
      std::vector<double> xs, ws(n, 1.0 / static_cast<double>(n));
      double prod = 1;
      for (std::size_t i = 0; i < n; ++i) {
        xs.push_back(val(gen));
        prod *= xs.back();
      }
      double root = std::pow(prod, 1.0 / static_cast<double>(n));
      CHECK(std::fabs(generalized_mean(xs, ws, 1e-7) - root) / root < 1e-6);
    }
  }

  SUBCASE("monotone non-decreasing in p") {
    std::mt19937_64 gen(9);
    std::uniform_real_distribution<double> val(0.1, 10.0);
    std::vector<double> xs, ws{0.2, 0.3, 0.5};
    for (int i = 0; i < 3; ++i) xs.push_back(val(gen));
    double prev = -1;
    for (double p : {-2.0, -0.5, 0.0, 0.3, 1.0, 2.0, 5.0}) {
      double m = generalized_mean(xs, ws, p);
      CHECK(m >= prev - 1e-12);
      prev = m;
    }
  }
}

TEST_CASE("typed feature differences") {
  SUBCASE("unequal nominal symbols are distance 1") {
    auto f = nominal("color", {"red", "blue"});
    CHECK(feature_difference(f, 0, 1, 0.5, DeviationMode::None, nullptr) == 1.0);
    CHECK(feature_difference(f, 0, 1, 0.5, DeviationMode::LkNormal, nullptr) == 1.0);
  }
  SUBCASE("equal nominal symbols under uncertainty use the confusion diagonal") {
    auto f = nominal("color", {"red", "blue"});
    Confusion c;
    c.size = 2;
    c.p = {0.9, 0.1, 0.2, 0.8};
    CHECK(feature_difference(f, 0, 0, 0.5, DeviationMode::LkNormal, &c) ==
          doctest::Approx(0.1).epsilon(1e-12));
    CHECK(feature_difference(f, 0, 0, 0.5, DeviationMode::None, &c) == 0.0);
  }
  SUBCASE("cyclic wraps around the period") {
    auto f = cyclic("hour", 24.0);
    CHECK(feature_difference(f, 23, 1, 0.1, DeviationMode::None, nullptr) == 2.0);
    CHECK(feature_difference(f, 6, 18, 0.1, DeviationMode::None, nullptr) == 12.0);
  }
  SUBCASE("ordinal distance is the rank difference") {
    auto f = ordinal("size", {"low", "mid", "high"});
    CHECK(feature_difference(f, 0, 2, 0.1, DeviationMode::None, nullptr) == 2.0);
  }
  SUBCASE("equal continuous values still carry the expected deviation distance") {
    auto f = continuous("x");
    double v = feature_difference(f, 100, 100, 10, DeviationMode::LkNormal, nullptr);
    CHECK(v == doctest::Approx(11.2838).epsilon(1e-4));
  }
}

TEST_CASE("case distance") {
  auto schema = std::vector<FeatureSchema>{continuous("a", 0.5), continuous("b", 0.5)};
  std::vector<int> both{0, 1};
  MetricConfig none{0.0, DeviationMode::None};
  DeviationVector dev;
  dev.r = {1.0, 1.0};
  dev.confusion.resize(2);

  SUBCASE("identical cases are distance zero without deviations") {
    std::vector<Value> x{1.5, 2.5};
    CHECK(case_distance(schema, x, x, none, dev, both) <= 1e-140);
  }

  SUBCASE("deviation-aware distance reverses a misleading raw ordering") {
    // One feature is noisy at scale ~1, the other is precise at scale ~.01;
    // a tiny match on the noisy feature should not dominate.
    std::vector<Value> x{1.1, 100.0}, y{1.2, 10.0}, z{1.1, 10.01};
    double dzx = case_distance(schema, z, x, none, dev, both);
    double dzy = case_distance(schema, z, y, none, dev, both);
    CHECK(dzx < dzy);  // raw geometric distance is fooled by the exact match

    MetricConfig lk{0.0, DeviationMode::LkNormal};
    DeviationVector lkdev;
    lkdev.r = {1.0, 0.01};
    lkdev.confusion.resize(2);
    double lzx = case_distance(schema, z, x, lk, lkdev, both);
    double lzy = case_distance(schema, z, y, lk, lkdev, both);
    CHECK(lzy < lzx);
  }

  SUBCASE("scaling one feature scales p=0 distances by c^w") {
    std::vector<Value> x{1.0, 3.0}, y{2.0, 7.0};
    double base = case_distance(schema, x, y, none, dev, both);
    double c = 1000.0;
    std::vector<Value> xs{1.0 * c, 3.0}, ys{2.0 * c, 7.0};
    double scaled = case_distance(schema, xs, ys, none, dev, both);
    CHECK(scaled == doctest::Approx(base * std::pow(c, 0.5)).epsilon(1e-9));
  }

  SUBCASE("subset weights renormalize") {
    std::vector<FeatureSchema> sch{continuous("a", 0.25), continuous("b", 0.75)};
    std::vector<Value> x{1.0, 5.0}, y{4.0, 5.0};
    std::vector<int> only_a{0};
    MetricConfig p1{1.0, DeviationMode::None};
    CHECK(case_distance(sch, x, y, p1, dev, only_a) == doctest::Approx(3.0));
  }
}

TEST_CASE("neighbor ordering is invariant to per-feature scaling at p=0") {
  std::mt19937_64 gen(21);
  std::uniform_real_distribution<double> val(-5.0, 5.0);
  std::vector<std::vector<double>> rows;
  for (int i = 0; i < 60; ++i) rows.push_back({val(gen), val(gen), val(gen)});
  auto ds = dataset({continuous("a"), continuous("b"), continuous("c")}, rows);
  Model m = plain_model(ds, 0.0, 5);

  auto order_of = [](const Model& model, const std::vector<Value>& q) {
    auto hood = knn_query(model, q, static_cast<int>(model.size()) - 1);
    std::vector<std::int64_t> ids;
    for (const auto& nb : hood.neighbors) ids.push_back(nb.id);
    return ids;
  };

  for (double c : {1e-3, 1e3}) {
    Dataset scaled = ds;
    for (auto& cs : scaled.cases) *cs.values[1] *= c;
    Model ms = plain_model(scaled, 0.0, 5);
    for (int q = 0; q < 5; ++q) {
      std::vector<Value> query{val(gen), val(gen), val(gen)};
      std::vector<Value> query_scaled = query;
      *query_scaled[1] *= c;
      CHECK(order_of(m, query) == order_of(ms, query_scaled));
    }
  }
}
