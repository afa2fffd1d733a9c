#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "sknn/conviction.hpp"

using namespace sknn;
using namespace sknn::testing;

namespace {

std::vector<int> all_features(const Model& m) {
  std::vector<int> s(m.feature_count());
  std::iota(s.begin(), s.end(), 0);
  return s;
}

Dataset grid_dataset(int side) {
  std::vector<std::vector<double>> rows;
  for (int x = 0; x < side; ++x)
    for (int y = 0; y < side; ++y) rows.push_back({double(x), double(y)});
  return dataset({continuous("x"), continuous("y")}, rows);
}

}  // namespace

TEST_CASE("distance contribution") {
  SUBCASE("two neighbors at 1 and 3 give the harmonic mean 1.5") {
    Model m = line_model({1, 3});
    std::vector<Value> q{Value{0.0}};
    CHECK(distance_contribution(m, q, std::nullopt, all_features(m), 2, 1.0) ==
          doctest::Approx(1.5));
  }
  SUBCASE("equidistant neighbors give the common distance") {
    Model m = line_model({-2, 2});
    std::vector<Value> q{Value{0.0}};
    CHECK(distance_contribution(m, q, std::nullopt, all_features(m), 2, 1.0) ==
          doctest::Approx(2.0));
  }
  SUBCASE("alpha exponent applies per distance") {
    Model m = line_model({-2, 2});
    std::vector<Value> q{Value{0.0}};
    CHECK(distance_contribution(m, q, std::nullopt, all_features(m), 2, 2.0) ==
          doctest::Approx(4.0));
  }
  SUBCASE("grid interiors are denser than corners") {
    Model m = plain_model(grid_dataset(4), 1.0, 3);
    std::vector<Value> corner{Value{0.0}, Value{0.0}};
    std::vector<Value> interior{Value{1.0}, Value{1.0}};
    double phi_corner = distance_contribution(m, corner, 0, all_features(m), 3, 1.0);
    double phi_interior = distance_contribution(m, interior, 5, all_features(m), 3, 1.0);
    CHECK(phi_interior < phi_corner);
  }
  SUBCASE("duplicates split one contribution against the nearest distinct case") {
    Model m = line_model({5, 5, 5, 8});
    std::vector<Value> q{Value{5.0}};
    // Query matches 3 in-model points; the distinct neighbor sits at 3.
    CHECK(distance_contribution(m, q, std::nullopt, all_features(m), 2, 1.0) ==
          doctest::Approx(3.0 / 4.0));
    // As an in-model point, one duplicate is excluded as self.
    CHECK(distance_contribution(m, q, 0, all_features(m), 2, 1.0) ==
          doctest::Approx(3.0 / 3.0));
  }
  SUBCASE("a fully duplicated model contributes zero") {
    Model m = line_model({5, 5, 5});
    std::vector<Value> q{Value{5.0}};
    CHECK(distance_contribution(m, q, std::nullopt, all_features(m), 2, 1.0) == 0.0);
  }
}

TEST_CASE("self-information") {
  SUBCASE("contribution equal to the residual norm gives exactly one nat") {
    Model m = line_model({0, 2}, 1);
    m.deviations.r = {1.0};
    std::vector<Value> q{Value{1.0}};  // nearest neighbor at distance 1
    CHECK(self_information(m, q, std::nullopt, all_features(m)) == doctest::Approx(1.0));
  }
  SUBCASE("doubling every residual halves the information") {
    Model m = plain_model(grid_dataset(3), 1.0, 3);
    std::vector<Value> q{Value{0.4}, Value{1.3}};
    double base = self_information(m, q, std::nullopt, all_features(m));
    for (auto& r : m.deviations.r) r *= 2.0;
    m.invalidate_cache();
    CHECK(self_information(m, q, std::nullopt, all_features(m)) ==
          doctest::Approx(base / 2.0));
  }
  SUBCASE("an exact duplicate of every case carries zero information") {
    Model m = line_model({5, 5});
    std::vector<Value> q{Value{5.0}};
    CHECK(self_information(m, q, std::nullopt, all_features(m)) == 0.0);
  }
}

TEST_CASE("prediction conviction") {
  SUBCASE("symmetric models put every case at conviction one") {
    Model m = plain_model(dataset({continuous("x")}, {{0}, {1}, {2}, {3}}), 1.0, 1);
    // End cases see distance 1, middles see 1 as well under k=1.
    expected_self_information(m);
    for (const auto& cs : m.data.cases) {
      double pc = prediction_conviction(m, cs.values, cs.id);
      CHECK(pc == doctest::Approx(1.0));
    }
  }
  SUBCASE("a planted outlier has the smallest conviction, below one") {
    std::mt19937_64 gen(31);
    std::normal_distribution<double> tight(0.0, 0.3);
    std::vector<std::vector<double>> rows;
    for (int i = 0; i < 40; ++i) rows.push_back({tight(gen), tight(gen)});
    rows.push_back({40.0, -35.0});
    Model m = plain_model(dataset({continuous("a"), continuous("b")}, rows), 1.0, 5);
    expected_self_information(m);
    std::size_t outlier = rows.size() - 1;
    double outlier_pc = prediction_conviction(m, m.data.cases[outlier].values,
                                              m.data.cases[outlier].id);
    CHECK(outlier_pc < 1.0);
    for (std::size_t i = 0; i < outlier; ++i)
      CHECK(outlier_pc <
            prediction_conviction(m, m.data.cases[i].values, m.data.cases[i].id));
  }
  SUBCASE("a duplicated dense point sits above one") {
    std::vector<std::vector<double>> rows{{0}, {0}, {1}, {2}, {3}, {4}, {5}};
    Model m = plain_model(dataset({continuous("x")}, rows), 1.0, 3);
    expected_self_information(m);
    CHECK(prediction_conviction(m, m.data.cases[0].values, m.data.cases[0].id) > 1.0);
  }
  SUBCASE("zero information reports the redundant-point sentinel") {
    Model m = line_model({5, 5, 5});
    expected_self_information(m);
    CHECK(prediction_conviction(m, m.data.cases[0].values, m.data.cases[0].id) ==
          std::numeric_limits<double>::infinity());
  }
}

TEST_CASE("point probabilities") {
  SUBCASE("two symmetric points split evenly") {
    Model m = line_model({-1, 1});
    auto l = point_probabilities(m);
    CHECK(l[0] == doctest::Approx(0.5));
    CHECK(l[1] == doctest::Approx(0.5));
  }
  SUBCASE("probabilities always sum to one") {
    Model m = plain_model(grid_dataset(4), 1.0, 3);
    auto l = point_probabilities(m);
    double total = std::accumulate(l.begin(), l.end(), 0.0);
    CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
    for (double v : l) CHECK(v > 0.0);
  }
  SUBCASE("grid corners outweigh edges outweigh interiors") {
    // k=5 reaches past the immediate lattice shell, where the ordering is
    // strict; at k=3 edges and interiors tie.
    Model m = plain_model(grid_dataset(4), 1.0, 5);
    auto l = point_probabilities(m);
    auto idx = [](int x, int y) { return std::size_t(x * 4 + y); };
    double corner = l[idx(0, 0)], edge = l[idx(0, 1)], interior = l[idx(1, 1)];
    CHECK(corner > edge);
    CHECK(edge > interior);
  }
}

TEST_CASE("familiarity conviction") {
  SUBCASE("uniform point probabilities give conviction one everywhere") {
    Model m = line_model({-1, 1});
    auto fam = familiarity_conviction_all(m);
    CHECK(fam[0] == doctest::Approx(1.0));
    CHECK(fam[1] == doctest::Approx(1.0));
  }
  SUBCASE("off-lattice point is less familiar than the grid median") {
    auto ds = grid_dataset(5);
    Case odd;
    odd.id = 25;
    odd.values = {Value{0.5}, Value{0.1}};
    ds.cases.push_back(odd);
    Model m = lk_model(ds, 0.0, 8);
    auto fam = familiarity_conviction_all(m);
    std::vector<double> grid_only(fam.begin(), fam.begin() + 25);
    std::sort(grid_only.begin(), grid_only.end());
    double median = grid_only[12];
    CHECK(fam[25] < median);
  }
  SUBCASE("the reciprocal mean identity holds") {
    std::mt19937_64 gen(37);
    std::uniform_real_distribution<double> u(-4, 4);
    std::vector<std::vector<double>> rows;
    for (int i = 0; i < 30; ++i) rows.push_back({u(gen), u(gen)});
    Model m = plain_model(dataset({continuous("a"), continuous("b")}, rows), 1.0, 4);
    auto fam = familiarity_conviction_all(m);
    double recip = 0;
    for (double f : fam) recip += 1.0 / f;
    recip /= static_cast<double>(fam.size());
    CHECK(recip == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("feature prediction contribution and conviction") {
  std::mt19937_64 gen(41);
  std::uniform_real_distribution<double> u(-2, 2);

  SUBCASE("identical feature columns contribute identically") {
    std::vector<std::vector<double>> rows;
    for (int i = 0; i < 120; ++i) {
      double x = u(gen);
      rows.push_back({x, x, u(gen)});
    }
    Model m = lk_model(dataset({continuous("a"), continuous("a2"), continuous("n")}, rows));
    CHECK(feature_prediction_contribution(m, 0) ==
          doctest::Approx(feature_prediction_contribution(m, 1)).epsilon(1e-12));
  }

  SUBCASE("subset removal matches a physically reduced model") {
    std::vector<std::vector<double>> rows;
    for (int i = 0; i < 40; ++i) rows.push_back({u(gen), 3 * u(gen), u(gen) - 1});
    auto ds = dataset({continuous("a"), continuous("b"), continuous("c")}, rows);
    Model m = lk_model(ds);
    for (std::size_t drop = 0; drop < 3; ++drop) {
      Dataset reduced = ds;
      reduced.schema.erase(reduced.schema.begin() + static_cast<std::ptrdiff_t>(drop));
      for (auto& cs : reduced.cases)
        cs.values.erase(cs.values.begin() + static_cast<std::ptrdiff_t>(drop));
      reduced.normalize_weights();
      Model rm = lk_model(reduced);
      CHECK(mean_self_information_without(m, static_cast<int>(drop)) ==
            doctest::Approx(expected_self_information(rm)).epsilon(1e-9));
    }
  }

  SUBCASE("exchangeable features have conviction one") {
    std::vector<std::vector<double>> rows;
    for (int i = 0; i < 20; ++i) {
      double a = u(gen), b = u(gen);
      rows.push_back({a, b});
      rows.push_back({b, a});  // swap symmetry
    }
    Model m = plain_model(dataset({continuous("a"), continuous("b")}, rows), 1.0, 4);
    auto fc = feature_prediction_conviction_all(m);
    CHECK(fc[0] == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(fc[1] == doctest::Approx(1.0).epsilon(1e-9));
  }

  SUBCASE("reciprocal feature convictions average to one") {
    std::vector<std::vector<double>> rows;
    for (int i = 0; i < 50; ++i) rows.push_back({u(gen), 3 * u(gen), u(gen) + 1});
    Model m = lk_model(dataset({continuous("a"), continuous("b"), continuous("c")}, rows));
    auto fc = feature_prediction_conviction_all(m);
    double recip = 0;
    for (double v : fc) recip += 1.0 / v;
    recip /= static_cast<double>(fc.size());
    CHECK(recip == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("model-to-model surprisal") {
  std::mt19937_64 gen(43);
  std::normal_distribution<double> base(0.0, 1.0);
  std::vector<std::vector<double>> rows;
  for (int i = 0; i < 80; ++i) rows.push_back({base(gen), base(gen)});
  auto ds = dataset({continuous("a"), continuous("b")}, rows);
  Model m = lk_model(ds);
  iterate_residuals(m, 2, 0.05);

  SUBCASE("a model compared to itself reports its own expected information") {
    double ei = expected_self_information(m);
    CHECK(model_surprisal(m, m.data) == doctest::Approx(ei).epsilon(1e-9));
  }

  SUBCASE("shifted data is more surprising than the source data") {
    Dataset shifted = ds;
    for (auto& cs : shifted.cases)
      for (auto& v : cs.values) *v += 8.0;
    CHECK(model_surprisal(m, shifted) > model_surprisal(m, ds));
  }

  SUBCASE("surprisal attributes cases to their generating population") {
    std::normal_distribution<double> other(6.0, 1.0);
    std::vector<std::vector<double>> rows_b;
    for (int i = 0; i < 80; ++i) rows_b.push_back({other(gen), other(gen)});
    Model mb = lk_model(dataset({continuous("a"), continuous("b")}, rows_b));
    iterate_residuals(mb, 2, 0.05);

    std::vector<std::vector<double>> probe_rows;
    for (int i = 0; i < 20; ++i) probe_rows.push_back({other(gen), other(gen)});
    auto probe = dataset({continuous("a"), continuous("b")}, probe_rows);
    CHECK(model_surprisal(mb, probe) < model_surprisal(m, probe));
  }
}

TEST_CASE("conviction rankings survive per-feature rescaling at p=0") {
  std::mt19937_64 gen(47);
  std::uniform_real_distribution<double> u(-5, 5);
  std::vector<std::vector<double>> rows;
  for (int i = 0; i < 50; ++i) rows.push_back({u(gen), u(gen)});
  auto ds = dataset({continuous("a"), continuous("b")}, rows);

  auto ranking = [](Model& m) {
    expected_self_information(m);
    std::vector<std::size_t> order(m.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return m.case_self_info[a] < m.case_self_info[b];
    });
    return order;
  };

  Model base = lk_model(ds, 0.0, 6);
  auto base_rank = ranking(base);
  for (double c : {1e-3, 1e3}) {
    Dataset scaled = ds;
    for (auto& cs : scaled.cases) *cs.values[0] *= c;
    Model ms = lk_model(scaled, 0.0, 6);
    CHECK(ranking(ms) == base_rank);
  }
}
