#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "sknn/conviction.hpp"
#include "sknn/engine.hpp"
#include "sknn/metric.hpp"
#include "sknn/residuals.hpp"

namespace {

using namespace sknn;

Model random_model(std::size_t n, std::size_t xi, double p, DeviationMode mode) {
  std::mt19937_64 gen(12345);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  Dataset ds;
  for (std::size_t j = 0; j < xi; ++j) {
    FeatureSchema f;
    f.name = "f" + std::to_string(j);
    ds.schema.push_back(f);
  }
  ds.normalize_weights();
  for (std::size_t i = 0; i < n; ++i) {
    Case cs;
    cs.id = static_cast<std::int64_t>(i);
    for (std::size_t j = 0; j < xi; ++j) cs.values.push_back(u(gen));
    ds.cases.push_back(std::move(cs));
  }
  Hyperparams omega;
  omega.k = 8;
  omega.metric.p = p;
  omega.metric.mode = mode;
  Model m = make_model(std::move(ds), omega);
  m.deviations = bootstrap_deviations(m.data);
  return m;
}

void BM_LkClosedForm(benchmark::State& state) {
  double mu = 0.1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(lk_expected_distance_normal(mu, 2.0));
    mu += 1e-9;
  }
}
BENCHMARK(BM_LkClosedForm);

void BM_GeneralizedMean(benchmark::State& state) {
  std::vector<double> xs(static_cast<std::size_t>(state.range(0)), 1.7);
  std::vector<double> ws(xs.size(), 1.0 / static_cast<double>(xs.size()));
  double p = state.range(1) == 0 ? 0.0 : 0.5;
  for (auto _ : state) benchmark::DoNotOptimize(generalized_mean(xs, ws, p));
}
BENCHMARK(BM_GeneralizedMean)->Args({8, 0})->Args({8, 1})->Args({64, 0})->Args({64, 1});

void BM_KnnQuery(benchmark::State& state) {
  auto n = static_cast<std::size_t>(state.range(0));
  Model m = random_model(n, 8, 0.0, DeviationMode::LkNormal);
  std::vector<Value> q(8, Value{0.0});
  for (auto _ : state) benchmark::DoNotOptimize(knn_query(m, q, 8));
}
BENCHMARK(BM_KnnQuery)->Arg(1000)->Arg(10000);

void BM_ExpectedSelfInformation(benchmark::State& state) {
  auto n = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    state.PauseTiming();
    Model m = random_model(n, 6, 0.0, DeviationMode::LkNormal);
    state.ResumeTiming();
    benchmark::DoNotOptimize(expected_self_information(m));
  }
}
BENCHMARK(BM_ExpectedSelfInformation)->Arg(200)->Arg(500)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
