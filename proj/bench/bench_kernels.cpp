// Production kernels against the serial reference implementations.
#include <benchmark/benchmark.h>

#include "lace/ingest.hpp"
#include "lace/laminar.hpp"
#include "lace/predict.hpp"
#include "lace/reference.hpp"
#include "lace/rng.hpp"
#include "lace/synth.hpp"

using namespace lace;

namespace {

std::vector<DirectionSpeed> observations(int n) {
  Rng rng(1);
  std::vector<DirectionSpeed> z;
  for (int i = 0; i < n; ++i) z.push_back({0.3 + 0.2 * rng.normal(), std::max(0.0, 1.2 + 0.2 * rng.normal())});
  return z;
}

const std::vector<Trajectory>& training_corpus() {
  static const auto trajs = [] {
    auto sc = builtin_scenario("curved-arc");
    return generate(sc, 1.0);
  }();
  return trajs;
}

std::vector<Vec2> positions() {
  std::vector<Vec2> p;
  for (const auto& t : training_corpus())
    for (const auto& s : t.states) p.push_back(s.position());
  return p;
}

void BM_laminar_shared_row(benchmark::State& st) {
  const auto g = BinGeometry::standard();
  const auto z = observations(static_cast<int>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(extract_laminar(z, g, FilterParams::for_geometry(g)));
  st.SetItemsProcessed(st.iterations() * st.range(0));
}
BENCHMARK(BM_laminar_shared_row)->Arg(10)->Arg(40);

void BM_laminar_dense_reference(benchmark::State& st) {
  const auto g = BinGeometry::standard();
  const auto z = observations(static_cast<int>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(reference::extract_laminar_dense(z, g, FilterParams::for_geometry(g)));
  st.SetItemsProcessed(st.iterations() * st.range(0));
}
BENCHMARK(BM_laminar_dense_reference)->Arg(10)->Arg(40)->Unit(benchmark::kMillisecond);

void BM_kmeans(benchmark::State& st) {
  const auto p = positions();
  for (auto _ : st) benchmark::DoNotOptimize(kmeans_xy(p, 500, 42));
}
BENCHMARK(BM_kmeans)->Unit(benchmark::kMillisecond);

void BM_kmeans_reference(benchmark::State& st) {
  const auto p = positions();
  for (auto _ : st) benchmark::DoNotOptimize(reference::kmeans_xy(p, 500, 42));
}
BENCHMARK(BM_kmeans_reference)->Unit(benchmark::kMillisecond);

void BM_train(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(train(training_corpus(), TrainParams{}));
}
BENCHMARK(BM_train)->Unit(benchmark::kMillisecond);

void BM_train_reference(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(reference::train(training_corpus(), TrainParams{}));
}
BENCHMARK(BM_train_reference)->Unit(benchmark::kMillisecond);

struct PredictSetup {
  LaceModel model;
  std::vector<PredictionTask> tasks;
};

const PredictSetup& predict_setup() {
  static const PredictSetup s = [] {
    PredictSetup p;
    p.model = train(training_corpus(), TrainParams{});
    auto sc = builtin_scenario("curved-arc");
    sc.seed = 2;
    sc.agents = 200;
    p.tasks = make_tasks(generate(sc, 1.0), 3, 20);
    return p;
  }();
  return s;
}

void BM_predict_batch(benchmark::State& st) {
  const auto& s = predict_setup();
  for (auto _ : st) benchmark::DoNotOptimize(predict_lace_batch(s.model, s.tasks, PredictParams{}));
  st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(s.tasks.size()));
}
BENCHMARK(BM_predict_batch)->Unit(benchmark::kMillisecond);

void BM_predict_reference(benchmark::State& st) {
  const auto& s = predict_setup();
  for (auto _ : st) benchmark::DoNotOptimize(reference::predict_batch(s.model, s.tasks, PredictParams{}));
  st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(s.tasks.size()));
}
BENCHMARK(BM_predict_reference)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
