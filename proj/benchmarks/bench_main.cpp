#include "sfgnn/gated_gnn.hpp"
#include "sfgnn/gnn.hpp"
#include "sfgnn/rng.hpp"
#include "sfgnn/sparse_filter.hpp"

#include <benchmark/benchmark.h>

namespace {

using namespace sfgnn;

Matrix gaussian(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  Rng rng(seed);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
  return m;
}

// args: p, examples; input length is the default segment length.
void BM_SparseFilterObjectiveAndGrad(benchmark::State& state) {
  SparseFilterModel m;
  m.weights = gaussian(4000, state.range(0), 1);
  const Matrix X = gaussian(4000, state.range(1), 2);
  for (auto _ : state) benchmark::DoNotOptimize(objective_and_grad(m, X));
}
BENCHMARK(BM_SparseFilterObjectiveAndGrad)->Args({50, 200})->Args({100, 200})->Args({300, 200})
    ->Unit(benchmark::kMillisecond);

struct Fixture {
  KnowledgeGraph graph;
  GraphPlan plan;
  Matrix annotations;
  Eigen::Index target;
};

Fixture fixture(std::size_t p) {
  std::map<std::string, Vector> f;
  std::uint64_t seed = 10;
  for (auto s : kSensorIds) f[std::string(s)] = gaussian(static_cast<Eigen::Index>(p), 1, ++seed);
  Fixture x{attach_annotations(build_default_graph(), f), {}, {}, 0};
  x.plan = compile_plan(x.graph);
  x.annotations = *x.graph.annotations();
  x.target = static_cast<Eigen::Index>(x.graph.index_of(x.graph.find(ontology::kDamaged).id));
  return x;
}

TrainingConfig config(std::size_t hidden) {
  TrainingConfig c;
  c.hidden_size = hidden;
  c.seed = 1;
  return c;
}

void BM_GnnLossAndGrad(benchmark::State& state) {
  const auto x = fixture(100);
  const auto m = make_gnn(x.graph, 100, config(static_cast<std::size_t>(state.range(0))));
  ParameterSet grads = m.params.zeros_like();
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        gnn_sample_loss(m, m.params, x.plan, x.annotations, x.target, HealthState::kDamaged, &grads, nullptr, 0.0));
  }
}
BENCHMARK(BM_GnnLossAndGrad)->Arg(16)->Arg(32);

void BM_GgnnForward(benchmark::State& state) {
  const auto x = fixture(100);
  const auto m = make_gated_gnn(100, config(static_cast<std::size_t>(state.range(0))));
  for (auto _ : state) benchmark::DoNotOptimize(predict_single_gated(x.graph, m));
}
BENCHMARK(BM_GgnnForward)->Arg(16)->Arg(32);

void BM_GgnnLossAndGrad(benchmark::State& state) {
  const auto x = fixture(100);
  const auto m = make_gated_gnn(100, config(static_cast<std::size_t>(state.range(0))));
  ParameterSet grads = m.params.zeros_like();
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        ggnn_sample_loss(m, m.params, x.plan, x.annotations, x.target, HealthState::kDamaged, &grads, nullptr, 0.0));
  }
}
BENCHMARK(BM_GgnnLossAndGrad)->Arg(16)->Arg(32);

}  // namespace

BENCHMARK_MAIN();
