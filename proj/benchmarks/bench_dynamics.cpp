#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "pdes/dynamics.hpp"
#include "pdes/graph.hpp"
#include "pdes/problem.hpp"

using namespace pdes;

namespace {

// Ring of n lasso agents with a chord every four nodes.
struct Setup {
  CommGraph graph;
  ProblemInstance prob;
  NetworkState state;
};

Setup make_setup(int n) {
  std::vector<Edge> edges;
  for (int i = 0; i < n; ++i) edges.push_back({i, (i + 1) % n, 1.0});
  for (int i = 0; i + 4 < n; i += 4) edges.push_back({i, i + 4, 0.5});
  std::vector<double> p;
  std::vector<Interval> sets;
  for (int i = 0; i < n; ++i) {
    p.push_back(static_cast<double>(i % 7) - 3.0);
    sets.push_back(Interval(-20.0, 20.0));
  }
  Setup setup{CommGraph::from_edges(n, edges),
              lasso_instance(0.1, p, sets),
              NetworkState{}};
  setup.state.x = Eigen::MatrixXd::Zero(n, 1);
  std::mt19937_64 rng(1234);
  std::uniform_real_distribution<double> coord(-5.0, 5.0);
  for (int i = 0; i < n; ++i) setup.state.x(i, 0) = coord(rng);
  setup.state.v = Eigen::MatrixXd::Zero(n, 1);
  return setup;
}

}  // namespace

static void BM_PdStep(benchmark::State& state) {
  const Setup setup = make_setup(static_cast<int>(state.range(0)));
  NetworkState s = setup.state;
  for (auto _ : state) {
    s = pd_step(setup.graph, setup.prob, s, 0.01, 0.01);
    benchmark::DoNotOptimize(s.x.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_PdStep)->Arg(4)->Arg(16)->Arg(64)->Arg(256);

static void BM_NpdStep(benchmark::State& state) {
  const Setup setup = make_setup(static_cast<int>(state.range(0)));
  const NormalizationConfig norm{0.1, diameter(setup.graph) + 1};
  NetworkState s = setup.state;
  for (auto _ : state) {
    s = npd_step(setup.graph, setup.prob, s, 0.01, 0.01, norm);
    benchmark::DoNotOptimize(s.x.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_NpdStep)->Arg(4)->Arg(16)->Arg(64);

static void BM_MaxConsensus(benchmark::State& state) {
  const Setup setup = make_setup(static_cast<int>(state.range(0)));
  const int rounds = diameter(setup.graph) + 1;
  std::vector<double> initial(setup.graph.node_count());
  for (size_t i = 0; i < initial.size(); ++i)
    initial[i] = static_cast<double>(i % 13);
  for (auto _ : state) {
    auto out = max_consensus(setup.graph, initial, rounds);
    benchmark::DoNotOptimize(out.data());
  }
}
BENCHMARK(BM_MaxConsensus)->Arg(16)->Arg(64)->Arg(256);

static void BM_Run1000(benchmark::State& state) {
  const Setup setup = make_setup(static_cast<int>(state.range(0)));
  const Schedule alpha = Schedule::power(3, 1, 1);
  const Schedule eps = Schedule::power(3, 1, 1);
  for (auto _ : state) {
    auto trace = run(setup.graph, setup.prob, alpha, eps, setup.state.x,
                     setup.state.v, 1000, Variant::plain);
    benchmark::DoNotOptimize(trace.data());
  }
}
BENCHMARK(BM_Run1000)->Arg(4)->Arg(32);

BENCHMARK_MAIN();
