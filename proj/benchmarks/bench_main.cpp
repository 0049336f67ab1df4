// Micro-benchmarks for the hot paths: the simplex solve dominates B&B
// training time, the expert roll-out dominates maze data generation.

#include <benchmark/benchmark.h>

#include "retrosearch/bnb.hpp"
#include "retrosearch/maze.hpp"
#include "retrosearch/policy.hpp"
#include "retrosearch/random_walk.hpp"
#include "retrosearch/search.hpp"
#include "retrosearch/training.hpp"

namespace {

void BM_SimplexRootLp(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const retro::Graph g = retro::erdos_renyi(n, 5.0 / (n - 1), 7);
  const retro::IlpInstance ilp = retro::mvc_ilp(g);
  const std::vector<std::int8_t> free_vars(static_cast<std::size_t>(n), -1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(retro::simplex_solve(ilp, free_vars));
  }
}
BENCHMARK(BM_SimplexRootLp)->Arg(30)->Arg(50);

void BM_MazeExpertRollout(benchmark::State& state) {
  const int size = static_cast<int>(state.range(0));
  const retro::MazeInstance maze = retro::kruskal_generate(size, 11);
  const retro::MazeEnv env;
  const retro::ManhattanExpertPolicy expert;
  retro::SearchBudget budget;
  budget.max_expansions = static_cast<std::uint64_t>(size) * size + 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        retro::run_search(env, maze, expert, budget, retro::ExplorationConfig{}, 3));
  }
}
BENCHMARK(BM_MazeExpertRollout)->Arg(15)->Arg(31);

void BM_RankerScore(benchmark::State& state) {
  const retro::RankerParams params = retro::init_ranker(28, 32, "maze-v1", 5);
  retro::Rng rng(17);
  std::vector<double> x(28);
  for (double& v : x) v = 2.0 * rng.uniform01() - 1.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(retro::ranker_score(params, x));
  }
}
BENCHMARK(BM_RankerScore);

void BM_TrainEpoch(benchmark::State& state) {
  // Synthetic two-negative queries in 8 dims; one epoch per iteration.
  retro::Rng rng(23);
  retro::Dataset ds;
  ds.schema_id = "bnb-v1";
  for (int i = 0; i < 256; ++i) {
    retro::LabeledExample ex;
    ex.context.schema_id = ds.schema_id;
    ex.context.values.resize(8);
    for (double& v : ex.context.values) v = rng.normal(0.0, 1.0);
    for (int k = 0; k < 2; ++k) {
      retro::FeatureVector neg;
      neg.schema_id = ds.schema_id;
      neg.values.resize(8);
      for (double& v : neg.values) v = rng.normal(0.0, 1.0);
      ex.negatives.push_back(std::move(neg));
    }
    ds.examples.push_back(std::move(ex));
  }
  retro::LearnerConfig cfg;
  cfg.epochs = 1;
  cfg.seed = 29;
  const retro::RankerParams init = retro::init_ranker(8, 32, ds.schema_id, 31);
  for (auto _ : state) {
    benchmark::DoNotOptimize(retro::train_ranker(init, ds, cfg));
  }
}
BENCHMARK(BM_TrainEpoch);

void BM_WalkSimulation(benchmark::State& state) {
  retro::WalkConfig cfg;
  cfg.epsilon = 0.3;
  cfg.target = 20;
  cfg.trials = 10000;
  cfg.seed = 37;
  for (auto _ : state) {
    benchmark::DoNotOptimize(retro::simulate_hitting_time(cfg, 1));
  }
}
BENCHMARK(BM_WalkSimulation);

}  // namespace

BENCHMARK_MAIN();
