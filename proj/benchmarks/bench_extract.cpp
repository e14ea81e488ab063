/* Copyright 2026 The esat Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */


#include <benchmark/benchmark.h>

#include "esat/cost_model.hpp"
#include "esat/extract.hpp"
#include "esat/zoo.hpp"
#include "support/random_egraph.hpp"

namespace {

using namespace esat;

struct Resblock {
  EGraph g;
  NodeCosts costs;
  explicit Resblock(int k) : g(graph_to_egraph(resblock_stack(k))) {
    costs = TensorCostModel(CostModelConfig::unit(), nullptr).node_costs(g);
  }
};

void BM_ExactResblock(benchmark::State& state) {
  const Resblock r(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(extract_exact(r.g, r.costs).total_cost);
}
BENCHMARK(BM_ExactResblock)->DenseRange(2, 12, 2);

void BM_OcfResblock(benchmark::State& state) {
  const Resblock r(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(extract_ocf_greedy(r.g, r.costs).total_cost);
}
BENCHMARK(BM_OcfResblock)->DenseRange(2, 12, 2);

void BM_DefaultResblock(benchmark::State& state) {
  const Resblock r(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(extract_default_greedy(r.g, r.costs).total_cost);
  }
}
BENCHMARK(BM_DefaultResblock)->DenseRange(2, 12, 2);

void BM_ExactRandom(benchmark::State& state) {
  std::vector<testing::RandomInstance> pool;
  for (std::uint64_t s = 0; s < 64; ++s) pool.push_back(testing::random_instance(s));
  std::size_t i = 0;
  for (auto _ : state) {
    const auto& inst = pool[i++ % pool.size()];
    benchmark::DoNotOptimize(extract_exact(inst.g, inst.costs).total_cost);
  }
}
BENCHMARK(BM_ExactRandom);

void BM_OracleRandom(benchmark::State& state) {
  std::vector<testing::RandomInstance> pool;
  for (std::uint64_t s = 0; s < 64; ++s) pool.push_back(testing::random_instance(s));
  std::size_t i = 0;
  for (auto _ : state) {
    const auto& inst = pool[i++ % pool.size()];
    benchmark::DoNotOptimize(brute_force_oracle(inst.g, inst.costs).total_cost);
  }
}
BENCHMARK(BM_OracleRandom);

}  // namespace

BENCHMARK_MAIN();
