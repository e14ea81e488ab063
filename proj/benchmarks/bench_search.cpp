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

#include <filesystem>

#include "esat/driver.hpp"

namespace {

using namespace esat;

std::vector<Rule> rules_from(const char* file) {
  return load_rules(std::filesystem::path(ESAT_RULES_DIR) / file);
}

void BM_ToyMcts(benchmark::State& state) {
  const auto w = toy_workload();
  const auto rules = rules_from("toy_bad.rules");
  RunConfig cfg;
  cfg.mcts.budget = static_cast<int>(state.range(0));
  cfg.mcts.node_limit = 10;
  for (auto _ : state) benchmark::DoNotOptimize(optimize(w, rules, cfg).optimized_cost);
}
BENCHMARK(BM_ToyMcts)->Arg(16)->Arg(64);

void BM_Resblock(benchmark::State& state) {
  const auto w = load_workload("zoo:resblock_stack(2)", CostModelConfig::analytic());
  const auto rules = rules_from("tensor_default.rules");
  RunConfig cfg;
  cfg.builder = state.range(0) ? Builder::Mcts : Builder::Sequential;
  cfg.mcts.budget = 16;
  cfg.mcts.max_sim_steps = 4;
  cfg.mcts.node_limit = 400;
  for (auto _ : state) benchmark::DoNotOptimize(optimize(w, rules, cfg).optimized_cost);
  state.SetLabel(state.range(0) ? "mcts" : "sequential");
}
BENCHMARK(BM_Resblock)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
