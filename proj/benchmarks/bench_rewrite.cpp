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

#include "esat/pattern.hpp"
#include "esat/rewrite.hpp"
#include "esat/tensor.hpp"
#include "esat/zoo.hpp"

namespace {

using namespace esat;

const std::vector<Rule>& tensor_rules() {
  static const auto rules =
      load_rules(std::filesystem::path(ESAT_RULES_DIR) / "tensor_default.rules");
  return rules;
}

EGraph grown_attention(int passes) {
  EGraph g = graph_to_egraph(attention_block(32, 2));
  for (int p = 0; p < passes; ++p) {
    for (const auto& r : tensor_rules()) apply_rule(g, r, 2000, tensor_language());
  }
  return g;
}

void BM_EmatchAll(benchmark::State& state) {
  const EGraph g = grown_attention(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    std::size_t n = 0;
    for (const auto& r : tensor_rules()) {
      for (const auto& p : r.sources) n += ematch(g, p).size();
    }
    benchmark::DoNotOptimize(n);
  }
  state.counters["enodes"] = static_cast<double>(g.size().enodes);
}
BENCHMARK(BM_EmatchAll)->Arg(0)->Arg(1)->Arg(2);

void BM_ApplyPass(benchmark::State& state) {
  const EGraph base = grown_attention(0);
  for (auto _ : state) {
    EGraph g = base;
    for (const auto& r : tensor_rules()) apply_rule(g, r, 2000, tensor_language());
    benchmark::DoNotOptimize(g.size().enodes);
  }
}
BENCHMARK(BM_ApplyPass);

void BM_Fingerprint(benchmark::State& state) {
  const EGraph g = grown_attention(2);
  for (auto _ : state) benchmark::DoNotOptimize(g.fingerprint());
}
BENCHMARK(BM_Fingerprint);

}  // namespace

BENCHMARK_MAIN();
