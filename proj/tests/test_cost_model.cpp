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

#include <doctest.h>

#include <algorithm>
#include <random>
#include <thread>

#include "esat/cost_model.hpp"
#include "esat/error.hpp"
#include "esat/extract.hpp"
#include "esat/zoo.hpp"

using namespace esat;

namespace {

TensorShape shape(std::vector<std::int64_t> dims) { return TensorShape{std::move(dims)}; }

CostModelConfig bare_analytic() {
  auto c = CostModelConfig::analytic();
  c.launch_overhead = 0.0;
  return c;
}

// Independent work formulas for the analytic mode.
double matmul_flops(std::int64_t m, std::int64_t k, std::int64_t n) {
  return 2.0 * static_cast<double>(m * k * n);
}

double conv_flops(std::int64_t n, std::int64_t c, std::int64_t kh, std::int64_t kw,
                  std::int64_t ho, std::int64_t wo, std::int64_t o) {
  return 2.0 * static_cast<double>(n * c * kh * kw * ho * wo * o);
}

// A permuted copy of `g`: weights first in reverse, then operators.
TensorGraph permuted(const TensorGraph& g) {
  TensorGraph out;
  std::vector<int> map(g.size(), -1);
  for (auto it = g.nodes().rbegin(); it != g.nodes().rend(); ++it) {
    if (it->kind.is_leaf()) map[it->id] = out.add_leaf(it->kind, it->shape);
  }
  for (const auto& n : g.nodes()) {
    if (n.kind.is_leaf()) continue;
    std::vector<int> in;
    for (int k : n.inputs) in.push_back(map[k]);
    map[n.id] = out.add(n.kind, in);
  }
  for (int o : g.outputs()) out.add_output(map[o]);
  return out;
}

}  // namespace

TEST_CASE("unit mode") {
  const auto unit = CostModelConfig::unit();
  CostCache cache;
  const std::vector in = {shape({1, 16, 8, 8}), shape({16, 16, 3, 3})};
  CHECK(operator_cost(unit, cache, TensorOpKind::conv2d(1, Padding::Same), in) == 1.0);
  CHECK(operator_cost(unit, cache, TensorOpKind::weight(0), {}) == 0.0);
  CHECK(operator_cost(unit, cache, TensorOpKind::input(0), {}) == 0.0);
  CHECK(operator_cost(unit, cache, TensorOpKind::simple(OpType::Noop),
                      std::vector{shape({2}), shape({2})}) == 0.0);
  for (int k = 1; k <= 6; ++k) {
    CHECK(graph_cost(unit, cache, resblock_stack(k)) == 3.0 * k + 1.0);
  }
}

TEST_CASE("analytic formulas") {
  const auto cfg = bare_analytic();
  CostCache cache;
  const double mm = operator_cost(cfg, cache, TensorOpKind::simple(OpType::Matmul),
                                  std::vector{shape({8, 16}), shape({16, 32})});
  CHECK(mm == doctest::Approx(8.192e-6).epsilon(1e-12));
  CHECK(mm == doctest::Approx(matmul_flops(8, 16, 32) * 1e-9));

  const double conv = operator_cost(cfg, cache, TensorOpKind::conv2d(1, Padding::Same),
                                    std::vector{shape({1, 16, 8, 8}), shape({32, 16, 3, 3})});
  CHECK(conv == doctest::Approx(conv_flops(1, 16, 3, 3, 8, 8, 32) * 1e-9));

  const double relu = operator_cost(cfg, cache, TensorOpKind::simple(OpType::Relu),
                                    std::vector{shape({4, 5, 6})});
  CHECK(relu == doctest::Approx(120 * 1e-9));
  const double cat = operator_cost(cfg, cache, TensorOpKind::concat(0),
                                   std::vector{shape({4, 5}), shape({6, 5})});
  CHECK(cat == doctest::Approx(50 * 1e-9));
  CHECK(operator_cost(cfg, cache, TensorOpKind::split(0, 0, 2), std::vector{shape({4, 5})}) ==
        0.0);

  auto with_launch = CostModelConfig::analytic();
  CostCache fresh;
  CHECK(operator_cost(with_launch, fresh, TensorOpKind::simple(OpType::Relu),
                      std::vector{shape({4, 5, 6})}) ==
        doctest::Approx(with_launch.launch_overhead + 120 * 1e-9));

  auto custom = bare_analytic();
  custom.coefficients[OpType::Matmul] = 2e-9;
  CostCache c2;
  CHECK(operator_cost(custom, c2, TensorOpKind::simple(OpType::Matmul),
                      std::vector{shape({8, 16}), shape({16, 32})}) ==
        doctest::Approx(2 * mm));
}

TEST_CASE("shape mismatches propagate") {
  CostCache cache;
  CHECK_THROWS_AS(operator_cost(CostModelConfig::analytic(), cache,
                                TensorOpKind::simple(OpType::Matmul),
                                std::vector{shape({8, 16}), shape({8, 16})}),
                  ShapeError);
  CHECK_THROWS_AS(operator_cost(CostModelConfig::unit(), cache,
                                TensorOpKind::simple(OpType::Matmul),
                                std::vector{shape({8, 16}), shape({8, 16})}),
                  ShapeError);
}

TEST_CASE("noise is frozen per signature") {
  auto cfg = bare_analytic();
  cfg.noise_stddev = 0.05;
  cfg.seed = 42;
  CostCache cache;
  const std::vector in = {shape({8, 16}), shape({16, 32})};
  const auto mm = TensorOpKind::simple(OpType::Matmul);
  const double first = operator_cost(cfg, cache, mm, in);
  CHECK(first != doctest::Approx(8.192e-6).epsilon(1e-9));
  CHECK(operator_cost(cfg, cache, mm, in) == first);
  CHECK(cache.op_entries() == 1);

  // Same seed, new cache: same value. Different seed: different value.
  CostCache again;
  CHECK(operator_cost(cfg, again, mm, in) == first);
  cfg.seed = 43;
  CostCache other;
  CHECK(operator_cost(cfg, other, mm, in) != first);
}

TEST_CASE("first stored value wins") {
  CostCache cache;
  CHECK(cache.put_op("k", 1.0) == 1.0);
  CHECK(cache.put_op("k", 2.0) == 1.0);
  CHECK(cache.op("k") == 1.0);
  CHECK_FALSE(cache.egraph(7, 0).has_value());
  CHECK(cache.put_egraph(7, 0, 3.0) == 3.0);
  CHECK(cache.put_egraph(7, 0, 4.0) == 3.0);
  CHECK(cache.egraph(7, 0) == 3.0);
  CHECK(cache.egraph_hits() == 1);
  CHECK(cache.egraph_entries() == 1);
}

TEST_CASE("concurrent inserts agree") {
  CostCache cache;
  std::vector<std::thread> threads;
  std::vector<double> seen(8);
  for (int t = 0; t < 8; ++t) {
    threads.emplace_back([&, t] { seen[t] = cache.put_op("shared", t + 1.0); });
  }
  for (auto& th : threads) th.join();
  CHECK(std::all_of(seen.begin(), seen.end(), [&](double v) { return v == seen[0]; }));
  CHECK(cache.op_entries() == 1);
}

TEST_CASE("graph cost properties") {
  const auto cfg = CostModelConfig::analytic();
  for (const auto& g : {resblock_stack(2), mlp(2, 16), attention_block(16, 2),
                        inception_cell(3)}) {
    CostCache cache;
    const double base = graph_cost(cfg, cache, g);
    CHECK(base > 0.0);
    CHECK(graph_cost(cfg, cache, permuted(g)) == doctest::Approx(base));

    // A second reference to a shared node adds nothing.
    TensorGraph shared = g;
    const int out = shared.outputs().front();
    shared.set_outputs({out, out});
    CHECK(graph_cost(cfg, cache, shared) == doctest::Approx(base));

    // A positive-cost node strictly increases the total.
    TensorGraph more = g;
    more.set_outputs({more.add(TensorOpKind::simple(OpType::Relu), {out})});
    CHECK(graph_cost(cfg, cache, more) > base);

    // The e-graph costs of the initial program give the same total.
    const EGraph e = graph_to_egraph(g);
    TensorCostModel model(cfg, std::make_shared<CostCache>());
    const auto r = extract_exact(e, model.node_costs(e));
    CHECK(r.total_cost == doctest::Approx(base));
  }
}

TEST_CASE("sink-only graph costs nothing") {
  TensorGraph g;
  const auto x = g.add_input(shape({4}));
  const auto y = g.add_input(shape({4}));
  g.set_outputs({x, y});
  CostCache cache;
  CHECK(graph_cost(CostModelConfig::analytic(), cache, g) == 0.0);
  const EGraph e = graph_to_egraph(g);
  TensorCostModel model(CostModelConfig::analytic(), nullptr);
  CHECK(extract_exact(e, model.node_costs(e)).total_cost == 0.0);
}

TEST_CASE("operators on weights alone fold to zero") {
  TensorGraph g;
  const auto x = g.add_input(shape({8, 16}));
  const auto w = g.add_weight(shape({16, 16}));
  const auto v = g.add_weight(shape({16, 16}));
  const auto wv = g.add(TensorOpKind::simple(OpType::Matmul), {w, v});
  g.add_output(g.add(TensorOpKind::simple(OpType::Matmul), {x, wv}));
  auto cfg = bare_analytic();
  CostCache cache;
  CHECK(graph_cost(cfg, cache, g) == doctest::Approx(matmul_flops(8, 16, 16) * 1e-9));
  cfg.fold_constants = false;
  CHECK(graph_cost(cfg, cache, g) ==
        doctest::Approx((matmul_flops(8, 16, 16) + matmul_flops(16, 16, 16)) * 1e-9));
}

TEST_CASE("config parsing") {
  const auto c = parse_cost_config(R"({"mode":"unit","coefficients":{"matmul":3e-9},
      "noise_stddev":0.1,"seed":9,"launch_overhead":0,"fold_constants":false})");
  CHECK(c.mode == CostMode::Unit);
  CHECK(c.coefficient(OpType::Matmul) == 3e-9);
  CHECK(c.coefficient(OpType::Relu) == 1e-9);
  CHECK(c.noise_stddev == 0.1);
  CHECK(c.seed == 9);
  CHECK(c.launch_overhead == 0.0);
  CHECK_FALSE(c.fold_constants);
  CHECK(cost_mode_name(c.mode) == "unit");

  CHECK_THROWS_AS(parse_cost_config("{"), ConfigError);
  CHECK_THROWS_AS(parse_cost_config(R"({"mode":"fast"})"), ConfigError);
  CHECK_THROWS_AS(parse_cost_config(R"({"coefficients":{"softmax":1}})"), ConfigError);
  CHECK_THROWS_AS(parse_cost_config(R"({"coefficients":{"relu":-1}})"), ConfigError);
  CHECK_THROWS_AS(parse_cost_config(R"({"noise_stddev":"x"})"), ConfigError);
  CHECK_THROWS_AS(load_cost_config("/nonexistent/cost.json"), ConfigError);
}

TEST_CASE("node costs are a pure function without noise") {
  const EGraph e = graph_to_egraph(attention_block(16, 2));
  TensorCostModel a(CostModelConfig::analytic(), nullptr);
  TensorCostModel b(CostModelConfig::analytic(), nullptr);
  CHECK(a.node_costs(e) == b.node_costs(e));
}
