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

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "esat/driver.hpp"
#include "esat/error.hpp"
#include "esat/zoo.hpp"
#include "json.hpp"

using namespace esat;
namespace fs = std::filesystem;

namespace {

std::vector<Rule> rules_from(const char* file) {
  return load_rules(fs::path(ESAT_RULES_DIR) / file);
}

RunConfig toy_config(Builder builder, std::size_t limit) {
  RunConfig cfg;
  cfg.builder = builder;
  cfg.mcts.budget = 64;
  cfg.mcts.node_limit = limit;
  return cfg;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::size_t count_lines(const std::string& text) {
  return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

}  // namespace

TEST_CASE("builder names") {
  CHECK(parse_builder("mcts") == Builder::Mcts);
  CHECK(parse_builder("sequential") == Builder::Sequential);
  CHECK_FALSE(parse_builder("greedy").has_value());
  CHECK(builder_name(Builder::Sequential) == "sequential");
}

TEST_CASE("run configuration checks") {
  RunConfig cfg;
  cfg.k_multi = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  const auto w = toy_workload();
  const auto rules = rules_from("toy_bad.rules");
  cfg.builder = Builder::Sequential;
  CHECK_THROWS_AS(optimize(w, rules, cfg), ConfigError);
  RunConfig bad_budget;
  bad_budget.mcts.budget = 0;
  CHECK_THROWS_AS(optimize(w, rules, bad_budget), ConfigError);
}

TEST_CASE("workloads") {
  const auto toy = toy_workload();
  CHECK(toy.egraph.size() == GraphSize{4, 4});
  CHECK_FALSE(toy.graph.has_value());
  CHECK(load_workload("toy_expr", CostModelConfig::unit()).egraph.size() == GraphSize{4, 4});

  const auto res = load_workload("zoo:resblock_stack(2)", CostModelConfig::unit());
  REQUIRE(res.graph.has_value());
  CHECK(res.graph->size() == 12);
  CHECK(res.language == &tensor_language());

  const auto path = fs::temp_directory_path() / "esat_driver_graph.json";
  save_graph(mlp(1, 8), path);
  CHECK(load_workload(path.string(), CostModelConfig::unit()).graph->size() == 6);
  fs::remove(path);
  CHECK_THROWS_AS(load_workload("zoo:nope", CostModelConfig::unit()), ConfigError);
  CHECK_THROWS_AS(load_workload("/nonexistent.json", CostModelConfig::unit()), ConfigError);
}

TEST_CASE("sequential toy runs follow the rule order") {
  const auto w = toy_workload();
  const auto bad = rules_from("toy_bad.rules");
  const auto good = rules_from("toy_good.rules");

  const auto stuck = optimize_sequential(w, bad, toy_config(Builder::Sequential, 10));
  CHECK(stuck.original_cost == 4.0);
  CHECK(stuck.optimized_cost > 1.0);
  CHECK(stuck.stop_reason == "node_limit");

  const auto roomy = optimize_sequential(w, bad, toy_config(Builder::Sequential, 18));
  CHECK(roomy.optimized_cost == 1.0);
  CHECK(roomy.optimized_term == "a");

  const auto ordered = optimize_sequential(w, good, toy_config(Builder::Sequential, 10));
  CHECK(ordered.optimized_cost == 1.0);
}

TEST_CASE("mcts reaches the optimum within the small limit") {
  const auto w = toy_workload();
  const auto bad = rules_from("toy_bad.rules");
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    auto cfg = toy_config(Builder::Mcts, 10);
    cfg.mcts.seed = seed;
    const auto r = optimize_mcts(w, bad, cfg);
    CHECK(r.optimized_cost == 1.0);
    CHECK(r.final_size.enodes <= 10 + 8);
    CHECK(r.optimal);
  }
}

TEST_CASE("the hook sees every changed application") {
  const auto w = toy_workload();
  const auto bad = rules_from("toy_bad.rules");
  std::vector<int> seen;
  const auto r = optimize_sequential(w, bad, toy_config(Builder::Sequential, 18),
                                     [&](const EGraph&, int rule) { seen.push_back(rule); });
  REQUIRE(seen.size() == r.iterations.size());
  std::size_t total = 0;
  for (std::size_t i = 0; i < seen.size(); ++i) {
    CHECK(r.iterations[i].rule_id == seen[i]);
    CHECK(r.iterations[i].iteration == static_cast<int>(i));
  }
  for (const auto& [rule, count] : r.rule_histogram) total += count;
  CHECK(total == seen.size());
}

TEST_CASE("report arithmetic") {
  const auto w = toy_workload();
  const auto r = optimize(w, rules_from("toy_good.rules"), toy_config(Builder::Mcts, 10));
  CHECK(r.speedup_pct ==
        doctest::Approx((r.original_cost - r.optimized_cost) / r.original_cost * 100).epsilon(1e-9));
  CHECK(r.speedup_pct == doctest::Approx(75.0));
  CHECK(r.model == "toy_expr");
  CHECK(r.final_egraph.size() == r.final_size);
}

TEST_CASE("never worse on a tensor model") {
  const auto w = load_workload("zoo:resblock_stack(3)", CostModelConfig::unit());
  const auto rules = rules_from("tensor_default.rules");
  for (auto builder : {Builder::Mcts, Builder::Sequential}) {
    RunConfig cfg;
    cfg.builder = builder;
    cfg.mcts.budget = 8;
    cfg.mcts.max_sim_steps = 3;
    cfg.mcts.node_limit = 200;
    const auto r = optimize(w, rules, cfg);
    CHECK(r.original_cost == 10.0);
    CHECK(r.optimized_cost <= r.original_cost);
    CHECK_NOTHROW(validate_extraction(r.final_egraph, r.extraction));
  }
}

TEST_CASE("original selection tracks the input program") {
  const auto w = load_workload("zoo:mlp(2,8)", CostModelConfig::unit());
  EGraph g = w.egraph;
  apply_rule(g, parse_rule("(relu ?x) => (relu (relu ?x))"), 0, tensor_language());
  const auto sel = original_selection(w.egraph, g);
  REQUIRE_FALSE(sel.empty());
  const auto costs = w.cost_model->node_costs(g);
  CHECK(dag_cost(g, costs, sel) == dag_cost(w.egraph, w.cost_model->node_costs(w.egraph),
                                            extract_exact(w.egraph, w.cost_model->node_costs(w.egraph)).chosen));
}

TEST_CASE("reruns are byte-identical") {
  const auto w = toy_workload();
  const auto bad = rules_from("toy_bad.rules");
  auto cfg = toy_config(Builder::Mcts, 12);
  cfg.mcts.seed = 4;
  const auto a = optimize(w, bad, cfg);
  const auto b = optimize(w, bad, cfg);
  CHECK(report_json(a) == report_json(b));
  CHECK(trace_csv(a) == trace_csv(b));
  CHECK(heatmap_csv(a) == heatmap_csv(b));
}

TEST_CASE("trace files") {
  const auto w = toy_workload();
  const auto r = optimize(w, rules_from("toy_bad.rules"), toy_config(Builder::Mcts, 10));
  const auto dir = fs::temp_directory_path() / "esat_driver_traces";
  fs::remove_all(dir);
  emit_traces(r, dir);
  const auto trace = slurp(dir / "trace.csv");
  CHECK(trace.rfind("iteration,rule_id,nodes,classes,extracted_cost\n", 0) == 0);
  CHECK(count_lines(trace) == r.iterations.size() + 1);

  const auto heat = slurp(dir / "heatmap.csv");
  std::istringstream in(heat);
  std::string line;
  std::getline(in, line);
  CHECK(line == "rule_id,count");
  std::size_t sum = 0;
  while (std::getline(in, line)) sum += std::stoul(line.substr(line.find(',') + 1));
  CHECK(sum == r.iterations.size());

  const auto doc = nlohmann::json::parse(slurp(dir / "report.json"));
  CHECK(doc["optimized_cost"].get<double>() == r.optimized_cost);
  CHECK(doc["original_cost"].get<double>() == r.original_cost);
  CHECK_FALSE(doc.contains("wall_time_s"));

  emit_traces(r, dir);
  CHECK(slurp(dir / "trace.csv") == trace);
  fs::remove_all(dir);
}

TEST_CASE("extractor comparison") {
  const auto w = load_workload("zoo:resblock_stack(4)", CostModelConfig::unit());
  const auto rows = compare_extractors(w.egraph, w.cost_model->node_costs(w.egraph));
  REQUIRE(rows.size() == 3);
  std::map<ExtractorKind, double> cost;
  for (const auto& r : rows) {
    CHECK(r.error.empty());
    cost[r.kind] = r.cost;
  }
  CHECK(cost[ExtractorKind::Exact] == 13.0);
  CHECK(cost[ExtractorKind::OcfGreedy] == 13.0);
  CHECK(cost[ExtractorKind::DefaultGreedy] == 61.0);

  std::ostringstream csv;
  write_comparison_csv(rows, csv);
  CHECK(count_lines(csv.str()) == 4);
  const auto table = comparison_table(rows);
  CHECK(table.find("61") != std::string::npos);
}

TEST_CASE("forbidden operators") {
  const auto w = load_workload("zoo:resblock_stack(1)", CostModelConfig::unit());
  const auto rules = rules_from("tensor_default.rules");
  RunConfig cfg;
  cfg.mcts.budget = 4;
  cfg.mcts.max_sim_steps = 2;
  cfg.forbidden_ops = {"relu"};
  CHECK_THROWS_AS(optimize(w, rules, cfg), InfeasibleError);

  cfg.forbidden_ops = {"maxpool"};
  CHECK(optimize(w, rules, cfg).optimized_cost <= 4.0);

  cfg.final_extractor = ExtractorKind::OcfGreedy;
  CHECK_THROWS_AS(optimize(w, rules, cfg), ConfigError);
}
