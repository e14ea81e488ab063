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

#include "esat/driver.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <chrono>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "esat/error.hpp"
#include "esat/zoo.hpp"

namespace esat {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) return "nan";
  return std::string(buf, end);
}

bool at_limit(const EGraph& g, std::size_t limit) {
  return limit > 0 && g.size().enodes >= limit;
}

void check_rule_ids(std::span<const Rule> rules) {
  for (std::size_t i = 0; i < rules.size(); ++i) {
    if (rules[i].id != static_cast<int>(i)) {
      throw ConfigError("rule ids must be consecutive from 0");
    }
  }
}

// Exact cost of the unmodified program: one e-node per class, so the
// search is trivial whatever the size.
double program_cost(const Workload& w) {
  const NodeCosts costs = w.cost_model->node_costs(w.egraph);
  ExactOptions options;
  options.max_enodes = std::numeric_limits<std::size_t>::max();
  const auto r = extract_exact(w.egraph, costs, options);
  return dag_cost(w.egraph, costs, r.chosen);
}

class Recorder {
 public:
  Recorder(const Workload& w, ExtractorKind main, RunReport& report,
           const ApplyHook& hook)
      : evaluator_(*w.cost_model, w.cache, main), report_(report), hook_(hook) {}

  void applied(const EGraph& g, int rule) {
    IterationRecord rec;
    rec.iteration = static_cast<int>(report_.iterations.size());
    rec.rule_id = rule;
    rec.nodes = g.size().enodes;
    rec.classes = g.size().eclasses;
    rec.extracted_cost = evaluator_.cost(g);
    report_.iterations.push_back(rec);
    report_.rule_histogram[rule] += 1;
    if (hook_) hook_(g, rule);
  }

  const CostEvaluator& evaluator() const { return evaluator_; }

 private:
  CostEvaluator evaluator_;
  RunReport& report_;
  const ApplyHook& hook_;
};

void finish(const Workload& w, const RunConfig& config, EGraph g,
            RunReport& report) {
  report.final_size = g.size();
  const NodeCosts costs = w.cost_model->node_costs(g);
  try {
    if (config.final_extractor == ExtractorKind::Exact) {
      ExactOptions options = config.exact;
      for (auto c : g.class_ids()) {
        for (const auto& n : g.nodes(c)) {
          if (config.forbidden_ops.count(n.symbol.name)) options.blacklist.insert(n);
        }
      }
      auto seed = original_selection(w.egraph, g);
      if (!seed.empty()) options.seeds.push_back(std::move(seed));
      report.extraction = extract_exact(g, costs, options);
    } else {
      report.extraction = extract(config.final_extractor, g, costs);
    }
  } catch (const InfeasibleError& e) {
    throw InfeasibleError("final extraction after iteration " +
                          std::to_string(report.iterations.size()) + ": " +
                          e.what());
  }
  report.optimal = report.extraction.optimal;
  report.optimized_cost = dag_cost(g, costs, report.extraction.chosen);
  report.optimized_term = extraction_to_term(g, report.extraction);
  report.speedup_pct =
      report.original_cost != 0.0
          ? (report.original_cost - report.optimized_cost) / report.original_cost * 100.0
          : 0.0;
  report.final_egraph = std::move(g);
}

RunReport start_report(const Workload& w, const RunConfig& config) {
  config.validate();
  if (!w.cost_model) throw ConfigError("workload has no cost model");
  RunReport report;
  report.model = w.name;
  report.builder = config.builder;
  report.final_extractor = config.final_extractor;
  report.seed = config.mcts.seed;
  report.original_cost = program_cost(w);
  return report;
}

}  // namespace

Workload tensor_workload(std::string name, const TensorGraph& graph,
                         const CostModelConfig& costs) {
  costs.validate();
  Workload w;
  w.name = std::move(name);
  w.egraph = graph_to_egraph(graph);
  w.language = &tensor_language();
  w.cache = std::make_shared<CostCache>();
  w.cost_model = std::make_shared<TensorCostModel>(costs, w.cache);
  w.graph = graph;
  return w;
}

Workload toy_workload() {
  Workload w;
  w.name = "toy_expr";
  w.egraph = toy_expr_egraph();
  w.language = &generic_language();
  w.cache = std::make_shared<CostCache>();
  w.cost_model = std::make_shared<SymbolCostModel>(1.0);
  return w;
}

Workload load_workload(std::string_view model, const CostModelConfig& costs) {
  const bool zoo_prefix = model.starts_with("zoo:");
  if (zoo_prefix || model.find_first_of("/.") == std::string_view::npos) {
    const ModelSpec spec = parse_model_spec(model);
    if (spec.name == "toy_expr") return toy_workload();
    const auto names = zoo_tensor_models();
    if (std::find(names.begin(), names.end(), spec.name) == names.end()) {
      throw ConfigError("unknown zoo model '" + spec.name + "'");
    }
    return tensor_workload(std::string(model), zoo_generate(spec), costs);
  }
  return tensor_workload(std::string(model),
                         load_graph(std::filesystem::path(std::string(model))),
                         costs);
}

std::map<EClassId, ENode> original_selection(const EGraph& initial,
                                             const EGraph& g) {
  std::map<EClassId, ENode> out;
  for (auto c : initial.class_ids()) {
    for (const auto& n : initial.nodes(c)) {
      ENode mapped = n;
      for (auto& k : mapped.children) k = g.find(k);
      const auto [it, fresh] = out.emplace(g.find(c), mapped);
      if (!fresh && it->second != mapped) return {};
    }
  }
  return out;
}

ExactOptions RunConfig::default_final_exact_options() {
  ExactOptions o;
  o.max_enodes = 200000;
  o.max_search_nodes = 2000000;
  o.return_incumbent = true;
  return o;
}

std::string_view builder_name(Builder builder) {
  return builder == Builder::Mcts ? "mcts" : "sequential";
}

std::optional<Builder> parse_builder(std::string_view name) {
  if (name == "mcts") return Builder::Mcts;
  if (name == "sequential") return Builder::Sequential;
  return std::nullopt;
}

void RunConfig::validate() const {
  if (k_multi < 1) throw ConfigError("k_multi must be at least 1");
  if (max_iterations < 1) throw ConfigError("iteration cap must be at least 1");
  if (!forbidden_ops.empty() && final_extractor != ExtractorKind::Exact) {
    throw ConfigError("forbidden operators need the exact final extractor");
  }
  mcts.validate();
}

RunReport optimize_mcts(const Workload& w, std::span<const Rule> rules,
                        const RunConfig& config, const ApplyHook& hook,
                        SearchObserver* observer) {
  const auto start = Clock::now();
  check_rule_ids(rules);
  RunReport report = start_report(w, config);
  Recorder recorder(w, config.mcts.main_extractor, report, hook);
  const auto limit = config.mcts.node_limit;

  Mcts mcts(rules, *w.language, recorder.evaluator(), config.mcts);
  mcts.set_observer(observer);

  EGraph g = w.egraph.snapshot();
  g.rebuild();
  std::unique_ptr<SearchNode> root;
  for (int step = 0;; ++step) {
    if (at_limit(g, limit)) {
      report.stop_reason = "node_limit";
      break;
    }
    if (step >= config.max_iterations) {
      report.stop_reason = "iteration_cap";
      break;
    }
    if (is_saturated(g, rules, limit, *w.language)) {
      report.stop_reason = "saturated";
      break;
    }
    if (!root) root = Mcts::make_root(g.snapshot(), rules);
    SearchOutcome outcome = mcts.run(std::move(root));
    if (!outcome.best_rule) {
      report.stop_reason = "saturated";
      break;
    }
    const int rule = *outcome.best_rule;
    const auto applied =
        apply_rule(g, rules[static_cast<std::size_t>(rule)], limit, *w.language);
    if (applied.changed) recorder.applied(g, rule);
    if (config.mcts.reuse_subtree && applied.changed) {
      root = Mcts::take_child(outcome, rule);
    }
    if (applied.hit_node_limit) {
      report.stop_reason = "node_limit";
      break;
    }
  }

  finish(w, config, std::move(g), report);
  report.wall_time_s = seconds_since(start);
  return report;
}

RunReport optimize_sequential(const Workload& w, std::span<const Rule> rules,
                              const RunConfig& config, const ApplyHook& hook) {
  const auto start = Clock::now();
  check_rule_ids(rules);
  RunReport report = start_report(w, config);
  Recorder recorder(w, config.mcts.main_extractor, report, hook);
  const auto limit = config.mcts.node_limit;

  std::vector<int> multi, single;
  for (const auto& r : rules) {
    (r.kind() == RuleKind::Multi ? multi : single).push_back(r.id);
  }

  EGraph g = w.egraph.snapshot();
  g.rebuild();
  for (int pass = 0;; ++pass) {
    if (at_limit(g, limit)) {
      report.stop_reason = "node_limit";
      break;
    }
    if (pass >= config.max_iterations) {
      report.stop_reason = "iteration_cap";
      break;
    }
    std::vector<int> order;
    if (pass < config.k_multi) order = multi;
    order.insert(order.end(), single.begin(), single.end());

    bool changed = false;
    bool hit = false;
    for (int id : order) {
      const auto applied =
          apply_rule(g, rules[static_cast<std::size_t>(id)], limit, *w.language);
      if (applied.changed) {
        changed = true;
        recorder.applied(g, id);
      }
      if (applied.hit_node_limit) {
        hit = true;
        break;
      }
    }
    if (hit) {
      report.stop_reason = "node_limit";
      break;
    }
    if (!changed) {
      report.stop_reason = "saturated";
      break;
    }
  }

  finish(w, config, std::move(g), report);
  report.wall_time_s = seconds_since(start);
  return report;
}

RunReport optimize(const Workload& workload, std::span<const Rule> rules,
                   const RunConfig& config) {
  return config.builder == Builder::Mcts
             ? optimize_mcts(workload, rules, config)
             : optimize_sequential(workload, rules, config);
}

std::vector<ExtractorRow> compare_extractors(const EGraph& g,
                                             const NodeCosts& costs) {
  std::vector<ExtractorRow> rows;
  for (auto kind : {ExtractorKind::Exact, ExtractorKind::DefaultGreedy,
                    ExtractorKind::OcfGreedy}) {
    ExtractorRow row;
    row.kind = kind;
    const auto start = Clock::now();
    try {
      const auto r = extract(kind, g, costs);
      row.cost = r.total_cost;
      row.dag_cost = dag_cost(g, costs, r.chosen);
    } catch (const Error& e) {
      row.error = e.what();
    }
    row.wall_ms = seconds_since(start) * 1e3;
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_comparison_csv(std::span<const ExtractorRow> rows, std::ostream& out) {
  out << "extractor,cost,dag_cost,wall_ms,error\n";
  for (const auto& r : rows) {
    out << extractor_name(r.kind) << ',' << format_double(r.cost) << ','
        << format_double(r.dag_cost) << ',' << format_double(r.wall_ms) << ','
        << r.error << '\n';
  }
}

std::string comparison_table(std::span<const ExtractorRow> rows) {
  std::vector<std::vector<std::string>> cells = {
      {"extractor", "cost", "dag cost", "time (ms)"}};
  for (const auto& r : rows) {
    if (!r.error.empty()) {
      cells.push_back({std::string(extractor_name(r.kind)), "-", "-", r.error});
      continue;
    }
    char ms[32];
    std::snprintf(ms, sizeof ms, "%.3f", r.wall_ms);
    char cost[32], dag[32];
    std::snprintf(cost, sizeof cost, "%.6g", r.cost);
    std::snprintf(dag, sizeof dag, "%.6g", r.dag_cost);
    cells.push_back({std::string(extractor_name(r.kind)), cost, dag, ms});
  }
  std::vector<std::size_t> width(4, 0);
  for (const auto& row : cells) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      width[i] = std::max(width[i], row[i].size());
    }
  }
  std::ostringstream out;
  for (std::size_t r = 0; r < cells.size(); ++r) {
    for (std::size_t i = 0; i < cells[r].size(); ++i) {
      out << (i ? "  " : "") << cells[r][i]
          << std::string(width[i] - cells[r][i].size(), ' ');
    }
    out << '\n';
    if (r == 0) {
      std::size_t total = 0;
      for (auto w : width) total += w;
      out << std::string(total + 2 * (width.size() - 1), '-') << '\n';
    }
  }
  return out.str();
}

std::string trace_csv(const RunReport& report) {
  std::ostringstream out;
  out << "iteration,rule_id,nodes,classes,extracted_cost\n";
  for (const auto& it : report.iterations) {
    out << it.iteration << ',' << it.rule_id << ',' << it.nodes << ','
        << it.classes << ','
        << (it.extracted_cost ? format_double(*it.extracted_cost) : "") << '\n';
  }
  return out.str();
}

std::string heatmap_csv(const RunReport& report) {
  std::ostringstream out;
  out << "rule_id,count\n";
  for (const auto& [rule, count] : report.rule_histogram) {
    out << rule << ',' << count << '\n';
  }
  return out.str();
}

std::string report_json(const RunReport& report) {
  nlohmann::ordered_json j;
  j["model"] = report.model;
  j["builder"] = std::string(builder_name(report.builder));
  j["final_extractor"] = std::string(extractor_name(report.final_extractor));
  j["seed"] = report.seed;
  j["original_cost"] = report.original_cost;
  j["optimized_cost"] = report.optimized_cost;
  j["speedup_pct"] = report.speedup_pct;
  j["optimal"] = report.optimal;
  j["stop_reason"] = report.stop_reason;
  j["final_nodes"] = report.final_size.enodes;
  j["final_classes"] = report.final_size.eclasses;
  auto& iters = j["iterations"] = nlohmann::ordered_json::array();
  for (const auto& it : report.iterations) {
    nlohmann::ordered_json row;
    row["iteration"] = it.iteration;
    row["rule_id"] = it.rule_id;
    row["nodes"] = it.nodes;
    row["classes"] = it.classes;
    row["extracted_cost"] =
        it.extracted_cost ? nlohmann::ordered_json(*it.extracted_cost) : nullptr;
    iters.push_back(std::move(row));
  }
  auto& hist = j["rule_histogram"] = nlohmann::ordered_json::object();
  for (const auto& [rule, count] : report.rule_histogram) {
    hist[std::to_string(rule)] = count;
  }
  j["optimized_term"] = report.optimized_term;
  return j.dump(2) + "\n";
}

void emit_traces(const RunReport& report, const std::filesystem::path& outdir) {
  std::error_code ec;
  std::filesystem::create_directories(outdir, ec);
  if (ec) throw Error("cannot create " + outdir.string() + ": " + ec.message());
  auto write = [&](const char* name, const std::string& text) {
    const auto path = outdir / name;
    std::ofstream f(path, std::ios::binary);
    f << text;
    if (!f) throw Error("cannot write " + path.string());
  };
  write("trace.csv", trace_csv(report));
  write("heatmap.csv", heatmap_csv(report));
  write("report.json", report_json(report));
}

}  // namespace esat
