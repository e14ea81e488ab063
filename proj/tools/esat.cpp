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

// esat: tensor graph optimization by e-graph rewriting.
//
//   esat optimize --model zoo:resblock(3) --builder mcts --out run/
//   esat compare-extractors --model zoo:resblock(4) --cost-mode unit
//   esat export-ilp --model zoo:mlp --out model.lp
//
// Exit codes: 0 success, 2 invalid configuration or input, 3 infeasible
// extraction, 1 anything else.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "esat/cost_model.hpp"
#include "esat/driver.hpp"
#include "esat/error.hpp"
#include "esat/extract.hpp"
#include "esat/pattern.hpp"

namespace {

constexpr int kConfigExit = 2;
constexpr int kInfeasibleExit = 3;

struct CostOptions {
  std::string mode = "analytic";
  std::string config_path;
  double noise = 0.0;
  std::uint64_t seed = 0;
};

void add_cost_options(CLI::App* cmd, CostOptions& o) {
  cmd->add_option("--cost-mode", o.mode, "Operator cost model")
      ->check(CLI::IsMember({"unit", "analytic"}))
      ->capture_default_str();
  cmd->add_option("--cost-config", o.config_path,
                  "JSON cost configuration (overrides --cost-mode)")
      ->check(CLI::ExistingFile);
  cmd->add_option("--noise", o.noise, "Std. deviation of frozen cost noise")
      ->capture_default_str();
}

esat::CostModelConfig make_costs(const CostOptions& o) {
  esat::CostModelConfig c;
  if (!o.config_path.empty()) {
    c = esat::load_cost_config(o.config_path);
  } else {
    c = o.mode == "unit" ? esat::CostModelConfig::unit()
                         : esat::CostModelConfig::analytic();
    c.noise_stddev = o.noise;
  }
  c.seed = o.seed;
  c.validate();
  return c;
}

esat::ExtractorKind extractor_or_throw(const std::string& name) {
  auto kind = esat::parse_extractor(name);
  if (!kind) throw esat::ConfigError("unknown extractor '" + name + "'");
  return *kind;
}

std::filesystem::path default_rules(const esat::Workload& w) {
  const std::filesystem::path dir = ESAT_RULES_DIR;
  return dir / (w.graph ? "tensor_default.rules" : "toy_math.rules");
}

std::vector<esat::Rule> load_rules_for(const esat::Workload& w,
                                       const std::string& path) {
  return esat::load_rules(path.empty() ? default_rules(w)
                                       : std::filesystem::path(path));
}

// Grows the e-graph with the sequential builder when rules are given, so
// the extractors have alternatives to choose from.
esat::EGraph grown_egraph(const esat::Workload& w, const std::string& rules_path,
                          std::size_t node_limit, int passes) {
  if (rules_path.empty()) return w.egraph;
  const auto rules = esat::load_rules(rules_path);
  esat::EGraph g = w.egraph;
  g.rebuild();
  for (int pass = 0; pass < passes; ++pass) {
    bool changed = false;
    for (const auto& r : rules) {
      const auto rep = esat::apply_rule(g, r, node_limit, *w.language);
      changed = changed || rep.changed;
      if (rep.hit_node_limit) return g;
    }
    if (!changed) break;
  }
  return g;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tensor graph optimization with equality saturation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "esat 0.1.0");

  CostOptions costs;
  std::string model;
  std::string rules_path;
  std::string out;

  // optimize
  auto* opt = app.add_subcommand("optimize", "Rewrite and extract a model");
  esat::RunConfig run;
  std::string builder = "mcts";
  std::string main_extractor = "ocf";
  std::string final_extractor = "exact";
  bool no_reuse = false;
  opt->add_option("--model", model, "JSON graph path or zoo:name(args)")->required();
  opt->add_option("--rules", rules_path, "Rule file (default: bundled set)");
  opt->add_option("--builder", builder)
      ->check(CLI::IsMember({"mcts", "sequential"}))
      ->capture_default_str();
  opt->add_option("--budget", run.mcts.budget, "MCTS iterations per step")
      ->capture_default_str();
  opt->add_option("--node-limit", run.mcts.node_limit)->capture_default_str();
  opt->add_option("--sim-depth", run.mcts.max_sim_steps)->capture_default_str();
  opt->add_option("--exploration", run.mcts.exploration)->capture_default_str();
  opt->add_option("--stop-prob", run.mcts.stop_prob)->capture_default_str();
  opt->add_option("--main-extractor", main_extractor)
      ->check(CLI::IsMember({"ocf", "default", "exact"}))
      ->capture_default_str();
  opt->add_option("--final-extractor", final_extractor)
      ->check(CLI::IsMember({"ocf", "default", "exact"}))
      ->capture_default_str();
  opt->add_option("--k-multi", run.k_multi, "Sequential passes with multi rules")
      ->capture_default_str();
  opt->add_option("--max-iterations", run.max_iterations)->capture_default_str();
  opt->add_flag("--no-reuse", no_reuse, "Rebuild the search tree every step");
  std::vector<std::string> forbid;
  opt->add_option("--forbid", forbid,
                  "Operator the final exact extraction must not select (repeatable)");
  opt->add_option("--seed", costs.seed)->capture_default_str();
  opt->add_option("--out", out, "Directory for trace.csv, heatmap.csv, report.json");
  add_cost_options(opt, costs);

  // compare-extractors
  auto* cmp = app.add_subcommand("compare-extractors",
                                 "Compare exact, default and OCF extraction");
  std::string csv_path;
  std::size_t grow_limit = 0;
  int grow_passes = 1;
  cmp->add_option("--model", model)->required();
  cmp->add_option("--rules", rules_path, "Grow the e-graph with these rules first");
  cmp->add_option("--node-limit", grow_limit, "Node limit while growing")
      ->capture_default_str();
  cmp->add_option("--passes", grow_passes, "Rule passes while growing")
      ->capture_default_str();
  cmp->add_option("--csv", csv_path, "Also write the table as CSV");
  cmp->add_option("--seed", costs.seed)->capture_default_str();
  add_cost_options(cmp, costs);

  // export-ilp
  auto* ilp = app.add_subcommand("export-ilp", "Write the extraction ILP");
  ilp->add_option("--model", model)->required();
  ilp->add_option("--out", out, "Output .lp file")->required();
  ilp->add_option("--rules", rules_path, "Grow the e-graph with these rules first");
  ilp->add_option("--node-limit", grow_limit)->capture_default_str();
  ilp->add_option("--passes", grow_passes)->capture_default_str();
  ilp->add_option("--seed", costs.seed)->capture_default_str();
  add_cost_options(ilp, costs);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigExit;
  }

  try {
    const auto workload = esat::load_workload(model, make_costs(costs));

    if (*opt) {
      run.builder = *esat::parse_builder(builder);
      run.mcts.seed = costs.seed;
      run.mcts.main_extractor = extractor_or_throw(main_extractor);
      run.mcts.reuse_subtree = !no_reuse;
      run.forbidden_ops = {forbid.begin(), forbid.end()};
      run.final_extractor = extractor_or_throw(final_extractor);
      const auto rules = load_rules_for(workload, rules_path);
      const auto report = esat::optimize(workload, rules, run);
      std::printf("model            %s\n", report.model.c_str());
      std::printf("builder          %s\n",
                  std::string(esat::builder_name(report.builder)).c_str());
      std::printf("original cost    %.9g\n", report.original_cost);
      std::printf("optimized cost   %.9g\n", report.optimized_cost);
      std::printf("speedup          %.3f%%\n", report.speedup_pct);
      std::printf("rules applied    %zu\n", report.iterations.size());
      std::printf("e-graph          %zu nodes, %zu classes (%s)\n",
                  report.final_size.enodes, report.final_size.eclasses,
                  report.stop_reason.c_str());
      std::printf("wall time        %.3f s\n", report.wall_time_s);
      if (!out.empty()) {
        esat::emit_traces(report, out);
        if (workload.graph) {
          esat::save_graph(esat::extraction_to_graph(report.final_egraph,
                                                     report.extraction.chosen),
                           std::filesystem::path(out) / "optimized.json");
        }
      }
      return 0;
    }

    const esat::EGraph g = grown_egraph(workload, rules_path, grow_limit, grow_passes);
    const auto node_costs = workload.cost_model->node_costs(g);

    if (*cmp) {
      const auto rows = esat::compare_extractors(g, node_costs);
      std::printf("%s: %zu e-nodes, %zu e-classes\n\n", workload.name.c_str(),
                  g.size().enodes, g.size().eclasses);
      std::cout << esat::comparison_table(rows);
      if (!csv_path.empty()) {
        std::ofstream f(csv_path);
        esat::write_comparison_csv(rows, f);
        if (!f) throw esat::Error("cannot write " + csv_path);
      }
      return 0;
    }

    esat::export_ilp(g, node_costs, std::filesystem::path(out));
    std::printf("wrote %s (%zu constraints)\n", out.c_str(),
                esat::ilp_constraint_count(g));
    return 0;
  } catch (const esat::InfeasibleError& e) {
    std::fprintf(stderr, "esat: infeasible: %s\n", e.what());
    return kInfeasibleExit;
  } catch (const esat::ConfigError& e) {
    std::fprintf(stderr, "esat: %s\n", e.what());
    return kConfigExit;
  } catch (const esat::ParseError& e) {
    std::fprintf(stderr, "esat: %s\n", e.what());
    return kConfigExit;
  } catch (const esat::ShapeError& e) {
    std::fprintf(stderr, "esat: %s\n", e.what());
    return kConfigExit;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "esat: %s\n", e.what());
    return 1;
  }
}
