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

#ifndef ESAT_DRIVER_HPP
#define ESAT_DRIVER_HPP

#include <cstddef>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "esat/cost_model.hpp"
#include "esat/costs.hpp"
#include "esat/egraph.hpp"
#include "esat/extract.hpp"
#include "esat/mcts.hpp"
#include "esat/pattern.hpp"
#include "esat/rewrite.hpp"
#include "esat/tensor.hpp"

namespace esat {

/// An input program together with the language and cost model used to
/// rewrite and extract it.
struct Workload {
  std::string name;
  EGraph egraph;
  const Language* language = &generic_language();
  std::shared_ptr<const CostModel> cost_model;
  std::shared_ptr<CostCache> cache;
  /// Set for tensor programs.
  std::optional<TensorGraph> graph;
};

Workload tensor_workload(std::string name, const TensorGraph& graph,
                         const CostModelConfig& costs);

/// The (a*2)/2 expression with one unit of cost per AST node.
Workload toy_workload();

/// `zoo:name(args)`, a bare zoo name, or a path to a JSON graph.
Workload load_workload(std::string_view model, const CostModelConfig& costs);

enum class Builder { Mcts, Sequential };

/// The unmodified program as a selection in `g`, which must descend from
/// `initial` by rewriting. Empty when the mapping is ambiguous.
std::map<EClassId, ENode> original_selection(const EGraph& initial,
                                             const EGraph& g);

std::string_view builder_name(Builder builder);
std::optional<Builder> parse_builder(std::string_view name);

struct RunConfig {
  Builder builder = Builder::Mcts;
  /// Search parameters; node_limit and seed also apply to the sequential
  /// builder.
  MctsConfig mcts;
  /// Sequential builder: iterations in which multi-pattern rules run.
  int k_multi = 1;
  ExtractorKind final_extractor = ExtractorKind::Exact;
  /// Safety cap on outer iterations (sequential passes or MCTS steps).
  int max_iterations = 10000;
  /// Limits for a final exact extraction. By default the search returns its
  /// best selection when the budget runs out; the original program is
  /// always among the candidates.
  ExactOptions exact = default_final_exact_options();
  /// Operator names the final exact extraction must not select.
  std::set<std::string> forbidden_ops;

  static ExactOptions default_final_exact_options();

  void validate() const;
};

struct IterationRecord {
  int iteration = 0;
  int rule_id = 0;
  std::size_t nodes = 0;
  std::size_t classes = 0;
  /// Cost reported by the main extractor; empty when extraction failed.
  std::optional<double> extracted_cost;
};

struct RunReport {
  std::string model;
  Builder builder = Builder::Mcts;
  ExtractorKind final_extractor = ExtractorKind::Exact;
  std::uint64_t seed = 0;
  double original_cost = 0.0;
  double optimized_cost = 0.0;
  double speedup_pct = 0.0;
  double wall_time_s = 0.0;
  std::vector<IterationRecord> iterations;
  std::map<int, std::size_t> rule_histogram;
  /// "saturated", "node_limit" or "iteration_cap".
  std::string stop_reason;
  GraphSize final_size;
  EGraph final_egraph;
  ExtractionResult extraction;
  /// False when a final exact search stopped at its budget.
  bool optimal = true;
  /// S-expression of the optimized program.
  std::string optimized_term;
};

/// Called after every rule application that changed the e-graph.
using ApplyHook = std::function<void(const EGraph&, int rule_id)>;

/// Repeated search, apply best rule, until saturated or at the node limit.
RunReport optimize_mcts(const Workload& workload, std::span<const Rule> rules,
                        const RunConfig& config, const ApplyHook& hook = {},
                        SearchObserver* observer = nullptr);

/// Fixed-order construction: multi-pattern rules (first k_multi passes),
/// then single-pattern rules, each in ascending id.
RunReport optimize_sequential(const Workload& workload,
                              std::span<const Rule> rules,
                              const RunConfig& config,
                              const ApplyHook& hook = {});

RunReport optimize(const Workload& workload, std::span<const Rule> rules,
                   const RunConfig& config);

struct ExtractorRow {
  ExtractorKind kind = ExtractorKind::Exact;
  /// The extractor's own estimate.
  double cost = 0.0;
  /// Unique-node cost of the returned selection.
  double dag_cost = 0.0;
  double wall_ms = 0.0;
  /// Set when the extractor failed; cost fields are then meaningless.
  std::string error;
};

/// Runs exact, default greedy and OCF greedy on one e-graph.
std::vector<ExtractorRow> compare_extractors(const EGraph& g,
                                             const NodeCosts& costs);

void write_comparison_csv(std::span<const ExtractorRow> rows, std::ostream& out);
std::string comparison_table(std::span<const ExtractorRow> rows);

/// iteration,rule_id,nodes,classes,extracted_cost
std::string trace_csv(const RunReport& report);
/// rule_id,count
std::string heatmap_csv(const RunReport& report);
/// Everything but wall time, so reruns with the same seed are identical.
std::string report_json(const RunReport& report);

/// Writes trace.csv, heatmap.csv and report.json into `outdir`.
void emit_traces(const RunReport& report, const std::filesystem::path& outdir);

}  // namespace esat

#endif  // ESAT_DRIVER_HPP
