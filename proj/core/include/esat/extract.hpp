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

#ifndef ESAT_EXTRACT_HPP
#define ESAT_EXTRACT_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "esat/costs.hpp"
#include "esat/egraph.hpp"

namespace esat {

enum class ExtractorKind { DefaultGreedy = 0, OcfGreedy = 1, Exact = 2, Oracle = 3 };

std::string_view extractor_name(ExtractorKind kind);
/// Accepts "default", "ocf", "exact", "oracle" and the long names.
std::optional<ExtractorKind> parse_extractor(std::string_view name);

struct ExtractionResult {
  /// Greedy methods report their own estimate; exact and oracle report the
  /// unique-node cost of the selected program.
  double total_cost = 0.0;
  /// One e-node per e-class reachable from the root through the selection.
  std::map<EClassId, ENode> chosen;
  ExtractorKind method = ExtractorKind::DefaultGreedy;
  /// False when the exact search stopped at its budget and returned the
  /// best selection found so far.
  bool optimal = true;
};

/// Bottom-up fixpoint of op cost + sum of child class costs. Shared
/// subgraphs are counted once per use.
ExtractionResult extract_default_greedy(const EGraph& g, const NodeCosts& costs);

/// Greedy fixpoint with the constituent-cost e-node function, which
/// discounts e-classes already counted through another child. A class cost
/// always follows its current best e-node, so it may rise when a child
/// switches to a node that shares less.
ExtractionResult extract_ocf_greedy(const EGraph& g, const NodeCosts& costs);

struct ExactOptions {
  std::size_t max_enodes = 5000;
  /// Abort with CapacityError after this many search nodes; 0 = unbounded.
  std::uint64_t max_search_nodes = 0;
  /// E-nodes that must not be selected (canonical form).
  std::set<ENode> blacklist;
  /// On an exhausted search budget, return the incumbent (optimal = false)
  /// instead of throwing CapacityError.
  bool return_incumbent = false;
  /// Known selections used as initial upper bounds; invalid ones are
  /// ignored. Greedy results are always tried.
  std::vector<std::map<EClassId, ENode>> seeds;
};

/// Minimum unique-node cost selection: root chosen, children of chosen
/// nodes chosen, acyclic, nothing blacklisted. Branch and bound.
ExtractionResult extract_exact(const EGraph& g, const NodeCosts& costs,
                               const ExactOptions& options = {});

/// Exhaustive enumeration; at most `max_enodes` e-nodes.
ExtractionResult brute_force_oracle(const EGraph& g, const NodeCosts& costs,
                                    std::size_t max_enodes = 30);

ExtractionResult extract(ExtractorKind kind, const EGraph& g,
                         const NodeCosts& costs);

/// Sum of op costs over the distinct e-classes used by `chosen` from the
/// root. Throws ExtractionError if the selection is incomplete or cyclic.
double dag_cost(const EGraph& g, const NodeCosts& costs,
                const std::map<EClassId, ENode>& chosen);

/// Checks root coverage, child coverage, membership and acyclicity.
void validate_extraction(const EGraph& g, const ExtractionResult& result);

/// S-expression of the selected program (shared classes are repeated).
std::string extraction_to_term(const EGraph& g, const ExtractionResult& result);

/// Writes the extraction ILP in CPLEX LP format. Variable x_<c>_<i> selects
/// the i-th e-node of e-class c.
void export_ilp(const EGraph& g, const NodeCosts& costs, std::ostream& out,
                const std::set<ENode>& blacklist = {});
void export_ilp(const EGraph& g, const NodeCosts& costs,
                const std::filesystem::path& path,
                const std::set<ENode>& blacklist = {});

/// Number of constraints export_ilp writes: 1 + sum over nodes of their
/// distinct child classes + |blacklist|.
std::size_t ilp_constraint_count(const EGraph& g,
                                 const std::set<ENode>& blacklist = {});

}  // namespace esat

#endif  // ESAT_EXTRACT_HPP
