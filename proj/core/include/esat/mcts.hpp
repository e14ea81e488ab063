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

#ifndef ESAT_MCTS_HPP
#define ESAT_MCTS_HPP

#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <vector>

#include "esat/cost_model.hpp"
#include "esat/costs.hpp"
#include "esat/egraph.hpp"
#include "esat/extract.hpp"
#include "esat/pattern.hpp"
#include "esat/rewrite.hpp"

namespace esat {

struct MctsConfig {
  int budget = 128;
  double exploration = std::sqrt(2.0);
  double stop_prob = 0.5;
  int max_sim_steps = 10;
  std::size_t node_limit = 2000;
  std::uint64_t seed = 0;
  ExtractorKind main_extractor = ExtractorKind::OcfGreedy;
  bool reuse_subtree = true;
  /// Measure rollout improvements from the parent's e-graph, so the
  /// expanded rule itself earns credit for the cost it removes.
  bool credit_expansion = true;
  /// Divide rewards by the search root's extracted cost so the exploration
  /// constant is independent of the cost unit.
  bool normalize_rewards = true;

  void validate() const;
};

struct SearchNode {
  EGraph egraph;
  double value = 0.0;
  std::uint64_t visits = 0;
  /// Visits that ended here because nothing was left to expand.
  std::uint64_t dead_visits = 0;
  /// The incoming rule left the parent's e-graph unchanged.
  bool saturated = false;
  /// The e-graph reached the node limit; no further expansion.
  bool terminal = false;
  /// No rule left to expand and no child left to descend into.
  bool exhausted = false;
  std::set<int> blacklist;
  std::map<int, std::unique_ptr<SearchNode>> children;
  SearchNode* parent = nullptr;
  std::optional<int> incoming_rule;

  double mean() const { return visits ? value / static_cast<double>(visits) : 0.0; }
  bool selectable() const { return !saturated && !terminal && !exhausted; }
};

/// v/n + c * sqrt(ln N / n).
double ucb1(double value, double visits, double parent_visits, double c);

/// Sum of clamped improvements between consecutive entries of `runtimes`;
/// runtimes[0] is the baseline.
double rollout_reward(std::span<const double> runtimes);

/// Child with the highest mean value among non-saturated, visited
/// children; ties go to the lowest rule id.
std::optional<int> best_child(const SearchNode& node);

/// Extracted cost of an e-graph, memoised by fingerprint.
class CostEvaluator {
 public:
  CostEvaluator(const CostModel& model, std::shared_ptr<CostCache> cache,
                ExtractorKind extractor)
      : model_(model), cache_(std::move(cache)), extractor_(extractor) {}

  /// std::nullopt when extraction fails.
  std::optional<double> cost(const EGraph& g) const;
  ExtractorKind extractor() const { return extractor_; }

 private:
  const CostModel& model_;
  std::shared_ptr<CostCache> cache_;
  ExtractorKind extractor_;
};

/// Instrumentation hooks; every method defaults to a no-op.
class SearchObserver {
 public:
  virtual ~SearchObserver() = default;
  virtual void on_select(const SearchNode&) {}
  virtual void on_expand(const SearchNode& /*parent*/, int /*rule*/,
                         const SearchNode& /*child*/) {}
  virtual void on_reward(const SearchNode& /*node*/, double /*reward*/) {}
};

struct RuleStats {
  int rule_id = 0;
  std::uint64_t visits = 0;
  double mean_value = 0.0;
  bool saturated = false;
};

struct SearchOutcome {
  std::optional<int> best_rule;
  std::vector<RuleStats> stats;
  int iterations = 0;
  std::unique_ptr<SearchNode> root;
};

class Mcts {
 public:
  Mcts(std::span<const Rule> rules, const Language& language,
       const CostEvaluator& evaluator, MctsConfig config);

  static std::unique_ptr<SearchNode> make_root(EGraph egraph,
                                               std::span<const Rule> rules);

  /// Runs `config.budget` select/expand/simulate/update iterations.
  SearchOutcome run(std::unique_ptr<SearchNode> root);

  /// Detaches the subtree below `rule` for reuse as the next root.
  static std::unique_ptr<SearchNode> take_child(SearchOutcome& outcome, int rule);

  SearchNode& select(SearchNode& root);
  /// Expands one unexpanded rule; returns the new child, or nullptr when
  /// nothing is left (the node is then marked exhausted).
  SearchNode* expand(SearchNode& node);
  double simulate(const SearchNode& node);
  static void update(SearchNode& node, double reward);

  void set_observer(SearchObserver* observer) { observer_ = observer; }
  std::mt19937_64& rng() { return rng_; }

 private:
  std::vector<int> unexpanded(const SearchNode& node) const;
  std::optional<double> node_cost(const EGraph& g) const {
    return evaluator_.cost(g);
  }

  std::span<const Rule> rules_;
  const Language& language_;
  const CostEvaluator& evaluator_;
  MctsConfig config_;
  std::mt19937_64 rng_;
  SearchObserver* observer_ = nullptr;
};

/// Rules whose sources are absent from `g`.
std::set<int> inapplicable_rules(const EGraph& g, std::span<const Rule> rules);

}  // namespace esat

#endif  // ESAT_MCTS_HPP
