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

#include "esat/mcts.hpp"

#include <algorithm>
#include <limits>

#include "esat/error.hpp"
#include "hashing.hpp"

namespace esat {

void MctsConfig::validate() const {
  if (budget < 1) throw ConfigError("budget must be at least 1");
  if (!(stop_prob > 0.0 && stop_prob < 1.0)) {
    throw ConfigError("stop probability must lie strictly between 0 and 1");
  }
  if (!(exploration >= 0.0) || !std::isfinite(exploration)) {
    throw ConfigError("exploration constant must be non-negative");
  }
  if (max_sim_steps < 0) throw ConfigError("simulation depth must be non-negative");
}

double ucb1(double value, double visits, double parent_visits, double c) {
  return value / visits + c * std::sqrt(std::log(parent_visits) / visits);
}

double rollout_reward(std::span<const double> runtimes) {
  double r = 0.0;
  for (std::size_t i = 1; i < runtimes.size(); ++i) {
    r += std::max(runtimes[i - 1] - runtimes[i], 0.0);
  }
  return r;
}

std::optional<int> best_child(const SearchNode& node) {
  std::optional<int> best;
  double best_mean = -std::numeric_limits<double>::infinity();
  for (const auto& [rule, child] : node.children) {
    if (child->saturated || child->visits == 0) continue;
    if (child->mean() > best_mean) {
      best_mean = child->mean();
      best = rule;
    }
  }
  return best;
}

std::optional<double> CostEvaluator::cost(const EGraph& g) const {
  const std::uint64_t fp = g.fingerprint();
  const int method = static_cast<int>(extractor_);
  if (cache_) {
    if (auto hit = cache_->egraph(fp, method)) return *hit;
  }
  try {
    const NodeCosts costs = model_.node_costs(g);
    const double value = extract(extractor_, g, costs).total_cost;
    return cache_ ? cache_->put_egraph(fp, method, value) : value;
  } catch (const ExtractionError&) {
    return std::nullopt;
  } catch (const CapacityError&) {
    return std::nullopt;
  }
}

std::set<int> inapplicable_rules(const EGraph& g, std::span<const Rule> rules) {
  std::set<int> out;
  for (const auto& r : rules) {
    if (!is_rule_applicable(g, r)) out.insert(r.id);
  }
  return out;
}

Mcts::Mcts(std::span<const Rule> rules, const Language& language,
           const CostEvaluator& evaluator, MctsConfig config)
    : rules_(rules),
      language_(language),
      evaluator_(evaluator),
      config_(config),
      rng_(detail::hash_combine(config.seed, detail::hash_string("mcts"))) {
  config_.validate();
  for (std::size_t i = 0; i < rules_.size(); ++i) {
    if (rules_[i].id != static_cast<int>(i)) {
      throw ConfigError("rule ids must be consecutive from 0");
    }
  }
}

std::unique_ptr<SearchNode> Mcts::make_root(EGraph egraph,
                                            std::span<const Rule> rules) {
  auto root = std::make_unique<SearchNode>();
  egraph.rebuild();
  root->blacklist = inapplicable_rules(egraph, rules);
  root->egraph = std::move(egraph);
  return root;
}

std::vector<int> Mcts::unexpanded(const SearchNode& node) const {
  std::vector<int> out;
  if (node.terminal) return out;
  for (const auto& r : rules_) {
    if (!node.blacklist.count(r.id) && !node.children.count(r.id)) {
      out.push_back(r.id);
    }
  }
  return out;
}

SearchNode& Mcts::select(SearchNode& root) {
  SearchNode* node = &root;
  std::bernoulli_distribution stop(config_.stop_prob);
  for (;;) {
    if (observer_) observer_->on_select(*node);
    const bool expandable = !unexpanded(*node).empty();
    const bool stop_here = stop(rng_);
    if (expandable && stop_here) return *node;

    SearchNode* next = nullptr;
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& [rule, child] : node->children) {
      if (!child->selectable()) continue;
      const double score =
          child->visits == 0
              ? std::numeric_limits<double>::infinity()
              : ucb1(child->value, static_cast<double>(child->visits),
                     static_cast<double>(std::max<std::uint64_t>(node->visits, 1)),
                     config_.exploration);
      if (score > best) {
        best = score;
        next = child.get();
      }
    }
    if (!next) return *node;
    node = next;
  }
}

SearchNode* Mcts::expand(SearchNode& node) {
  const auto options = unexpanded(node);
  if (options.empty()) {
    node.exhausted = true;
    return nullptr;
  }
  std::uniform_int_distribution<std::size_t> pick(0, options.size() - 1);
  const int rule = options[pick(rng_)];

  auto child = std::make_unique<SearchNode>();
  child->egraph = node.egraph.snapshot();
  const auto report =
      apply_rule(child->egraph, rules_[static_cast<std::size_t>(rule)],
                 config_.node_limit, language_);
  child->parent = &node;
  child->incoming_rule = rule;
  if (!report.changed) {
    child->saturated = true;
    node.blacklist.insert(rule);
  } else {
    child->terminal = report.hit_node_limit;
    child->blacklist = inapplicable_rules(child->egraph, rules_);
  }
  SearchNode* raw = child.get();
  node.children.emplace(rule, std::move(child));
  if (observer_) observer_->on_expand(node, rule, *raw);
  return raw;
}

double Mcts::simulate(const SearchNode& node) {
  std::vector<double> runtimes;
  auto record = [&](const EGraph& g) {
    if (auto c = node_cost(g)) {
      runtimes.push_back(*c);
    } else if (!runtimes.empty()) {
      runtimes.push_back(runtimes.back());
    }
  };
  if (config_.credit_expansion && node.parent) record(node.parent->egraph);
  record(node.egraph);

  if (!node.terminal && !node.saturated) {
    EGraph g = node.egraph.snapshot();
    std::set<int> noop;
    for (int step = 0; step < config_.max_sim_steps; ++step) {
      std::vector<int> options;
      for (const auto& r : rules_) {
        if (!node.blacklist.count(r.id) && !noop.count(r.id)) {
          options.push_back(r.id);
        }
      }
      if (options.empty()) break;
      std::uniform_int_distribution<std::size_t> pick(0, options.size() - 1);
      const int rule = options[pick(rng_)];
      const auto report = apply_rule(g, rules_[static_cast<std::size_t>(rule)],
                                     config_.node_limit, language_);
      if (!report.changed) {
        noop.insert(rule);
        continue;
      }
      noop.clear();
      record(g);
      if (report.hit_node_limit) break;
    }
  }
  return rollout_reward(runtimes);
}

void Mcts::update(SearchNode& node, double reward) {
  for (SearchNode* n = &node; n; n = n->parent) {
    n->value += reward;
    n->visits += 1;
  }
}

SearchOutcome Mcts::run(std::unique_ptr<SearchNode> root) {
  if (!root) throw StructuralError("search needs a root node");
  const auto scale = node_cost(root->egraph);
  const double norm =
      config_.normalize_rewards && scale && *scale > 0.0 ? 1.0 / *scale : 1.0;

  SearchOutcome out;
  for (int it = 0; it < config_.budget && !root->exhausted; ++it) {
    ++out.iterations;
    SearchNode& leaf = select(*root);
    SearchNode* child = expand(leaf);
    if (!child) {
      leaf.dead_visits += 1;
      update(leaf, 0.0);
      if (observer_) observer_->on_reward(leaf, 0.0);
      continue;
    }
    const double reward = child->saturated ? 0.0 : simulate(*child) * norm;
    update(*child, reward);
    if (observer_) observer_->on_reward(*child, reward);
  }
  out.best_rule = best_child(*root);
  for (const auto& [rule, child] : root->children) {
    out.stats.push_back(
        RuleStats{rule, child->visits, child->mean(), child->saturated});
  }
  out.root = std::move(root);
  return out;
}

std::unique_ptr<SearchNode> Mcts::take_child(SearchOutcome& outcome, int rule) {
  auto it = outcome.root->children.find(rule);
  if (it == outcome.root->children.end()) return nullptr;
  auto child = std::move(it->second);
  outcome.root->children.erase(it);
  child->parent = nullptr;
  return child;
}

}  // namespace esat
