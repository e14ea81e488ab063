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
#include <functional>
#include <random>

#include "esat/costs.hpp"
#include "esat/error.hpp"
#include "esat/mcts.hpp"
#include "esat/zoo.hpp"

using namespace esat;

namespace {

std::vector<Rule> rules_from(const char* file) {
  return load_rules(std::filesystem::path(ESAT_RULES_DIR) / file);
}

struct Fixture {
  std::vector<Rule> rules = rules_from("toy_math.rules");
  SymbolCostModel model{1.0};
  std::shared_ptr<CostCache> cache = std::make_shared<CostCache>();
  CostEvaluator evaluator{model, cache, ExtractorKind::Exact};

  Mcts make(MctsConfig cfg = {}) {
    return Mcts(rules, generic_language(), evaluator, cfg);
  }
};

std::unique_ptr<SearchNode> leaf_with(double value, std::uint64_t visits) {
  auto n = std::make_unique<SearchNode>();
  n->value = value;
  n->visits = visits;
  return n;
}

// n = own simulation (non-root) + dead-end visits + sum over children.
void check_accounting(const SearchNode& node, bool is_root) {
  std::uint64_t sum = node.dead_visits + (is_root ? 0 : 1);
  for (const auto& [rule, child] : node.children) {
    CHECK(child->parent == &node);
    CHECK(child->incoming_rule == rule);
    sum += child->visits;
    check_accounting(*child, false);
  }
  CHECK(node.visits == sum);
}

class Audit final : public SearchObserver {
 public:
  explicit Audit(std::span<const Rule> rules) : rules_(rules) {}

  void on_select(const SearchNode& n) override {
    ++selects;
    if (n.saturated) ++bad_selects;
  }
  void on_expand(const SearchNode& parent, int rule, const SearchNode& child) override {
    ++expands;
    if (parent.saturated) ++bad_expands;
    if (child.saturated) CHECK(child.egraph.fingerprint() == parent.egraph.fingerprint());
    for (int r : child.blacklist) {
      EGraph copy = child.egraph;
      if (apply_rule(copy, rules_[static_cast<std::size_t>(r)]).changed) ++unsound;
    }
    (void)rule;
  }
  void on_reward(const SearchNode&, double r) override {
    ++rewards;
    if (!(r >= 0.0)) ++negative;
  }

  int selects = 0, bad_selects = 0, expands = 0, bad_expands = 0;
  int unsound = 0, rewards = 0, negative = 0;

 private:
  std::span<const Rule> rules_;
};

}  // namespace

TEST_CASE("ucb1") {
  CHECK(ucb1(1, 1, 1, 1) == 1.0);
  CHECK(ucb1(10, 4, 16, 1) == doctest::Approx(2.5 + std::sqrt(std::log(16.0) / 4)));
  CHECK(ucb1(10, 4, 16, 1) == doctest::Approx(3.33255).epsilon(1e-5));
  CHECK(ucb1(10, 4, 16, 0) == 2.5);
}

TEST_CASE("rollout reward clamps every step") {
  const double runs[] = {5, 4, 6, 3};
  CHECK(rollout_reward(runs) == 4.0);
  const double single[] = {7};
  CHECK(rollout_reward(single) == 0.0);
  CHECK(rollout_reward({}) == 0.0);
  const double down[] = {9, 5, 1};
  CHECK(rollout_reward(down) == 8.0);
}

TEST_CASE("update accumulates along the path") {
  SearchNode root;
  auto child = std::make_unique<SearchNode>();
  child->parent = &root;
  SearchNode* c = child.get();
  root.children.emplace(0, std::move(child));
  Mcts::update(*c, 4.0);
  CHECK(c->value == 4.0);
  CHECK(c->visits == 1);
  CHECK(root.visits == 1);

  SearchNode other;
  Mcts::update(other, 1.0);
  Mcts::update(other, 3.0);
  CHECK(other.value == 4.0);
  CHECK(other.visits == 2);
  CHECK(other.mean() == 2.0);
}

TEST_CASE("best child") {
  SearchNode root;
  root.children.emplace(0, leaf_with(4, 2));
  root.children.emplace(1, leaf_with(3, 1));
  CHECK(best_child(root) == 1);

  SearchNode tie;
  tie.children.emplace(3, leaf_with(2, 1));
  tie.children.emplace(1, leaf_with(4, 2));
  CHECK(best_child(tie) == 1);

  SearchNode sat;
  auto s = leaf_with(100, 1);
  s->saturated = true;
  sat.children.emplace(0, std::move(s));
  CHECK_FALSE(best_child(sat).has_value());
  sat.children.emplace(2, leaf_with(1, 1));
  CHECK(best_child(sat) == 2);

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> v(0, 10);
  for (int trial = 0; trial < 200; ++trial) {
    SearchNode a, b;
    const double k = 0.01 + v(rng);
    for (int r = 0; r < 5; ++r) {
      const double value = v(rng);
      const auto n = 1 + static_cast<std::uint64_t>(v(rng));
      a.children.emplace(r, leaf_with(value, n));
      b.children.emplace(r, leaf_with(value * k, n));
    }
    CHECK(best_child(a) == best_child(b));
  }
}

TEST_CASE("selection") {
  Fixture f;
  MctsConfig cfg;
  cfg.exploration = 0.0;
  Mcts m = f.make(cfg);

  auto root = Mcts::make_root(toy_expr_egraph(), f.rules);
  CHECK(&m.select(*root) == root.get());

  // Nothing left to expand at the root, so selection must descend.
  SearchNode top;
  top.visits = 2;
  top.blacklist = {2, 3};
  for (auto [rule, value] : {std::pair{0, 5.0}, std::pair{1, 1.0}}) {
    auto c = leaf_with(value, 1);
    c->parent = &top;
    top.children.emplace(rule, std::move(c));
  }
  for (int i = 0; i < 20; ++i) CHECK(&m.select(top) == top.children.at(0).get());
}

TEST_CASE("selection paths are reproducible") {
  Fixture f;
  MctsConfig cfg;
  cfg.budget = 24;
  cfg.seed = 3;
  std::vector<std::vector<int>> paths;
  for (int run = 0; run < 2; ++run) {
    Mcts m = f.make(cfg);
    auto out = m.run(Mcts::make_root(toy_expr_egraph(), f.rules));
    std::vector<int> path;
    std::function<void(const SearchNode&)> walk = [&](const SearchNode& n) {
      for (const auto& [rule, child] : n.children) {
        path.push_back(rule);
        path.push_back(static_cast<int>(child->visits));
        walk(*child);
      }
    };
    walk(*out.root);
    paths.push_back(path);
  }
  CHECK(paths[0] == paths[1]);
}

TEST_CASE("expansion") {
  Fixture f;
  SUBCASE("an inapplicable rule yields a saturated child") {
    std::vector<Rule> only = {f.rules[2]};
    only[0].id = 0;
    Mcts m(only, generic_language(), f.evaluator, {});
    SearchNode root;
    root.egraph = toy_expr_egraph();
    SearchNode* child = m.expand(root);
    REQUIRE(child);
    CHECK(child->saturated);
    CHECK(root.blacklist.count(0));
    CHECK(m.expand(root) == nullptr);
    CHECK(root.exhausted);
  }
  SUBCASE("x*2 -> x<<1 yields the rewritten e-graph") {
    std::vector<Rule> only = {f.rules[0]};
    Mcts m(only, generic_language(), f.evaluator, {});
    auto root = Mcts::make_root(toy_expr_egraph(), only);
    SearchNode* child = m.expand(*root);
    REQUIRE(child);
    CHECK_FALSE(child->saturated);
    CHECK(child->egraph.size() == GraphSize{6, 5});
    CHECK(child->incoming_rule == 0);
  }
  SUBCASE("child blacklists list exactly the absent sources") {
    Mcts m = f.make();
    auto root = Mcts::make_root(toy_expr_egraph(), f.rules);
    CHECK(root->blacklist == std::set<int>{2, 3});
    while (SearchNode* child = m.expand(*root)) {
      if (child->saturated) continue;
      std::set<int> expected;
      for (const auto& r : f.rules) {
        if (!is_rule_applicable(child->egraph, r)) expected.insert(r.id);
      }
      CHECK(child->blacklist == expected);
    }
  }
}

TEST_CASE("budget of one expands exactly once") {
  Fixture f;
  MctsConfig cfg;
  cfg.budget = 1;
  Mcts m = f.make(cfg);
  auto out = m.run(Mcts::make_root(toy_expr_egraph(), f.rules));
  CHECK(out.iterations == 1);
  REQUIRE(out.root->children.size() == 1);
  CHECK(out.best_rule == out.root->children.begin()->first);
  CHECK(out.root->visits == 1);
}

TEST_CASE("search invariants over full runs") {
  Fixture f;
  const auto bad = rules_from("toy_bad.rules");
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    MctsConfig cfg;
    cfg.budget = 48;
    cfg.seed = seed;
    cfg.node_limit = 24;
    Mcts m(bad, generic_language(), f.evaluator, cfg);
    Audit audit(bad);
    m.set_observer(&audit);
    auto out = m.run(Mcts::make_root(toy_expr_egraph(), bad));
    CHECK(audit.bad_selects == 0);
    CHECK(audit.bad_expands == 0);
    CHECK(audit.unsound == 0);
    CHECK(audit.negative == 0);
    CHECK(audit.rewards == out.iterations);
    CHECK(out.root->visits == static_cast<std::uint64_t>(out.iterations));
    check_accounting(*out.root, true);
  }
}

TEST_CASE("fixed seeds give identical outcomes") {
  Fixture f;
  const auto bad = rules_from("toy_bad.rules");
  MctsConfig cfg;
  cfg.budget = 32;
  cfg.seed = 11;
  cfg.node_limit = 20;
  std::vector<std::pair<std::optional<int>, std::vector<double>>> runs;
  for (int i = 0; i < 3; ++i) {
    Mcts m(bad, generic_language(), f.evaluator, cfg);
    auto out = m.run(Mcts::make_root(toy_expr_egraph(), bad));
    std::vector<double> stats;
    for (const auto& s : out.stats) {
      stats.push_back(s.rule_id);
      stats.push_back(static_cast<double>(s.visits));
      stats.push_back(s.mean_value);
    }
    runs.emplace_back(out.best_rule, stats);
  }
  CHECK(runs[0] == runs[1]);
  CHECK(runs[1] == runs[2]);
}

TEST_CASE("subtree reuse detaches the child") {
  Fixture f;
  MctsConfig cfg;
  cfg.budget = 16;
  Mcts m = f.make(cfg);
  auto out = m.run(Mcts::make_root(toy_expr_egraph(), f.rules));
  REQUIRE(out.best_rule);
  const auto visits = out.root->children.at(*out.best_rule)->visits;
  auto next = Mcts::take_child(out, *out.best_rule);
  REQUIRE(next);
  CHECK(next->parent == nullptr);
  CHECK(next->visits == visits);
  CHECK_FALSE(out.root->children.count(*out.best_rule));
  CHECK(Mcts::take_child(out, 99) == nullptr);
}

TEST_CASE("the cost evaluator memoises by fingerprint") {
  Fixture f;
  const EGraph g = toy_expr_egraph();
  CHECK(f.evaluator.cost(g) == 4.0);
  CHECK(f.evaluator.cost(g.snapshot()) == 4.0);
  CHECK(f.cache->egraph_entries() == 1);
  CHECK(f.cache->egraph_hits() == 1);
}

TEST_CASE("configuration checks") {
  Fixture f;
  for (auto mutate : std::vector<std::function<void(MctsConfig&)>>{
           [](MctsConfig& c) { c.budget = 0; },
           [](MctsConfig& c) { c.stop_prob = 0.0; },
           [](MctsConfig& c) { c.stop_prob = 1.0; },
           [](MctsConfig& c) { c.exploration = -1; },
           [](MctsConfig& c) { c.max_sim_steps = -1; }}) {
    MctsConfig cfg;
    mutate(cfg);
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    CHECK_THROWS_AS(f.make(cfg), ConfigError);
  }
  auto shuffled = f.rules;
  shuffled[0].id = 5;
  CHECK_THROWS_AS(Mcts(shuffled, generic_language(), f.evaluator, {}), ConfigError);
  Mcts m = f.make();
  CHECK_THROWS_AS(m.run(nullptr), StructuralError);
}
