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

// Slow reference implementations used to check the real ones.

#ifndef ESAT_TESTS_ORACLES_HPP
#define ESAT_TESTS_ORACLES_HPP

#include <map>
#include <numeric>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "esat/egraph.hpp"
#include "esat/pattern.hpp"

namespace esat::testing {

/// Congruence closure by brute force: every added term is an item; two
/// items are equal if explicitly merged or if they apply the same symbol to
/// pairwise-equal items. The fixpoint compares all pairs.
class NaiveCongruence {
 public:
  int add(Symbol symbol, std::vector<int> children) {
    items_.push_back({std::move(symbol), std::move(children)});
    block_.push_back(static_cast<int>(block_.size()));
    close();
    return static_cast<int>(items_.size()) - 1;
  }

  void merge(int a, int b) {
    join(a, b);
    close();
  }

  bool same(int a, int b) const { return block_[a] == block_[b]; }
  std::size_t size() const { return items_.size(); }

  /// Number of distinct (symbol, child blocks) pairs: the e-node count of
  /// a hash-consed, congruence-closed e-graph.
  std::size_t distinct_nodes() const {
    std::set<std::pair<Symbol, std::vector<int>>> seen;
    for (const auto& it : items_) {
      std::vector<int> kids;
      for (int k : it.children) kids.push_back(block_[k]);
      seen.emplace(it.symbol, kids);
    }
    return seen.size();
  }

  std::size_t blocks() const {
    return std::set<int>(block_.begin(), block_.end()).size();
  }

 private:
  struct Item {
    Symbol symbol;
    std::vector<int> children;
  };

  void join(int a, int b) {
    const int from = block_[b], to = block_[a];
    if (from == to) return;
    for (auto& x : block_) {
      if (x == from) x = to;
    }
  }

  void close() {
    for (bool changed = true; changed;) {
      changed = false;
      for (std::size_t i = 0; i < items_.size(); ++i) {
        for (std::size_t j = i + 1; j < items_.size(); ++j) {
          if (block_[i] == block_[j]) continue;
          if (!(items_[i].symbol == items_[j].symbol)) continue;
          if (items_[i].children.size() != items_[j].children.size()) continue;
          bool congruent = true;
          for (std::size_t k = 0; k < items_[i].children.size(); ++k) {
            congruent = congruent && block_[items_[i].children[k]] ==
                                         block_[items_[j].children[k]];
          }
          if (congruent) {
            join(static_cast<int>(i), static_cast<int>(j));
            changed = true;
          }
        }
      }
    }
  }

  std::vector<Item> items_;
  std::vector<int> block_;
};

/// Whether e-class `c` represents `p` under the variable assignment
/// `sigma`. Literal attributes must prefix the payload; attribute
/// variables are not supported.
inline bool represents(const EGraph& g, const Pattern& p, EClassId c,
                       const std::map<std::string, EClassId>& sigma) {
  c = g.find(c);
  if (p.is_var()) return g.find(sigma.at(p.name)) == c;
  for (const auto& n : g.nodes(c)) {
    if (n.symbol.name != p.name || n.children.size() != p.children.size()) continue;
    if (p.params) {
      if (p.params->size() > n.symbol.payload.size()) continue;
      bool ok = true;
      for (std::size_t i = 0; i < p.params->size(); ++i) {
        ok = ok && std::get<std::int64_t>((*p.params)[i].value) == n.symbol.payload[i];
      }
      if (!ok) continue;
    }
    bool all = true;
    for (std::size_t i = 0; all && i < p.children.size(); ++i) {
      all = represents(g, p.children[i], n.children[i], sigma);
    }
    if (all) return true;
  }
  return false;
}

/// Every (root, assignment) pair under which the root represents `p`,
/// found by enumerating all assignments of classes to variables.
inline std::set<std::pair<EClassId, std::map<std::string, EClassId>>> naive_matches(
    const EGraph& g, const Pattern& p) {
  const auto vars = p.vars();
  const std::vector<std::string> names(vars.begin(), vars.end());
  const auto classes = g.class_ids();
  std::set<std::pair<EClassId, std::map<std::string, EClassId>>> out;
  std::vector<std::size_t> digit(names.size(), 0);
  for (;;) {
    std::map<std::string, EClassId> sigma;
    for (std::size_t i = 0; i < names.size(); ++i) sigma[names[i]] = classes[digit[i]];
    for (auto root : classes) {
      if (represents(g, p, root, sigma)) out.emplace(root, sigma);
    }
    std::size_t k = 0;
    while (k < digit.size() && ++digit[k] == classes.size()) digit[k++] = 0;
    if (k == digit.size()) break;
  }
  return out;
}

/// Terms of height at most `depth` represented by e-class `c`, rendered as
/// `sym[payload](children)`.
inline std::set<std::string> terms_of(const EGraph& g, EClassId c, int depth) {
  std::set<std::string> out;
  if (depth <= 0) return out;
  for (const auto& n : g.nodes(g.find(c))) {
    std::string head = n.symbol.to_string();
    if (n.children.empty()) {
      out.insert(head);
      continue;
    }
    std::vector<std::string> partial = {head + "("};
    bool dead = false;
    for (std::size_t i = 0; i < n.children.size() && !dead; ++i) {
      const auto sub = terms_of(g, n.children[i], depth - 1);
      if (sub.empty()) dead = true;
      std::vector<std::string> next;
      for (const auto& pre : partial) {
        for (const auto& s : sub) next.push_back(pre + (i ? "," : "") + s);
      }
      partial = std::move(next);
    }
    if (dead) continue;
    for (auto& t : partial) out.insert(t + ")");
  }
  return out;
}

}  // namespace esat::testing

#endif  // ESAT_TESTS_ORACLES_HPP
