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

// Branch and bound over e-class decisions. A class becomes "required" once
// a decided e-node points at it; the search always decides the required
// class with the fewest candidates next. The lower bound is the sum of the
// cheapest candidate over required, undecided classes.

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "esat/error.hpp"
#include "esat/extract.hpp"
#include "esat/rewrite.hpp"
#include "extract_detail.hpp"

namespace esat {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct BudgetExhausted {};

struct Candidate {
  std::uint32_t node = 0;  // index into g.nodes(c)
  double cost = 0.0;
  std::vector<std::uint32_t> children;  // distinct canonical class indices
};

class BranchAndBound {
 public:
  BranchAndBound(const EGraph& g, const NodeCosts& costs,
                 const ExactOptions& options)
      : g_(g), costs_(costs), options_(options) {}

  ExtractionResult run() {
    prepare();
    seed_upper_bound();

    const auto root = index_of(g_.root());
    choice_.assign(g_.id_bound(), -1);
    refcount_.assign(g_.id_bound(), 0);
    mark_.assign(g_.id_bound(), 0);
    require(root);
    bool complete = true;
    try {
      search();
    } catch (const BudgetExhausted&) {
      if (!options_.return_incumbent || best_ == kInf) {
        throw CapacityError("exact extraction exceeded its search budget");
      }
      complete = false;
    }

    if (best_ == kInf) throw InfeasibleError("no acyclic selection exists");
    ExtractionResult r;
    r.method = ExtractorKind::Exact;
    r.optimal = complete;
    r.chosen = detail::collect_choice(g_, best_choice_);
    r.total_cost = dag_cost(g_, costs_, r.chosen);
    return r;
  }

 private:
  void prepare() {
    if (g_.size().enodes > options_.max_enodes) {
      throw CapacityError("exact extraction is limited to " +
                          std::to_string(options_.max_enodes) +
                          " e-nodes; use a greedy extractor");
    }
    const EClassId roots[] = {g_.root()};
    const auto reach = reachable_classes(g_, roots);
    cands_.assign(g_.id_bound(), {});
    std::vector<EClassId> classes;
    for (auto c : g_.class_ids()) {
      if (!reach[index_of(c)]) continue;
      classes.push_back(c);
      const auto& members = g_.nodes(c);
      for (std::size_t i = 0; i < members.size(); ++i) {
        if (options_.blacklist.count(members[i])) continue;
        Candidate cand{static_cast<std::uint32_t>(i), costs_[index_of(c)][i], {}};
        bool self_loop = false;
        for (auto k : members[i].children) {
          const auto ki = index_of(g_.find(k));
          self_loop = self_loop || ki == index_of(c);
          cand.children.push_back(ki);
        }
        if (self_loop) continue;
        std::sort(cand.children.begin(), cand.children.end());
        cand.children.erase(std::unique(cand.children.begin(), cand.children.end()),
                            cand.children.end());
        cands_[index_of(c)].push_back(std::move(cand));
      }
    }

    // Drop candidates that depend on classes without any candidate.
    for (bool pruned = true; pruned;) {
      pruned = false;
      for (auto c : classes) {
        auto& list = cands_[index_of(c)];
        const auto before = list.size();
        std::erase_if(list, [&](const Candidate& cand) {
          return std::any_of(cand.children.begin(), cand.children.end(),
                             [&](std::uint32_t k) { return cands_[k].empty(); });
        });
        pruned = pruned || list.size() != before;
      }
    }
    if (cands_[index_of(g_.root())].empty()) {
      throw InfeasibleError("every e-node of the root e-class is excluded");
    }

    min_cost_.assign(g_.id_bound(), 0.0);
    for (auto c : classes) {
      auto& list = cands_[index_of(c)];
      std::stable_sort(list.begin(), list.end(),
                       [](const Candidate& a, const Candidate& b) {
                         return a.cost < b.cost;
                       });
      // A candidate is dominated by an earlier one that is no more expensive
      // and needs a subset of its children.
      std::vector<Candidate> kept;
      for (auto& cand : list) {
        const bool dominated =
            std::any_of(kept.begin(), kept.end(), [&](const Candidate& k) {
              return k.cost <= cand.cost &&
                     std::includes(cand.children.begin(), cand.children.end(),
                                   k.children.begin(), k.children.end());
            });
        if (!dominated) kept.push_back(std::move(cand));
      }
      list = std::move(kept);
      if (!list.empty()) min_cost_[index_of(c)] = list.front().cost;
    }
  }

  void seed_upper_bound() {
    for (auto kind : {ExtractorKind::DefaultGreedy, ExtractorKind::OcfGreedy}) {
      try {
        offer(extract(kind, g_, costs_).chosen);
      } catch (const ExtractionError&) {
      }
    }
    for (const auto& seed : options_.seeds) offer(seed);
  }

  // Adopts `chosen` as the incumbent if it is a valid, cheaper selection.
  void offer(const std::map<EClassId, ENode>& chosen) {
    for (const auto& [c, n] : chosen) {
      if (!g_.contains(c) || g_.find(c) != c) return;
      const auto& members = g_.nodes(c);
      if (!std::binary_search(members.begin(), members.end(), n)) return;
      if (options_.blacklist.count(n)) return;
    }
    double cost = 0.0;
    try {
      cost = dag_cost(g_, costs_, chosen);
    } catch (const ExtractionError&) {
      return;
    }
    if (!(cost < best_)) return;
    best_ = cost;
    best_choice_.assign(g_.id_bound(), -1);
    for (const auto& [c, n] : chosen) {
      best_choice_[index_of(c)] = static_cast<int>(detail::node_index(g_, c, n));
    }
  }

  double threshold() const {
    if (best_ == kInf) return kInf;
    return best_ - 1e-12 * std::max(1.0, std::abs(best_));
  }

  void require(std::uint32_t k) {
    if (refcount_[k]++ == 0 && choice_[k] < 0) {
      open_.emplace(cands_[k].size(), k);
      lower_ += min_cost_[k];
    }
  }

  void release(std::uint32_t k) {
    if (--refcount_[k] == 0 && choice_[k] < 0) {
      open_.erase({cands_[k].size(), k});
      lower_ -= min_cost_[k];
    }
  }

  // Whether class `c` is reachable from `cand`'s children via decisions.
  bool closes_cycle(std::uint32_t c, const Candidate& cand) {
    ++stamp_;
    stack_.assign(cand.children.begin(), cand.children.end());
    while (!stack_.empty()) {
      const auto k = stack_.back();
      stack_.pop_back();
      if (k == c) return true;
      if (mark_[k] == stamp_) continue;
      mark_[k] = stamp_;
      const int i = choice_[k];
      if (i < 0) continue;
      for (auto child : cands_[k][static_cast<std::size_t>(i)].children) {
        stack_.push_back(child);
      }
    }
    return false;
  }

  void search() {
    if (options_.max_search_nodes && ++visited_ > options_.max_search_nodes) {
      throw BudgetExhausted{};
    }
    if (open_.empty()) {
      if (cost_ < threshold()) {
        best_ = cost_;
        best_choice_.assign(g_.id_bound(), -1);
        for (std::size_t k = 0; k < choice_.size(); ++k) {
          if (choice_[k] >= 0 && refcount_[k] > 0) {
            best_choice_[k] =
                static_cast<int>(cands_[k][static_cast<std::size_t>(choice_[k])].node);
          }
        }
      }
      return;
    }
    if (cost_ + lower_ >= threshold()) return;

    const auto c = open_.begin()->second;
    const auto& list = cands_[c];
    for (std::size_t i = 0; i < list.size(); ++i) {
      const Candidate& cand = list[i];
      if (cost_ + cand.cost + lower_ - min_cost_[c] >= threshold()) break;
      if (closes_cycle(c, cand)) continue;

      open_.erase({list.size(), c});
      lower_ -= min_cost_[c];
      choice_[c] = static_cast<int>(i);
      cost_ += cand.cost;
      for (auto k : cand.children) require(k);

      search();

      for (auto k : cand.children) release(k);
      cost_ -= cand.cost;
      choice_[c] = -1;
      lower_ += min_cost_[c];
      open_.emplace(list.size(), c);
    }
  }

  const EGraph& g_;
  const NodeCosts& costs_;
  const ExactOptions& options_;

  std::vector<std::vector<Candidate>> cands_;
  std::vector<double> min_cost_;
  std::vector<int> choice_;
  std::vector<std::uint32_t> refcount_;
  std::set<std::pair<std::size_t, std::uint32_t>> open_;
  double cost_ = 0.0;
  double lower_ = 0.0;

  double best_ = kInf;
  std::vector<int> best_choice_;

  std::vector<std::uint32_t> mark_;
  std::vector<std::uint32_t> stack_;
  std::uint32_t stamp_ = 0;
  std::uint64_t visited_ = 0;
};

}  // namespace

ExtractionResult extract_exact(const EGraph& g, const NodeCosts& costs,
                               const ExactOptions& options) {
  detail::require_clean(g);
  detail::check_costs(g, costs);
  return BranchAndBound(g, costs, options).run();
}

}  // namespace esat
