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

#include "esat/extract.hpp"

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

#include "esat/error.hpp"
#include "esat/rewrite.hpp"
#include "extract_detail.hpp"

namespace esat {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

std::string_view extractor_name(ExtractorKind kind) {
  switch (kind) {
    case ExtractorKind::DefaultGreedy:
      return "default_greedy";
    case ExtractorKind::OcfGreedy:
      return "ocf_greedy";
    case ExtractorKind::Exact:
      return "exact";
    case ExtractorKind::Oracle:
      return "oracle";
  }
  return "unknown";
}

std::optional<ExtractorKind> parse_extractor(std::string_view name) {
  if (name == "default" || name == "default_greedy") return ExtractorKind::DefaultGreedy;
  if (name == "ocf" || name == "ocf_greedy") return ExtractorKind::OcfGreedy;
  if (name == "exact") return ExtractorKind::Exact;
  if (name == "oracle") return ExtractorKind::Oracle;
  return std::nullopt;
}

namespace detail {

void require_clean(const EGraph& g) {
  if (!g.is_clean()) {
    throw StructuralError("extraction requires a rebuilt e-graph");
  }
  if (!g.has_root()) throw StructuralError("e-graph has no root e-class");
}

std::size_t node_index(const EGraph& g, EClassId c, const ENode& node) {
  const auto& members = g.nodes(c);
  auto it = std::lower_bound(members.begin(), members.end(), node);
  if (it == members.end() || !(*it == node)) {
    throw ExtractionError("chosen e-node " + to_string(node) +
                          " is not a member of ec" +
                          std::to_string(index_of(g.find(c))));
  }
  return static_cast<std::size_t>(it - members.begin());
}

void check_costs(const EGraph& g, const NodeCosts& costs) {
  for (auto c : g.class_ids()) {
    const auto k = index_of(c);
    if (k >= costs.size() || costs[k].size() != g.nodes(c).size()) {
      throw ExtractionError("cost table does not match the e-graph");
    }
    for (double v : costs[k]) {
      if (!(v >= 0.0)) throw ExtractionError("e-node costs must be non-negative");
    }
  }
}

std::map<EClassId, ENode> collect_choice(const EGraph& g,
                                         const std::vector<int>& choice) {
  std::map<EClassId, ENode> chosen;
  std::vector<EClassId> stack{g.root()};
  while (!stack.empty()) {
    const EClassId c = g.find(stack.back());
    stack.pop_back();
    if (chosen.count(c)) continue;
    const int i = choice[index_of(c)];
    if (i < 0) {
      throw ExtractionError("no finite-cost e-node for ec" +
                            std::to_string(index_of(c)));
    }
    const ENode& n = g.nodes(c)[static_cast<std::size_t>(i)];
    chosen.emplace(c, n);
    for (auto k : n.children) stack.push_back(k);
  }
  return chosen;
}

}  // namespace detail

namespace {

// True if `c` is reachable from the children of `node` following the
// current choice; selecting `node` for `c` would then close a cycle.
bool closes_cycle(const EGraph& g, EClassId c, const ENode& node,
                  const std::vector<int>& choice, std::vector<std::uint32_t>& mark,
                  std::uint32_t& stamp) {
  ++stamp;
  std::vector<EClassId> stack;
  for (auto k : node.children) stack.push_back(g.find(k));
  while (!stack.empty()) {
    const EClassId k = stack.back();
    stack.pop_back();
    if (k == c) return true;
    if (mark[index_of(k)] == stamp) continue;
    mark[index_of(k)] = stamp;
    const int i = choice[index_of(k)];
    if (i < 0) continue;
    for (auto child : g.nodes(k)[static_cast<std::size_t>(i)].children) {
      stack.push_back(g.find(child));
    }
  }
  return false;
}

std::size_t pass_cap(std::size_t classes) { return 4 * classes + 8; }

}  // namespace

ExtractionResult extract_default_greedy(const EGraph& g, const NodeCosts& costs) {
  detail::require_clean(g);
  detail::check_costs(g, costs);
  const auto ids = g.class_ids();
  std::vector<double> best(g.id_bound(), kInf);
  std::vector<int> choice(g.id_bound(), -1);
  std::vector<std::uint32_t> mark(g.id_bound(), 0);
  std::uint32_t stamp = 0;

  for (std::size_t pass = 0; pass < pass_cap(ids.size()); ++pass) {
    bool changed = false;
    for (auto c : ids) {
      const auto& members = g.nodes(c);
      for (std::size_t i = 0; i < members.size(); ++i) {
        double cost = costs[index_of(c)][i];
        for (auto k : members[i].children) cost += best[index_of(g.find(k))];
        if (cost < best[index_of(c)] &&
            !closes_cycle(g, c, members[i], choice, mark, stamp)) {
          best[index_of(c)] = cost;
          choice[index_of(c)] = static_cast<int>(i);
          changed = true;
        }
      }
    }
    if (!changed) break;
  }

  const EClassId root = g.root();
  if (best[index_of(root)] == kInf) {
    throw ExtractionError("root e-class has no finite-cost program");
  }
  ExtractionResult r;
  r.method = ExtractorKind::DefaultGreedy;
  r.total_cost = best[index_of(root)];
  r.chosen = detail::collect_choice(g, choice);
  return r;
}

namespace {

using Hist = std::vector<std::pair<std::uint32_t, double>>;

// State of the constituent-cost e-node function across one extraction.
class OcfState {
 public:
  OcfState(const EGraph& g, const NodeCosts& costs, std::vector<double>& best)
      : g_(g),
        costs_(costs),
        best_(best),
        eclass_hist_(g.id_bound()),
        stamp_of_(g.id_bound(), 0),
        value_of_(g.id_bound(), 0.0) {}

  double enode_cost(EClassId eclass, std::size_t index,
                    std::optional<EClassId> prev) {
    if (prev && *prev != eclass) flush(*prev);

    ++stamp_;
    keys_.clear();
    const ENode& node = g_.nodes(eclass)[index];
    double cost = costs_[index_of(eclass)][index];
    for (auto raw : node.children) {
      const auto child = index_of(g_.find(raw));
      double child_cost = 0.0;
      if (stamp_of_[child] == stamp_) continue;  // case 1
      if (eclass_hist_[child]) {                 // case 2
        double max_cost = 0.0;
        for (const auto& [key, value] : *eclass_hist_[child]) {
          if (stamp_of_[key] == stamp_) {
            max_cost = std::max(max_cost, value);
          } else {
            set(key, value);
          }
        }
        child_cost = std::max(best_[child] - max_cost, 0.0);
      } else {  // case 3
        child_cost = best_[child];
      }
      set(child, child_cost);
      cost += child_cost;
    }

    if (cost < best_enode_cost_) {
      best_enode_cost_ = cost;
      best_enode_hist_.clear();
      for (auto k : keys_) best_enode_hist_.emplace_back(k, value_of_[k]);
      std::sort(best_enode_hist_.begin(), best_enode_hist_.end());
    }
    return cost;
  }

  // Publishes the best e-node history of `eclass` if that e-node is the
  // class's current best.
  void flush(EClassId eclass) {
    const auto k = index_of(eclass);
    if (best_enode_cost_ < kInf && best_enode_cost_ <= best_[k]) {
      eclass_hist_[k] = best_enode_hist_;
    }
    best_enode_cost_ = kInf;
    best_enode_hist_.clear();
  }

 private:
  void set(std::uint32_t key, double value) {
    if (stamp_of_[key] != stamp_) {
      stamp_of_[key] = stamp_;
      keys_.push_back(key);
    }
    value_of_[key] = value;
  }

  const EGraph& g_;
  const NodeCosts& costs_;
  std::vector<double>& best_;
  std::vector<std::optional<Hist>> eclass_hist_;
  std::vector<std::uint32_t> stamp_of_;
  std::vector<double> value_of_;
  std::vector<std::uint32_t> keys_;
  std::uint32_t stamp_ = 0;
  double best_enode_cost_ = kInf;
  Hist best_enode_hist_;
};

}  // namespace

ExtractionResult extract_ocf_greedy(const EGraph& g, const NodeCosts& costs) {
  detail::require_clean(g);
  detail::check_costs(g, costs);
  const auto ids = g.class_ids();
  std::vector<double> best(g.id_bound(), kInf);
  std::vector<int> choice(g.id_bound(), -1);
  std::vector<std::uint32_t> mark(g.id_bound(), 0);
  std::uint32_t stamp = 0;
  OcfState state(g, costs, best);

  for (std::size_t pass = 0; pass < pass_cap(ids.size()); ++pass) {
    bool changed = false;
    std::optional<EClassId> prev;
    for (auto c : ids) {
      const auto& members = g.nodes(c);
      double pick_cost = kInf;
      int pick = -1;
      for (std::size_t i = 0; i < members.size(); ++i) {
        const double cost = state.enode_cost(c, i, prev);
        prev = c;
        if (cost < pick_cost &&
            !closes_cycle(g, c, members[i], choice, mark, stamp)) {
          pick_cost = cost;
          pick = static_cast<int>(i);
        }
      }
      if (pick >= 0 && (pick_cost != best[index_of(c)] || pick != choice[index_of(c)])) {
        best[index_of(c)] = pick_cost;
        choice[index_of(c)] = pick;
        changed = true;
      }
    }
    if (prev) state.flush(*prev);
    if (!changed) break;
  }

  const EClassId root = g.root();
  if (best[index_of(root)] == kInf) {
    throw ExtractionError("root e-class has no finite-cost program");
  }
  ExtractionResult r;
  r.method = ExtractorKind::OcfGreedy;
  r.total_cost = best[index_of(root)];
  r.chosen = detail::collect_choice(g, choice);
  return r;
}

double dag_cost(const EGraph& g, const NodeCosts& costs,
                const std::map<EClassId, ENode>& chosen) {
  // 0 = unvisited, 1 = on stack, 2 = done
  std::map<EClassId, int> state;
  double total = 0.0;
  struct Frame {
    EClassId c;
    std::size_t next;
  };
  std::vector<Frame> stack;
  auto enter = [&](EClassId c) {
    c = g.find(c);
    auto& s = state[c];
    if (s == 1) {
      throw ExtractionError("selection is cyclic through ec" +
                            std::to_string(index_of(c)));
    }
    if (s == 2) return;
    auto it = chosen.find(c);
    if (it == chosen.end()) {
      throw ExtractionError("no e-node chosen for ec" + std::to_string(index_of(c)));
    }
    total += costs[index_of(c)][detail::node_index(g, c, it->second)];
    s = 1;
    stack.push_back(Frame{c, 0});
  };
  enter(g.root());
  while (!stack.empty()) {
    Frame& f = stack.back();
    const ENode& n = chosen.at(f.c);
    if (f.next < n.children.size()) {
      const EClassId child = n.children[f.next++];
      enter(child);
    } else {
      state[f.c] = 2;
      stack.pop_back();
    }
  }
  return total;
}

void validate_extraction(const EGraph& g, const ExtractionResult& result) {
  const EClassId root = g.root();
  if (!result.chosen.count(root)) {
    throw ExtractionError("root e-class is not chosen");
  }
  for (const auto& [c, n] : result.chosen) {
    if (g.find(c) != c) {
      throw ExtractionError("selection key ec" + std::to_string(index_of(c)) +
                            " is not canonical");
    }
    detail::node_index(g, c, n);
    for (auto k : n.children) {
      if (!result.chosen.count(g.find(k))) {
        throw ExtractionError("child ec" + std::to_string(index_of(g.find(k))) +
                              " of a chosen e-node is not chosen");
      }
    }
  }
  // Acyclicity over the whole selection (Kahn's algorithm).
  std::map<EClassId, int> indegree;
  for (const auto& [c, n] : result.chosen) indegree.try_emplace(c, 0);
  for (const auto& [c, n] : result.chosen) {
    for (auto k : n.children) ++indegree[g.find(k)];
  }
  std::vector<EClassId> ready;
  for (const auto& [c, d] : indegree) {
    if (d == 0) ready.push_back(c);
  }
  std::size_t seen = 0;
  while (!ready.empty()) {
    const EClassId c = ready.back();
    ready.pop_back();
    ++seen;
    for (auto k : result.chosen.at(c).children) {
      if (--indegree[g.find(k)] == 0) ready.push_back(g.find(k));
    }
  }
  if (seen != result.chosen.size()) {
    throw ExtractionError("selection contains a cycle");
  }
}

std::string extraction_to_term(const EGraph& g, const ExtractionResult& result) {
  std::map<EClassId, std::string> memo;
  std::vector<std::pair<EClassId, bool>> stack{{g.root(), false}};
  while (!stack.empty()) {
    auto [c, expanded] = stack.back();
    stack.pop_back();
    c = g.find(c);
    if (memo.count(c)) continue;
    auto it = result.chosen.find(c);
    if (it == result.chosen.end()) {
      throw ExtractionError("no e-node chosen for ec" + std::to_string(index_of(c)));
    }
    const ENode& n = it->second;
    if (!expanded) {
      stack.emplace_back(c, true);
      for (auto k : n.children) {
        if (!memo.count(g.find(k))) stack.emplace_back(k, false);
      }
      continue;
    }
    if (n.children.empty()) {
      // Constants print as in the rule syntax.
      memo[c] = n.symbol.name == "num" && n.symbol.payload.size() == 1
                    ? std::to_string(n.symbol.payload[0])
                    : n.symbol.to_string();
      continue;
    }
    std::string s = "(" + n.symbol.to_string();
    for (auto k : n.children) {
      auto child = memo.find(g.find(k));
      if (child == memo.end()) throw ExtractionError("selection is cyclic");
      s += " " + child->second;
    }
    memo[c] = s + ")";
  }
  return memo.at(g.root());
}

ExtractionResult brute_force_oracle(const EGraph& g, const NodeCosts& costs,
                                    std::size_t max_enodes) {
  detail::require_clean(g);
  detail::check_costs(g, costs);
  if (g.size().enodes > max_enodes) {
    throw CapacityError("brute-force oracle limited to " +
                        std::to_string(max_enodes) + " e-nodes");
  }
  const EClassId root = g.root();
  const EClassId roots[] = {root};
  const auto reach = reachable_classes(g, roots);
  std::vector<EClassId> classes;
  for (auto c : g.class_ids()) {
    if (reach[index_of(c)]) classes.push_back(c);
  }

  std::vector<int> choice(g.id_bound(), 0);
  std::vector<int> best_choice;
  double best = kInf;
  std::vector<int> colour(g.id_bound(), 0);
  for (;;) {
    // Evaluate the program induced by `choice` from the root.
    std::fill(colour.begin(), colour.end(), 0);
    double total = 0.0;
    bool cyclic = false;
    struct Frame {
      EClassId c;
      std::size_t next;
    };
    std::vector<Frame> stack{{root, 0}};
    colour[index_of(root)] = 1;
    total += costs[index_of(root)][choice[index_of(root)]];
    while (!stack.empty() && !cyclic) {
      Frame& f = stack.back();
      const ENode& n = g.nodes(f.c)[choice[index_of(f.c)]];
      if (f.next == n.children.size()) {
        colour[index_of(f.c)] = 2;
        stack.pop_back();
        continue;
      }
      const EClassId k = g.find(n.children[f.next++]);
      if (colour[index_of(k)] == 1) {
        cyclic = true;
      } else if (colour[index_of(k)] == 0) {
        colour[index_of(k)] = 1;
        total += costs[index_of(k)][choice[index_of(k)]];
        stack.push_back(Frame{k, 0});
      }
    }
    if (!cyclic && total < best) {
      best = total;
      best_choice = choice;
    }

    std::size_t i = 0;
    for (; i < classes.size(); ++i) {
      auto& slot = choice[index_of(classes[i])];
      if (++slot < static_cast<int>(g.nodes(classes[i]).size())) break;
      slot = 0;
    }
    if (i == classes.size()) break;
  }
  if (best == kInf) throw InfeasibleError("no acyclic program exists");
  ExtractionResult r;
  r.method = ExtractorKind::Oracle;
  r.total_cost = best;
  r.chosen = detail::collect_choice(g, best_choice);
  return r;
}

ExtractionResult extract(ExtractorKind kind, const EGraph& g,
                         const NodeCosts& costs) {
  switch (kind) {
    case ExtractorKind::DefaultGreedy:
      return extract_default_greedy(g, costs);
    case ExtractorKind::OcfGreedy:
      return extract_ocf_greedy(g, costs);
    case ExtractorKind::Exact:
      return extract_exact(g, costs);
    case ExtractorKind::Oracle:
      return brute_force_oracle(g, costs);
  }
  throw ExtractionError("unknown extractor");
}

namespace {

std::string var_name(EClassId c, std::size_t i) {
  return "x_" + std::to_string(index_of(c)) + "_" + std::to_string(i);
}

std::vector<EClassId> distinct_children(const EGraph& g, const ENode& n) {
  std::vector<EClassId> out;
  for (auto k : n.children) out.push_back(g.find(k));
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace

std::size_t ilp_constraint_count(const EGraph& g,
                                 const std::set<ENode>& blacklist) {
  std::size_t count = 1;
  for (auto c : g.class_ids()) {
    for (const auto& n : g.nodes(c)) {
      count += distinct_children(g, n).size();
      if (blacklist.count(n)) ++count;
    }
  }
  return count;
}

void export_ilp(const EGraph& g, const NodeCosts& costs, std::ostream& out,
                const std::set<ENode>& blacklist) {
  detail::require_clean(g);
  detail::check_costs(g, costs);
  const auto ids = g.class_ids();
  out.precision(17);
  out << "\\ e-graph extraction: one binary per e-node\n";
  out << "Minimize\n obj:";
  bool first = true;
  for (auto c : ids) {
    for (std::size_t i = 0; i < g.nodes(c).size(); ++i) {
      out << (first ? " " : " + ") << costs[index_of(c)][i] << " "
          << var_name(c, i);
      first = false;
    }
  }
  out << "\nSubject To\n root:";
  const EClassId root = g.root();
  for (std::size_t i = 0; i < g.nodes(root).size(); ++i) {
    out << (i ? " + " : " ") << var_name(root, i);
  }
  out << " = 1\n";
  std::size_t row = 0;
  for (auto c : ids) {
    const auto& members = g.nodes(c);
    for (std::size_t i = 0; i < members.size(); ++i) {
      for (auto k : distinct_children(g, members[i])) {
        out << " child" << row++ << ": " << var_name(c, i);
        for (std::size_t j = 0; j < g.nodes(k).size(); ++j) {
          out << " - " << var_name(k, j);
        }
        out << " <= 0\n";
      }
    }
  }
  row = 0;
  for (auto c : ids) {
    const auto& members = g.nodes(c);
    for (std::size_t i = 0; i < members.size(); ++i) {
      if (blacklist.count(members[i])) {
        out << " cycle" << row++ << ": " << var_name(c, i) << " = 0\n";
      }
    }
  }
  out << "Binary\n";
  for (auto c : ids) {
    for (std::size_t i = 0; i < g.nodes(c).size(); ++i) {
      out << " " << var_name(c, i) << "\n";
    }
  }
  out << "End\n";
}

void export_ilp(const EGraph& g, const NodeCosts& costs,
                const std::filesystem::path& path,
                const std::set<ENode>& blacklist) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  export_ilp(g, costs, out, blacklist);
  if (!out) throw Error("failed writing " + path.string());
}

}  // namespace esat
