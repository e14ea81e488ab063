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

#include "esat/egraph.hpp"

#include <algorithm>
#include <sstream>
#include <unordered_set>
#include <utility>

#include "esat/error.hpp"
#include "hashing.hpp"

namespace esat {

std::string Symbol::to_string() const {
  if (payload.empty()) return name;
  std::string out = name + "[";
  for (std::size_t i = 0; i < payload.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(payload[i]);
  }
  return out + "]";
}

std::string to_string(const ENode& node) {
  std::string out = node.symbol.to_string();
  if (node.children.empty()) return out;
  out += "(";
  for (std::size_t i = 0; i < node.children.size(); ++i) {
    if (i) out += ",";
    out += "ec" + std::to_string(index_of(node.children[i]));
  }
  return out + ")";
}

std::uint64_t hash_symbol(const Symbol& symbol) {
  std::uint64_t h = detail::hash_string(symbol.name);
  for (auto v : symbol.payload) {
    h = detail::hash_combine(h, static_cast<std::uint64_t>(v));
  }
  return detail::hash_combine(h, symbol.payload.size());
}

std::size_t ENodeHash::operator()(const ENode& node) const {
  std::uint64_t h = hash_symbol(node.symbol);
  for (auto c : node.children) h = detail::hash_combine(h, index_of(c));
  return static_cast<std::size_t>(h);
}

void EGraph::check_id(EClassId id) const {
  if (!contains(id)) {
    throw StructuralError("invalid e-class id ec" +
                          std::to_string(index_of(id)));
  }
}

EClassId EGraph::find(EClassId id) const {
  check_id(id);
  while (parent_[index_of(id)] != id) id = parent_[index_of(id)];
  return id;
}

ENode EGraph::canonicalize(const ENode& node) const {
  ENode out = node;
  for (auto& c : out.children) c = find(c);
  return out;
}

EClassId EGraph::add(ENode node) {
  for (auto& c : node.children) c = find(c);
  if (auto it = memo_.find(node); it != memo_.end()) return find(it->second);

  const EClassId id = class_id(parent_.size());
  parent_.push_back(id);
  rank_.push_back(0);
  classes_.push_back(EClassData{{node}, true});
  memo_.emplace(std::move(node), id);
  ++enode_count_;
  ++live_classes_;
  ++version_;
  return id;
}

std::optional<EClassId> EGraph::lookup(ENode node) const {
  for (auto& c : node.children) {
    if (!contains(c)) return std::nullopt;
    c = find(c);
  }
  if (auto it = memo_.find(node); it != memo_.end()) return find(it->second);
  return std::nullopt;
}

EClassId EGraph::union_roots(EClassId a, EClassId b) {
  auto ia = index_of(a);
  auto ib = index_of(b);
  // Larger rank wins; equal ranks resolve to the lower id.
  if (rank_[ia] < rank_[ib] || (rank_[ia] == rank_[ib] && ib < ia)) {
    std::swap(a, b);
    std::swap(ia, ib);
  }
  parent_[ib] = a;
  if (rank_[ia] == rank_[ib]) ++rank_[ia];

  auto& winner = classes_[ia].nodes;
  auto& loser = classes_[ib].nodes;
  winner.insert(winner.end(), std::make_move_iterator(loser.begin()),
                std::make_move_iterator(loser.end()));
  loser.clear();
  loser.shrink_to_fit();
  classes_[ib].live = false;
  --live_classes_;
  ++version_;
  dirty_ = true;
  return a;
}

EClassId EGraph::merge(EClassId a, EClassId b) {
  a = find(a);
  b = find(b);
  if (a == b) return a;
  return union_roots(a, b);
}

std::size_t EGraph::rebuild() {
  if (!dirty_) return 0;

  std::vector<std::pair<ENode, EClassId>> entries;
  entries.reserve(enode_count_);
  for (std::size_t i = 0; i < classes_.size(); ++i) {
    if (!classes_[i].live) continue;
    for (const auto& n : classes_[i].nodes) entries.emplace_back(n, class_id(i));
  }

  std::size_t merges = 0;
  std::unordered_map<ENode, EClassId, ENodeHash> memo;
  for (;;) {
    memo.clear();
    memo.reserve(entries.size());
    bool merged = false;
    for (auto& [node, cls] : entries) {
      node = canonicalize(node);
      auto [it, inserted] = memo.try_emplace(node, find(cls));
      if (inserted) continue;
      const EClassId a = find(it->second);
      const EClassId b = find(cls);
      if (a != b) {
        it->second = union_roots(a, b);
        ++merges;
        merged = true;
      }
    }
    if (!merged) break;
  }

  for (auto& data : classes_) data.nodes.clear();
  for (auto& [node, cls] : memo) {
    cls = find(cls);
    classes_[index_of(cls)].nodes.push_back(node);
  }
  for (auto& data : classes_) {
    if (data.live) std::sort(data.nodes.begin(), data.nodes.end());
  }
  memo_ = std::move(memo);
  enode_count_ = memo_.size();
  dirty_ = false;
  return merges;
}

std::vector<EClassId> EGraph::class_ids() const {
  std::vector<EClassId> ids;
  ids.reserve(live_classes_);
  for (std::size_t i = 0; i < classes_.size(); ++i) {
    if (classes_[i].live) ids.push_back(class_id(i));
  }
  return ids;
}

const std::vector<ENode>& EGraph::nodes(EClassId id) const {
  return classes_[index_of(find(id))].nodes;
}

void EGraph::set_root(EClassId id) {
  check_id(id);
  root_ = id;
}

EClassId EGraph::root() const {
  if (!root_) throw StructuralError("e-graph has no root e-class");
  return find(*root_);
}

std::uint64_t EGraph::fingerprint() const {
  // Colour refinement over e-classes: a class colour is the multiset of its
  // nodes, each node hashed with its symbol and its children's colours.
  const auto ids = class_ids();
  std::vector<std::uint32_t> position(classes_.size(), 0);
  for (std::size_t i = 0; i < ids.size(); ++i) position[index_of(ids[i])] = i;

  std::vector<std::uint64_t> colour(ids.size(), 0);
  auto distinct = [](std::vector<std::uint64_t> v) {
    std::sort(v.begin(), v.end());
    return static_cast<std::size_t>(std::unique(v.begin(), v.end()) - v.begin());
  };

  std::size_t classes_seen = 1;
  std::vector<std::uint64_t> node_hashes;
  for (std::size_t round = 0; round <= ids.size(); ++round) {
    std::vector<std::uint64_t> next(ids.size());
    for (std::size_t i = 0; i < ids.size(); ++i) {
      node_hashes.clear();
      for (const auto& n : nodes(ids[i])) {
        std::uint64_t h = hash_symbol(n.symbol);
        for (auto c : n.children) {
          h = detail::hash_combine(h, colour[position[index_of(find(c))]]);
        }
        node_hashes.push_back(h);
      }
      std::sort(node_hashes.begin(), node_hashes.end());
      std::uint64_t h = detail::hash_combine(0x9e3779b97f4a7c15ULL, colour[i]);
      for (auto nh : node_hashes) h = detail::hash_combine(h, nh);
      next[i] = h;
    }
    colour = std::move(next);
    const std::size_t now = distinct(colour);
    if (round > 0 && now == classes_seen) break;
    classes_seen = now;
  }

  std::vector<std::uint64_t> sorted = colour;
  std::sort(sorted.begin(), sorted.end());
  std::uint64_t h = detail::hash_combine(enode_count_, live_classes_);
  for (auto c : sorted) h = detail::hash_combine(h, c);
  if (root_) h = detail::hash_combine(h, colour[position[index_of(root())]]);
  return h;
}

std::string EGraph::dump() const {
  std::ostringstream out;
  for (auto id : class_ids()) {
    out << "ec" << index_of(id) << ":";
    const auto& members = nodes(id);
    for (std::size_t i = 0; i < members.size(); ++i) {
      out << (i ? " | " : " ") << to_string(canonicalize(members[i]));
    }
    out << "\n";
  }
  return out.str();
}

std::string EGraph::to_dot() const {
  std::ostringstream out;
  out << "digraph egraph {\n  compound=true;\n  clusterrank=local;\n";
  for (auto id : class_ids()) {
    const auto k = index_of(id);
    out << "  subgraph cluster_" << k << " {\n    style=dashed;\n"
        << "    label=\"ec" << k << "\";\n";
    const auto& members = nodes(id);
    for (std::size_t i = 0; i < members.size(); ++i) {
      out << "    n" << k << "_" << i << " [shape=circle, label=\""
          << members[i].symbol.to_string() << "\"];\n";
    }
    out << "  }\n";
  }
  for (auto id : class_ids()) {
    const auto k = index_of(id);
    const auto& members = nodes(id);
    for (std::size_t i = 0; i < members.size(); ++i) {
      for (auto c : members[i].children) {
        const auto target = index_of(find(c));
        out << "  n" << k << "_" << i << " -> n" << target
            << "_0 [lhead=cluster_" << target << "];\n";
      }
    }
  }
  out << "}\n";
  return out.str();
}

}  // namespace esat
