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

#ifndef ESAT_EGRAPH_HPP
#define ESAT_EGRAPH_HPP

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace esat {

/// Dense e-class identifier. Only ids returned by find() are canonical.
enum class EClassId : std::uint32_t {};

constexpr std::uint32_t index_of(EClassId id) {
  return static_cast<std::uint32_t>(id);
}

constexpr EClassId class_id(std::size_t index) {
  return static_cast<EClassId>(static_cast<std::uint32_t>(index));
}

/// Operator of the alphabet. The payload carries integer attributes
/// (constants, tensor parameters, shapes) and takes part in equality.
struct Symbol {
  std::string name;
  std::vector<std::int64_t> payload;

  friend bool operator==(const Symbol&, const Symbol&) = default;
  friend std::strong_ordering operator<=>(const Symbol&,
                                          const Symbol&) = default;

  std::string to_string() const;
};

struct ENode {
  Symbol symbol;
  std::vector<EClassId> children;

  std::size_t arity() const { return children.size(); }

  friend bool operator==(const ENode&, const ENode&) = default;
  friend std::strong_ordering operator<=>(const ENode&,
                                          const ENode&) = default;
};

std::uint64_t hash_symbol(const Symbol& symbol);

struct ENodeHash {
  std::size_t operator()(const ENode& node) const;
};

struct GraphSize {
  std::size_t enodes = 0;
  std::size_t eclasses = 0;

  friend bool operator==(const GraphSize&, const GraphSize&) = default;
};

/// Hash-consed e-graph with a union-find over e-class ids.
///
/// Unions are cheap and only mark the graph dirty; congruence and the
/// hash-cons invariant are restored by an explicit rebuild(). The canonical
/// representative of a merged set is the root with the larger rank, ties
/// going to the lower id. Copying an EGraph yields an independent snapshot.
class EGraph {
 public:
  EGraph() = default;

  /// Inserts `node` (children are canonicalized first) and returns its
  /// e-class. Returns the existing e-class when a congruent node is present.
  EClassId add(ENode node);

  /// Looks up a node without inserting it.
  std::optional<EClassId> lookup(ENode node) const;

  /// Merges the e-classes of `a` and `b`; returns the canonical id.
  EClassId merge(EClassId a, EClassId b);

  /// Restores congruence closure and the hash-cons. Returns the number of
  /// merges triggered by congruence; a second call returns 0.
  std::size_t rebuild();

  EClassId find(EClassId id) const;
  bool contains(EClassId id) const { return index_of(id) < parent_.size(); }
  bool is_clean() const { return !dirty_; }

  GraphSize size() const { return {enode_count_, live_classes_}; }
  bool empty() const { return live_classes_ == 0; }

  /// Canonical e-class ids in ascending order.
  std::vector<EClassId> class_ids() const;
  /// Member e-nodes of a canonical e-class; sorted after rebuild().
  const std::vector<ENode>& nodes(EClassId id) const;
  /// One past the largest e-class id ever allocated.
  std::size_t id_bound() const { return parent_.size(); }

  void set_root(EClassId id);
  bool has_root() const { return root_.has_value(); }
  EClassId root() const;

  /// Monotone counter bumped by every insertion of a fresh e-node and every
  /// merge of two distinct e-classes.
  std::uint64_t version() const { return version_; }

  /// Structural hash that does not depend on e-class numbering.
  std::uint64_t fingerprint() const;

  EGraph snapshot() const { return *this; }

  /// One line per e-class: `ec<k>: sym(children...) | ...`.
  std::string dump() const;
  std::string to_dot() const;

 private:
  struct EClassData {
    std::vector<ENode> nodes;
    bool live = true;
  };

  ENode canonicalize(const ENode& node) const;
  EClassId union_roots(EClassId a, EClassId b);
  void check_id(EClassId id) const;

  std::vector<EClassId> parent_;
  std::vector<std::uint32_t> rank_;
  std::vector<EClassData> classes_;
  std::unordered_map<ENode, EClassId, ENodeHash> memo_;
  std::optional<EClassId> root_;
  std::size_t enode_count_ = 0;
  std::size_t live_classes_ = 0;
  std::uint64_t version_ = 0;
  bool dirty_ = false;
};

std::string to_string(const ENode& node);

}  // namespace esat

#endif  // ESAT_EGRAPH_HPP
