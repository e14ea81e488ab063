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

#ifndef ESAT_REWRITE_HPP
#define ESAT_REWRITE_HPP

#include <compare>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "esat/egraph.hpp"
#include "esat/pattern.hpp"

namespace esat {

struct Substitution {
  std::map<std::string, EClassId> classes;
  std::map<std::string, std::int64_t> params;
  /// Matched root e-class per source pattern.
  std::vector<EClassId> roots;

  friend bool operator==(const Substitution&, const Substitution&) = default;
  friend auto operator<=>(const Substitution&, const Substitution&) = default;
};

/// All matches of `pattern`, ordered by matched root id, duplicates removed.
/// The e-graph must be clean.
std::vector<Substitution> ematch(const EGraph& g, const Pattern& pattern);

/// Matches rooted at `eclass` that extend `bindings`.
std::vector<Substitution> ematch_at(const EGraph& g, const Pattern& pattern,
                                    EClassId eclass,
                                    const Substitution& bindings = {});

namespace detail {
struct PlannedNode;
}

class TermView;

struct NodeView {
  const Symbol* symbol = nullptr;
  std::vector<TermView> children;
};

/// Read-only handle on either an existing e-class or a node that a rule
/// application is about to insert. Languages use it to type-check targets.
class TermView {
 public:
  TermView(const EGraph* g, EClassId id) : g_(g), eclass_(id) {}
  TermView(const EGraph* g, const detail::PlannedNode* planned)
      : g_(g), planned_(planned) {}

  bool is_planned() const { return planned_ != nullptr; }
  std::optional<EClassId> eclass() const;

  /// First member symbol; for planned nodes, the node's own symbol.
  const Symbol& representative() const;
  std::vector<NodeView> alternatives() const;

 private:
  const EGraph* g_;
  EClassId eclass_{};
  const detail::PlannedNode* planned_ = nullptr;
};

namespace detail {
struct PlannedNode {
  Symbol symbol;
  std::vector<TermView> children;
};
}  // namespace detail

/// Hook that turns a target pattern head into a concrete symbol.
class Language {
 public:
  virtual ~Language() = default;

  /// Completes the payload of a target node from its instantiated attribute
  /// list and children. std::nullopt rejects the instantiation.
  virtual std::optional<Symbol> make_symbol(
      const std::string& name, const std::vector<std::int64_t>& params,
      std::span<const TermView> children) const = 0;

  /// Whether a target term may be merged into a matched e-class.
  virtual bool can_merge(const TermView& target, const TermView& root) const;
};

/// Payload equals the instantiated attribute list; accepts everything.
const Language& generic_language();

struct ApplyReport {
  int rule_id = -1;
  std::size_t matches_found = 0;
  bool changed = false;
  std::size_t nodes_after = 0;
  std::size_t classes_after = 0;
  bool hit_node_limit = false;
  std::size_t cycles_filtered = 0;
  /// Instantiations refused by the language (ill-typed).
  std::size_t rejected = 0;
};

/// Applies every match of `rule`, then rebuilds once. Matches are collected
/// before anything is inserted. `node_limit` of 0 disables the limit check.
ApplyReport apply_rule(EGraph& g, const Rule& rule, std::size_t node_limit = 0,
                       const Language& language = generic_language());

/// True iff `target` is reachable from one of `children` (or is one of
/// them) along child edges.
bool would_create_cycle(const EGraph& g, std::span<const EClassId> children,
                        EClassId target);

bool is_rule_applicable(const EGraph& g, const Rule& rule);

/// True iff no rule changes the e-graph. Works on a copy.
bool is_saturated(const EGraph& g, std::span<const Rule> rules,
                  std::size_t node_limit = 0,
                  const Language& language = generic_language());

/// Classes reachable from `start` (inclusive) along child edges.
std::vector<bool> reachable_classes(const EGraph& g,
                                    std::span<const EClassId> start);

}  // namespace esat

#endif  // ESAT_REWRITE_HPP
