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

#include "esat/rewrite.hpp"

#include <algorithm>
#include <set>

#include "esat/error.hpp"

namespace esat {

namespace {

bool match_params(const Pattern& pattern, const Symbol& symbol,
                  Substitution& s) {
  if (!pattern.params) return true;
  const auto& params = *pattern.params;
  if (symbol.payload.size() < params.size()) return false;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const std::int64_t actual = symbol.payload[i];
    if (params[i].is_var()) {
      const auto& name = std::get<std::string>(params[i].value);
      auto [it, inserted] = s.params.try_emplace(name, actual);
      if (!inserted && it->second != actual) return false;
    } else if (std::get<std::int64_t>(params[i].value) != actual) {
      return false;
    }
  }
  return true;
}

void match(const EGraph& g, const Pattern& pattern, EClassId eclass,
           const Substitution& s, std::vector<Substitution>& out) {
  eclass = g.find(eclass);
  if (pattern.is_var()) {
    auto it = s.classes.find(pattern.name);
    if (it == s.classes.end()) {
      Substitution next = s;
      next.classes.emplace(pattern.name, eclass);
      out.push_back(std::move(next));
    } else if (g.find(it->second) == eclass) {
      out.push_back(s);
    }
    return;
  }
  for (const auto& node : g.nodes(eclass)) {
    if (node.symbol.name != pattern.name ||
        node.arity() != pattern.children.size()) {
      continue;
    }
    Substitution base = s;
    if (!match_params(pattern, node.symbol, base)) continue;
    std::vector<Substitution> partial{std::move(base)};
    for (std::size_t i = 0; i < node.arity() && !partial.empty(); ++i) {
      std::vector<Substitution> next;
      for (const auto& p : partial) {
        match(g, pattern.children[i], node.children[i], p, next);
      }
      partial = std::move(next);
    }
    for (auto& p : partial) out.push_back(std::move(p));
  }
}

}  // namespace

std::vector<Substitution> ematch_at(const EGraph& g, const Pattern& pattern,
                                    EClassId eclass,
                                    const Substitution& bindings) {
  std::vector<Substitution> out;
  match(g, pattern, eclass, bindings, out);
  const EClassId root = g.find(eclass);
  for (auto& s : out) s.roots.push_back(root);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<Substitution> ematch(const EGraph& g, const Pattern& pattern) {
  std::vector<Substitution> out;
  for (auto id : g.class_ids()) {
    auto found = ematch_at(g, pattern, id);
    out.insert(out.end(), std::make_move_iterator(found.begin()),
               std::make_move_iterator(found.end()));
  }
  return out;
}

std::optional<EClassId> TermView::eclass() const {
  if (planned_) return std::nullopt;
  return g_->find(eclass_);
}

const Symbol& TermView::representative() const {
  if (planned_) return planned_->symbol;
  return g_->nodes(eclass_).front().symbol;
}

std::vector<NodeView> TermView::alternatives() const {
  std::vector<NodeView> out;
  if (planned_) {
    out.push_back(NodeView{&planned_->symbol, planned_->children});
    return out;
  }
  for (const auto& node : g_->nodes(eclass_)) {
    NodeView view{&node.symbol, {}};
    for (auto c : node.children) view.children.emplace_back(g_, g_->find(c));
    out.push_back(std::move(view));
  }
  return out;
}

bool Language::can_merge(const TermView&, const TermView&) const {
  return true;
}

namespace {

class GenericLanguage final : public Language {
 public:
  std::optional<Symbol> make_symbol(
      const std::string& name, const std::vector<std::int64_t>& params,
      std::span<const TermView>) const override {
    return Symbol{name, params};
  }
};

}  // namespace

const Language& generic_language() {
  static const GenericLanguage language;
  return language;
}

std::vector<bool> reachable_classes(const EGraph& g,
                                    std::span<const EClassId> start) {
  std::vector<bool> seen(g.id_bound(), false);
  std::vector<EClassId> stack;
  for (auto s : start) {
    const EClassId c = g.find(s);
    if (!seen[index_of(c)]) {
      seen[index_of(c)] = true;
      stack.push_back(c);
    }
  }
  while (!stack.empty()) {
    const EClassId c = stack.back();
    stack.pop_back();
    for (const auto& node : g.nodes(c)) {
      for (auto child : node.children) {
        const EClassId k = g.find(child);
        if (!seen[index_of(k)]) {
          seen[index_of(k)] = true;
          stack.push_back(k);
        }
      }
    }
  }
  return seen;
}

bool would_create_cycle(const EGraph& g, std::span<const EClassId> children,
                        EClassId target) {
  target = g.find(target);
  std::vector<bool> seen(g.id_bound(), false);
  std::vector<EClassId> stack;
  for (auto s : children) {
    const EClassId c = g.find(s);
    if (c == target) return true;
    if (!seen[index_of(c)]) {
      seen[index_of(c)] = true;
      stack.push_back(c);
    }
  }
  while (!stack.empty()) {
    const EClassId c = stack.back();
    stack.pop_back();
    for (const auto& node : g.nodes(c)) {
      for (auto child : node.children) {
        const EClassId k = g.find(child);
        if (k == target) return true;
        if (!seen[index_of(k)]) {
          seen[index_of(k)] = true;
          stack.push_back(k);
        }
      }
    }
  }
  return false;
}

namespace {

class Instantiator {
 public:
  Instantiator(EGraph& g, const Language& language)
      : g_(g), language_(language) {}

  // nullopt when the language rejects some node of the target.
  std::optional<TermView> plan(const Pattern& pattern, const Substitution& s) {
    if (pattern.is_var()) {
      auto it = s.classes.find(pattern.name);
      if (it == s.classes.end()) {
        throw StructuralError("unbound variable ?" + pattern.name);
      }
      return TermView(&g_, g_.find(it->second));
    }
    std::vector<TermView> children;
    children.reserve(pattern.children.size());
    for (const auto& c : pattern.children) {
      auto view = plan(c, s);
      if (!view) return std::nullopt;
      children.push_back(*view);
    }
    std::vector<std::int64_t> params;
    if (pattern.params) {
      for (const auto& p : *pattern.params) {
        if (p.is_var()) {
          const auto& name = std::get<std::string>(p.value);
          auto it = s.params.find(name);
          if (it == s.params.end()) {
            throw StructuralError("unbound attribute ?" + name);
          }
          params.push_back(it->second);
        } else {
          params.push_back(std::get<std::int64_t>(p.value));
        }
      }
    }
    auto symbol = language_.make_symbol(pattern.name, params, children);
    if (!symbol) return std::nullopt;

    if (std::all_of(children.begin(), children.end(),
                    [](const TermView& v) { return !v.is_planned(); })) {
      ENode node{*symbol, {}};
      for (const auto& c : children) node.children.push_back(*c.eclass());
      if (auto existing = g_.lookup(std::move(node))) {
        return TermView(&g_, *existing);
      }
    }
    planned_.push_back(detail::PlannedNode{std::move(*symbol),
                                           std::move(children)});
    return TermView(&g_, &planned_.back());
  }

  // Existing e-classes directly below the planned part of `view`.
  void frontier(const TermView& view, std::vector<EClassId>& out) const {
    if (!view.is_planned()) {
      out.push_back(*view.eclass());
      return;
    }
    for (const auto& alt : view.alternatives()) {
      for (const auto& c : alt.children) frontier(c, out);
    }
  }

  EClassId commit(const TermView& view) {
    if (!view.is_planned()) return *view.eclass();
    const auto alts = view.alternatives();
    ENode node{*alts.front().symbol, {}};
    for (const auto& c : alts.front().children) {
      node.children.push_back(commit(c));
    }
    return g_.add(std::move(node));
  }

  void reset() { planned_.clear(); }

 private:
  EGraph& g_;
  const Language& language_;
  std::deque<detail::PlannedNode> planned_;
};

bool roots_distinct(const std::vector<EClassId>& roots) {
  std::set<EClassId> unique(roots.begin(), roots.end());
  return unique.size() == roots.size();
}

std::vector<Substitution> match_rule(const EGraph& g, const Rule& rule) {
  std::vector<Substitution> combos = ematch(g, rule.sources.front());
  const auto ids = g.class_ids();
  for (std::size_t k = 1; k < rule.sources.size() && !combos.empty(); ++k) {
    std::vector<Substitution> next;
    for (const auto& s : combos) {
      for (auto id : ids) {
        auto found = ematch_at(g, rule.sources[k], id, s);
        next.insert(next.end(), std::make_move_iterator(found.begin()),
                    std::make_move_iterator(found.end()));
      }
    }
    combos = std::move(next);
  }
  if (rule.sources.size() > 1) {
    std::erase_if(combos, [](const Substitution& s) {
      return !roots_distinct(s.roots);
    });
  }
  return combos;
}

}  // namespace

ApplyReport apply_rule(EGraph& g, const Rule& rule, std::size_t node_limit,
                       const Language& language) {
  if (rule.sources.empty() || rule.sources.size() != rule.targets.size()) {
    throw StructuralError("rule " + std::to_string(rule.id) +
                          " has mismatched sources and targets");
  }
  g.rebuild();

  ApplyReport report;
  report.rule_id = rule.id;
  const auto version_before = g.version();
  const auto size_before = g.size();
  const auto combos = match_rule(g, rule);
  report.matches_found = combos.size();

  std::uint64_t fingerprint_before = 0;
  bool have_fingerprint = false;
  if (!combos.empty()) {
    fingerprint_before = g.fingerprint();
    have_fingerprint = true;
  }

  Instantiator inst(g, language);
  for (const auto& s : combos) {
    inst.reset();
    std::vector<std::optional<TermView>> targets;
    bool rejected = false;
    for (const auto& t : rule.targets) {
      targets.push_back(inst.plan(t, s));
      if (!targets.back()) {
        rejected = true;
        break;
      }
    }
    if (!rejected) {
      for (std::size_t k = 0; k < targets.size(); ++k) {
        if (!language.can_merge(*targets[k], TermView(&g, s.roots[k]))) {
          rejected = true;
          break;
        }
      }
    }
    if (rejected) {
      ++report.rejected;
      continue;
    }

    bool cyclic = false;
    for (std::size_t k = 0; k < targets.size() && !cyclic; ++k) {
      const TermView& t = *targets[k];
      const EClassId root = g.find(s.roots[k]);
      if (!t.is_planned()) {
        const EClassId e = *t.eclass();
        const EClassId single[] = {e};
        cyclic = e != root && would_create_cycle(g, single, root);
      } else {
        std::vector<EClassId> edge;
        inst.frontier(t, edge);
        cyclic = would_create_cycle(g, edge, root);
      }
    }
    if (cyclic) {
      ++report.cycles_filtered;
      continue;
    }

    for (std::size_t k = 0; k < targets.size(); ++k) {
      const EClassId id = inst.commit(*targets[k]);
      g.merge(id, s.roots[k]);
    }
  }
  g.rebuild();

  const auto size_after = g.size();
  report.nodes_after = size_after.enodes;
  report.classes_after = size_after.eclasses;
  if (g.version() != version_before) {
    report.changed = !(size_after == size_before) || !have_fingerprint ||
                     g.fingerprint() != fingerprint_before;
  }
  report.hit_node_limit = node_limit > 0 && size_after.enodes >= node_limit;
  return report;
}

bool is_rule_applicable(const EGraph& g, const Rule& rule) {
  const auto ids = g.class_ids();
  for (const auto& source : rule.sources) {
    const bool present = std::any_of(ids.begin(), ids.end(), [&](EClassId id) {
      return !ematch_at(g, source, id).empty();
    });
    if (!present) return false;
  }
  return true;
}

bool is_saturated(const EGraph& g, std::span<const Rule> rules,
                  std::size_t node_limit, const Language& language) {
  EGraph copy = g.snapshot();
  for (const auto& rule : rules) {
    if (apply_rule(copy, rule, node_limit, language).changed) return false;
  }
  return true;
}

}  // namespace esat
