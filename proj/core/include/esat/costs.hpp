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

#ifndef ESAT_COSTS_HPP
#define ESAT_COSTS_HPP

#include <map>
#include <string>
#include <vector>

#include "esat/egraph.hpp"

namespace esat {

/// Operator cost of every e-node: costs[index_of(c)][i] belongs to
/// g.nodes(c)[i]. Non-canonical slots are empty.
using NodeCosts = std::vector<std::vector<double>>;

class CostModel {
 public:
  virtual ~CostModel() = default;
  virtual NodeCosts node_costs(const EGraph& g) const = 0;
};

/// Per-symbol-name costs with a default; AST size when every cost is 1.
class SymbolCostModel final : public CostModel {
 public:
  explicit SymbolCostModel(double fallback = 1.0,
                           std::map<std::string, double> costs = {})
      : fallback_(fallback), costs_(std::move(costs)) {}

  NodeCosts node_costs(const EGraph& g) const override {
    NodeCosts out(g.id_bound());
    for (auto c : g.class_ids()) {
      auto& slot = out[index_of(c)];
      for (const auto& n : g.nodes(c)) {
        auto it = costs_.find(n.symbol.name);
        slot.push_back(it == costs_.end() ? fallback_ : it->second);
      }
    }
    return out;
  }

 private:
  double fallback_;
  std::map<std::string, double> costs_;
};

}  // namespace esat

#endif  // ESAT_COSTS_HPP
