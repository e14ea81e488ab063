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

#ifndef ESAT_SRC_EXTRACT_DETAIL_HPP
#define ESAT_SRC_EXTRACT_DETAIL_HPP

#include <map>
#include <vector>

#include "esat/costs.hpp"
#include "esat/egraph.hpp"

namespace esat::detail {

void require_clean(const EGraph& g);
void check_costs(const EGraph& g, const NodeCosts& costs);
/// Position of `node` in g.nodes(c); throws if it is not a member.
std::size_t node_index(const EGraph& g, EClassId c, const ENode& node);
/// Selection reachable from the root given a per-class node index.
std::map<EClassId, ENode> collect_choice(const EGraph& g,
                                         const std::vector<int>& choice);

}  // namespace esat::detail

#endif  // ESAT_SRC_EXTRACT_DETAIL_HPP
