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

#ifndef ESAT_ZOO_HPP
#define ESAT_ZOO_HPP

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "esat/egraph.hpp"
#include "esat/pattern.hpp"
#include "esat/tensor.hpp"

namespace esat {

// Small generated models. Weights are explicit leaves with distinct uids.

/// k residual blocks on a [1,16,8,8] input, each relu-free:
///   c1 = conv(h, w), c2 = conv(c1, w'), h = ewadd(c1, c2)
/// followed by one relu.
TensorGraph resblock_stack(int k);

/// depth x relu(ewadd(matmul(h, W), b)) on an [8, width] input.
TensorGraph mlp(int depth, int width);

/// Multi-head self-attention with a residual add; sequence length 16.
/// `d` must be divisible by `heads`.
TensorGraph attention_block(int d, int heads);

/// `branches` parallel relu(conv3x3) on one input, concatenated on channels.
TensorGraph inception_cell(int branches);

/// The arithmetic term (div (mul a 2) 2).
Pattern toy_expr_term();

/// Inserts a ground pattern; returns its e-class. Numbers become num[k].
EClassId add_term(EGraph& g, const Pattern& term);

/// E-graph of toy_expr_term() with its root set.
EGraph toy_expr_egraph();

struct ModelSpec {
  std::string name;
  std::vector<std::int64_t> args;
};

/// Parses `name`, `name(1,2)` or `zoo:name(1,2)`.
ModelSpec parse_model_spec(std::string_view text);

/// Generates a tensor model; toy_expr is not a tensor model. Missing
/// arguments take defaults.
TensorGraph zoo_generate(const ModelSpec& spec);

std::vector<std::string> zoo_tensor_models();

}  // namespace esat

#endif  // ESAT_ZOO_HPP
