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

#include "esat/zoo.hpp"

#include <cctype>
#include <charconv>

#include "esat/error.hpp"

namespace esat {

namespace {

void require_positive(std::string_view model, std::int64_t value,
                      std::string_view what) {
  if (value < 1) {
    throw ConfigError(std::string(model) + ": " + std::string(what) +
                      " must be positive");
  }
}

}  // namespace

TensorGraph resblock_stack(int k) {
  require_positive("resblock_stack", k, "k");
  TensorGraph g;
  const auto same = TensorOpKind::conv2d(1, Padding::Same);
  int h = g.add_input(TensorShape{{1, 16, 8, 8}});
  for (int i = 0; i < k; ++i) {
    const int w1 = g.add_weight(TensorShape{{16, 16, 3, 3}});
    const int c1 = g.add(same, {h, w1});
    const int w2 = g.add_weight(TensorShape{{16, 16, 3, 3}});
    const int c2 = g.add(same, {c1, w2});
    h = g.add(TensorOpKind::simple(OpType::Ewadd), {c1, c2});
  }
  g.add_output(g.add(TensorOpKind::simple(OpType::Relu), {h}));
  return g;
}

TensorGraph mlp(int depth, int width) {
  require_positive("mlp", depth, "depth");
  require_positive("mlp", width, "width");
  TensorGraph g;
  int h = g.add_input(TensorShape{{8, width}});
  for (int i = 0; i < depth; ++i) {
    const int w = g.add_weight(TensorShape{{width, width}});
    const int b = g.add_weight(TensorShape{{8, width}});
    const int mm = g.add(TensorOpKind::simple(OpType::Matmul), {h, w});
    const int add = g.add(TensorOpKind::simple(OpType::Ewadd), {mm, b});
    h = g.add(TensorOpKind::simple(OpType::Relu), {add});
  }
  g.add_output(h);
  return g;
}

TensorGraph attention_block(int d, int heads) {
  require_positive("attention_block", d, "d");
  require_positive("attention_block", heads, "heads");
  if (d % heads != 0) {
    throw ConfigError("attention_block: d must be divisible by heads");
  }
  const std::int64_t seq = 16;
  const std::int64_t dh = d / heads;
  const auto matmul = TensorOpKind::simple(OpType::Matmul);
  TensorGraph g;
  const int x = g.add_input(TensorShape{{seq, d}});
  int merged = -1;
  for (int h = 0; h < heads; ++h) {
    const int wq = g.add_weight(TensorShape{{d, dh}});
    const int wk = g.add_weight(TensorShape{{d, dh}});
    const int wv = g.add_weight(TensorShape{{d, dh}});
    const int q = g.add(matmul, {x, wq});
    const int k = g.add(matmul, {x, wk});
    const int v = g.add(matmul, {x, wv});
    const int kt = g.add(TensorOpKind::simple(OpType::Transpose), {k});
    const int scores = g.add(matmul, {q, kt});
    const int probs = g.add(TensorOpKind::simple(OpType::Sigmoid), {scores});
    const int out = g.add(matmul, {probs, v});
    merged = merged < 0 ? out : g.add(TensorOpKind::concat(1), {merged, out});
  }
  const int wo = g.add_weight(TensorShape{{d, d}});
  const int proj = g.add(matmul, {merged, wo});
  g.add_output(g.add(TensorOpKind::simple(OpType::Ewadd), {x, proj}));
  return g;
}

TensorGraph inception_cell(int branches) {
  require_positive("inception_cell", branches, "branches");
  TensorGraph g;
  const int x = g.add_input(TensorShape{{1, 16, 16, 16}});
  int merged = -1;
  for (int b = 0; b < branches; ++b) {
    const int w = g.add_weight(TensorShape{{8, 16, 3, 3}});
    const int conv = g.add(TensorOpKind::conv2d(1, Padding::Same), {x, w});
    const int act = g.add(TensorOpKind::simple(OpType::Relu), {conv});
    merged = merged < 0 ? act : g.add(TensorOpKind::concat(1), {merged, act});
  }
  g.add_output(merged);
  return g;
}

Pattern toy_expr_term() {
  return Pattern::app(
      "div", {Pattern::app("mul", {Pattern::app("a"), Pattern::number(2)}),
              Pattern::number(2)});
}

EClassId add_term(EGraph& g, const Pattern& term) {
  if (term.is_var()) {
    throw StructuralError("cannot insert variable ?" + term.name);
  }
  ENode node{Symbol{term.name, {}}, {}};
  if (term.params) {
    for (const auto& p : *term.params) {
      if (p.is_var()) throw StructuralError("cannot insert attribute variable");
      node.symbol.payload.push_back(std::get<std::int64_t>(p.value));
    }
  }
  for (const auto& c : term.children) node.children.push_back(add_term(g, c));
  return g.add(std::move(node));
}

EGraph toy_expr_egraph() {
  EGraph g;
  g.set_root(add_term(g, toy_expr_term()));
  return g;
}

ModelSpec parse_model_spec(std::string_view text) {
  if (text.substr(0, 4) == "zoo:") text.remove_prefix(4);
  ModelSpec spec;
  const auto open = text.find('(');
  spec.name = std::string(text.substr(0, open));
  if (spec.name.empty()) throw ConfigError("empty model name");
  if (open == std::string_view::npos) return spec;
  if (text.back() != ')') {
    throw ConfigError("model spec missing ')': " + std::string(text));
  }
  std::string_view args = text.substr(open + 1, text.size() - open - 2);
  while (!args.empty()) {
    const auto comma = args.find(',');
    std::string_view item = args.substr(0, comma);
    while (!item.empty() && std::isspace(static_cast<unsigned char>(item.front()))) {
      item.remove_prefix(1);
    }
    while (!item.empty() && std::isspace(static_cast<unsigned char>(item.back()))) {
      item.remove_suffix(1);
    }
    std::int64_t value = 0;
    auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), value);
    if (item.empty() || ec != std::errc() || ptr != item.data() + item.size()) {
      throw ConfigError("bad model argument '" + std::string(item) + "'");
    }
    spec.args.push_back(value);
    if (comma == std::string_view::npos) break;
    args.remove_prefix(comma + 1);
  }
  return spec;
}

TensorGraph zoo_generate(const ModelSpec& spec) {
  auto arg = [&](std::size_t i, std::int64_t fallback) {
    return static_cast<int>(i < spec.args.size() ? spec.args[i] : fallback);
  };
  auto max_args = [&](std::size_t n) {
    if (spec.args.size() > n) {
      throw ConfigError(spec.name + " takes at most " + std::to_string(n) +
                        " argument(s)");
    }
  };
  if (spec.name == "resblock_stack") {
    max_args(1);
    return resblock_stack(arg(0, 2));
  }
  if (spec.name == "mlp") {
    max_args(2);
    return mlp(arg(0, 3), arg(1, 32));
  }
  if (spec.name == "attention_block") {
    max_args(2);
    return attention_block(arg(0, 32), arg(1, 2));
  }
  if (spec.name == "inception_cell") {
    max_args(1);
    return inception_cell(arg(0, 3));
  }
  if (spec.name == "toy_expr") {
    throw ConfigError("toy_expr is an arithmetic term, not a tensor model");
  }
  throw ConfigError("unknown zoo model '" + spec.name + "'");
}

std::vector<std::string> zoo_tensor_models() {
  return {"resblock_stack", "mlp", "attention_block", "inception_cell"};
}

}  // namespace esat
