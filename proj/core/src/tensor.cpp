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

#include "esat/tensor.hpp"

#include <algorithm>
#include <functional>
#include <numeric>

#include "esat/error.hpp"

namespace esat {

std::int64_t TensorShape::elements() const {
  return std::accumulate(dims.begin(), dims.end(), std::int64_t{1},
                         std::multiplies<>());
}

std::string TensorShape::to_string() const {
  std::string out = "[";
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(dims[i]);
  }
  return out + "]";
}

namespace {

struct OpInfo {
  OpType type;
  std::string_view name;
  std::size_t arity;
  std::size_t params;
};

constexpr OpInfo kOps[] = {
    {OpType::Input, "input", 0, 1},     {OpType::Weight, "weight", 0, 1},
    {OpType::Ewadd, "ewadd", 2, 0},     {OpType::Ewmul, "ewmul", 2, 0},
    {OpType::Matmul, "matmul", 2, 0},   {OpType::Conv2d, "conv2d", 2, 3},
    {OpType::Relu, "relu", 1, 0},       {OpType::Tanh, "tanh", 1, 0},
    {OpType::Sigmoid, "sigmoid", 1, 0}, {OpType::Concat, "concat", 2, 1},
    {OpType::Split, "split", 1, 2},     {OpType::Maxpool, "maxpool", 1, 2},
    {OpType::Transpose, "transpose", 1, 0},
    {OpType::Noop, "noop", 2, 0},
};

const OpInfo& info(OpType type) {
  for (const auto& op : kOps) {
    if (op.type == type) return op;
  }
  throw StructuralError("unknown operator type");
}

}  // namespace

std::string_view op_name(OpType type) { return info(type).name; }

std::optional<OpType> parse_op(std::string_view name) {
  for (const auto& op : kOps) {
    if (op.name == name) return op.type;
  }
  return std::nullopt;
}

std::size_t op_arity(OpType type) { return info(type).arity; }
std::size_t op_param_count(OpType type) { return info(type).params; }

TensorOpKind TensorOpKind::input(std::int64_t uid) {
  TensorOpKind k;
  k.type = OpType::Input;
  k.uid = uid;
  return k;
}

TensorOpKind TensorOpKind::weight(std::int64_t uid) {
  TensorOpKind k;
  k.type = OpType::Weight;
  k.uid = uid;
  return k;
}

TensorOpKind TensorOpKind::simple(OpType type) {
  TensorOpKind k;
  k.type = type;
  return k;
}

TensorOpKind TensorOpKind::conv2d(std::int64_t stride, Padding padding,
                                  Activation activation) {
  TensorOpKind k;
  k.type = OpType::Conv2d;
  k.stride = stride;
  k.padding = padding;
  k.activation = activation;
  return k;
}

TensorOpKind TensorOpKind::concat(std::int64_t axis) {
  TensorOpKind k;
  k.type = OpType::Concat;
  k.axis = axis;
  return k;
}

TensorOpKind TensorOpKind::split(std::int64_t axis, std::int64_t index,
                                 std::int64_t size) {
  TensorOpKind k;
  k.type = OpType::Split;
  k.axis = axis;
  k.index = index;
  k.size = size;
  return k;
}

TensorOpKind TensorOpKind::maxpool(std::int64_t kernel, std::int64_t stride) {
  TensorOpKind k;
  k.type = OpType::Maxpool;
  k.kernel = kernel;
  k.stride = stride;
  return k;
}

std::vector<std::int64_t> TensorOpKind::params() const {
  switch (type) {
    case OpType::Input:
    case OpType::Weight:
      return {uid};
    case OpType::Conv2d:
      return {stride, static_cast<std::int64_t>(padding),
              static_cast<std::int64_t>(activation)};
    case OpType::Concat:
      return {axis};
    case OpType::Split:
      return {axis, index};
    case OpType::Maxpool:
      return {kernel, stride};
    default:
      return {};
  }
}

namespace {

[[noreturn]] void shape_fail(OpType type, const std::string& message) {
  throw ShapeError(std::string(op_name(type)) + ": " + message);
}

void require_same(OpType type, const TensorShape& a, const TensorShape& b) {
  if (!(a == b)) {
    shape_fail(type, "shape mismatch " + a.to_string() + " vs " +
                         b.to_string());
  }
}

std::int64_t conv_extent(std::int64_t in, std::int64_t k, std::int64_t stride,
                         Padding padding, OpType type) {
  if (padding == Padding::Same) return (in + stride - 1) / stride;
  if (in < k) shape_fail(type, "window larger than input");
  return (in - k) / stride + 1;
}

}  // namespace

TensorShape infer_shape(const TensorOpKind& kind,
                        std::span<const TensorShape> inputs) {
  const OpType t = kind.type;
  if (inputs.size() != kind.arity()) {
    shape_fail(t, "expected " + std::to_string(kind.arity()) +
                      " input(s), got " + std::to_string(inputs.size()));
  }
  for (const auto& s : inputs) {
    if (s.dims.empty() || s.rank() > 4) shape_fail(t, "rank out of range");
    for (auto d : s.dims) {
      if (d < 1) shape_fail(t, "non-positive dimension");
    }
  }
  switch (t) {
    case OpType::Input:
    case OpType::Weight:
      shape_fail(t, "leaf shapes are not inferred");
    case OpType::Ewadd:
    case OpType::Ewmul:
      require_same(t, inputs[0], inputs[1]);
      return inputs[0];
    case OpType::Relu:
    case OpType::Tanh:
    case OpType::Sigmoid:
      return inputs[0];
    case OpType::Noop:
      return inputs[0];
    case OpType::Matmul: {
      const auto& a = inputs[0].dims;
      const auto& b = inputs[1].dims;
      if (a.size() != 2 || b.size() != 2) shape_fail(t, "operands must be 2-D");
      if (a[1] != b[0]) {
        shape_fail(t, "inner dimensions differ " + inputs[0].to_string() +
                          " x " + inputs[1].to_string());
      }
      return TensorShape{{a[0], b[1]}};
    }
    case OpType::Transpose: {
      const auto& a = inputs[0].dims;
      if (a.size() != 2) shape_fail(t, "operand must be 2-D");
      return TensorShape{{a[1], a[0]}};
    }
    case OpType::Conv2d: {
      const auto& x = inputs[0].dims;
      const auto& w = inputs[1].dims;
      if (x.size() != 4 || w.size() != 4) {
        shape_fail(t, "expects NCHW input and OIHW weight");
      }
      if (x[1] != w[1]) shape_fail(t, "channel mismatch");
      if (kind.stride < 1) shape_fail(t, "stride must be positive");
      return TensorShape{{x[0], w[0],
                          conv_extent(x[2], w[2], kind.stride, kind.padding, t),
                          conv_extent(x[3], w[3], kind.stride, kind.padding,
                                      t)}};
    }
    case OpType::Maxpool: {
      const auto& x = inputs[0].dims;
      if (x.size() != 4) shape_fail(t, "expects NCHW input");
      if (kind.kernel < 1 || kind.stride < 1) shape_fail(t, "bad window");
      return TensorShape{
          {x[0], x[1],
           conv_extent(x[2], kind.kernel, kind.stride, Padding::Valid, t),
           conv_extent(x[3], kind.kernel, kind.stride, Padding::Valid, t)}};
    }
    case OpType::Concat: {
      const auto& a = inputs[0].dims;
      const auto& b = inputs[1].dims;
      if (a.size() != b.size()) shape_fail(t, "rank mismatch");
      if (kind.axis < 0 || kind.axis >= static_cast<std::int64_t>(a.size())) {
        shape_fail(t, "axis out of range");
      }
      TensorShape out{a};
      for (std::size_t i = 0; i < a.size(); ++i) {
        if (static_cast<std::int64_t>(i) == kind.axis) {
          out.dims[i] = a[i] + b[i];
        } else if (a[i] != b[i]) {
          shape_fail(t, "non-axis dimensions differ");
        }
      }
      return out;
    }
    case OpType::Split: {
      const auto& a = inputs[0].dims;
      if (kind.axis < 0 || kind.axis >= static_cast<std::int64_t>(a.size())) {
        shape_fail(t, "axis out of range");
      }
      if (kind.index != 0 && kind.index != 1) shape_fail(t, "index must be 0 or 1");
      if (kind.size < 1 || kind.size >= a[kind.axis]) {
        shape_fail(t, "part size out of range");
      }
      TensorShape out{a};
      out.dims[kind.axis] = kind.size;
      return out;
    }
  }
  shape_fail(t, "unsupported operator");
}

Symbol tensor_symbol(const TensorOpKind& kind, const TensorShape& shape) {
  Symbol s{std::string(op_name(kind.type)), kind.params()};
  s.payload.insert(s.payload.end(), shape.dims.begin(), shape.dims.end());
  return s;
}

std::pair<TensorOpKind, TensorShape> decode_symbol(const Symbol& symbol) {
  const auto type = parse_op(symbol.name);
  if (!type) throw StructuralError("unknown tensor operator " + symbol.name);
  const std::size_t np = op_param_count(*type);
  if (symbol.payload.size() < np + 1) {
    throw StructuralError("malformed payload for " + symbol.to_string());
  }
  const auto& p = symbol.payload;
  TensorOpKind kind = TensorOpKind::simple(*type);
  switch (*type) {
    case OpType::Input:
    case OpType::Weight:
      kind.uid = p[0];
      break;
    case OpType::Conv2d:
      kind.stride = p[0];
      kind.padding = static_cast<Padding>(p[1]);
      kind.activation = static_cast<Activation>(p[2]);
      break;
    case OpType::Concat:
      kind.axis = p[0];
      break;
    case OpType::Split:
      kind.axis = p[0];
      kind.index = p[1];
      break;
    case OpType::Maxpool:
      kind.kernel = p[0];
      kind.stride = p[1];
      break;
    default:
      break;
  }
  TensorShape shape{{p.begin() + static_cast<std::ptrdiff_t>(np), p.end()}};
  if (*type == OpType::Split) {
    if (kind.axis < 0 || kind.axis >= static_cast<std::int64_t>(shape.rank())) {
      throw StructuralError("malformed split payload " + symbol.to_string());
    }
    kind.size = shape.dims[kind.axis];
  }
  return {kind, shape};
}

TensorShape symbol_shape(const Symbol& symbol) {
  return decode_symbol(symbol).second;
}

int TensorGraph::add_input(TensorShape shape) {
  return add_leaf(TensorOpKind::input(next_uid_), std::move(shape));
}

int TensorGraph::add_weight(TensorShape shape) {
  return add_leaf(TensorOpKind::weight(next_uid_), std::move(shape));
}

int TensorGraph::add_leaf(TensorOpKind kind, TensorShape shape) {
  if (!kind.is_leaf()) {
    throw StructuralError("add_leaf expects an input or weight");
  }
  if (shape.dims.empty() || shape.rank() > 4) {
    throw ShapeError(std::string(op_name(kind.type)) + ": rank out of range");
  }
  for (auto d : shape.dims) {
    if (d < 1) {
      throw ShapeError(std::string(op_name(kind.type)) +
                       ": non-positive dimension");
    }
  }
  next_uid_ = std::max(next_uid_, kind.uid + 1);
  const int id = static_cast<int>(nodes_.size());
  nodes_.push_back(TensorNode{id, kind, {}, std::move(shape)});
  return id;
}

int TensorGraph::add(TensorOpKind kind, std::vector<int> inputs) {
  if (kind.is_leaf()) {
    throw StructuralError("use add_input/add_weight for leaves");
  }
  std::vector<TensorShape> shapes;
  for (int in : inputs) shapes.push_back(node(in).shape);
  TensorShape shape = infer_shape(kind, shapes);
  const int id = static_cast<int>(nodes_.size());
  nodes_.push_back(TensorNode{id, kind, std::move(inputs), std::move(shape)});
  return id;
}

void TensorGraph::add_output(int id) {
  node(id);
  outputs_.push_back(id);
}

void TensorGraph::set_outputs(std::vector<int> outputs) {
  for (int id : outputs) node(id);
  outputs_ = std::move(outputs);
}

const TensorNode& TensorGraph::node(int id) const {
  if (id < 0 || id >= static_cast<int>(nodes_.size())) {
    throw StructuralError("invalid tensor node id " + std::to_string(id));
  }
  return nodes_[id];
}

void TensorGraph::validate() const {
  for (const auto& n : nodes_) {
    if (n.inputs.size() != n.kind.arity()) {
      throw StructuralError("node " + std::to_string(n.id) + ": arity mismatch");
    }
    std::vector<TensorShape> shapes;
    for (int in : n.inputs) {
      if (in < 0 || in >= n.id) {
        throw StructuralError("node " + std::to_string(n.id) +
                              ": input does not precede its user");
      }
      shapes.push_back(nodes_[in].shape);
    }
    if (!n.kind.is_leaf()) {
      if (!(infer_shape(n.kind, shapes) == n.shape)) {
        throw ShapeError("node " + std::to_string(n.id) +
                         ": stored shape disagrees with inference");
      }
    }
  }
  if (!nodes_.empty() && outputs_.empty()) {
    throw StructuralError("graph has no outputs");
  }
}

EGraph graph_to_egraph(const TensorGraph& graph) {
  graph.validate();
  EGraph g;
  if (graph.empty()) return g;
  std::vector<EClassId> ids;
  ids.reserve(graph.size());
  for (const auto& n : graph.nodes()) {
    ENode node{tensor_symbol(n.kind, n.shape), {}};
    for (int in : n.inputs) node.children.push_back(ids[in]);
    ids.push_back(g.add(std::move(node)));
  }
  const auto& outs = graph.outputs();
  EClassId root = ids[outs.front()];
  TensorShape root_shape = graph.node(outs.front()).shape;
  for (std::size_t i = 1; i < outs.size(); ++i) {
    root = g.add(ENode{tensor_symbol(TensorOpKind::simple(OpType::Noop),
                                     root_shape),
                       {root, ids[outs[i]]}});
  }
  g.set_root(root);
  return g;
}

namespace {

class GraphRebuilder {
 public:
  GraphRebuilder(const EGraph& g, const std::map<EClassId, ENode>& chosen)
      : g_(g), chosen_(chosen) {}

  void outputs(EClassId c, bool at_root) {
    const ENode& n = choice(c);
    if (at_root && n.symbol.name == op_name(OpType::Noop)) {
      outputs(n.children[0], true);
      outputs(n.children[1], true);
      return;
    }
    out_.add_output(build(c));
  }

  TensorGraph take() { return std::move(out_); }

 private:
  const ENode& choice(EClassId c) const {
    auto it = chosen_.find(g_.find(c));
    if (it == chosen_.end()) {
      throw ExtractionError("no e-node chosen for ec" +
                            std::to_string(index_of(g_.find(c))));
    }
    return it->second;
  }

  int build(EClassId c) {
    c = g_.find(c);
    if (auto it = built_.find(c); it != built_.end()) {
      if (it->second < 0) {
        throw ExtractionError("cyclic selection through ec" +
                              std::to_string(index_of(c)));
      }
      return it->second;
    }
    built_[c] = -1;
    const ENode& n = choice(c);
    auto [kind, shape] = decode_symbol(n.symbol);
    int id;
    if (kind.is_leaf()) {
      id = out_.add_leaf(kind, shape);
    } else {
      std::vector<int> inputs;
      for (auto child : n.children) inputs.push_back(build(child));
      id = out_.add(kind, std::move(inputs));
      if (!(out_.node(id).shape == shape)) {
        throw ShapeError("ec" + std::to_string(index_of(c)) +
                         ": extracted shape disagrees with payload");
      }
    }
    built_[c] = id;
    return id;
  }

  const EGraph& g_;
  const std::map<EClassId, ENode>& chosen_;
  std::map<EClassId, int> built_;
  TensorGraph out_;
};

// Extent of the leading part when splitting `t` along `axis`, found by
// following the structure that produced the concatenation.
std::optional<std::int64_t> split_boundary(const TermView& t,
                                           std::int64_t axis, int depth) {
  if (depth <= 0) return std::nullopt;
  for (const auto& alt : t.alternatives()) {
    const auto type = parse_op(alt.symbol->name);
    if (!type) continue;
    std::optional<std::int64_t> found;
    switch (*type) {
      case OpType::Concat: {
        const auto [kind, shape] = decode_symbol(*alt.symbol);
        if (kind.axis == axis) {
          found = symbol_shape(alt.children[0].representative()).dims[axis];
        } else {
          found = split_boundary(alt.children[0], axis, depth - 1);
        }
        break;
      }
      case OpType::Matmul:
        if (axis == 1) {
          found = split_boundary(alt.children[1], 1, depth - 1);
        } else {
          found = split_boundary(alt.children[0], 0, depth - 1);
        }
        break;
      case OpType::Conv2d:
        if (axis == 1) found = split_boundary(alt.children[1], 0, depth - 1);
        if (axis == 0) found = split_boundary(alt.children[0], 0, depth - 1);
        break;
      case OpType::Transpose:
        found = split_boundary(alt.children[0], 1 - axis, depth - 1);
        break;
      case OpType::Relu:
      case OpType::Tanh:
      case OpType::Sigmoid:
        found = split_boundary(alt.children[0], axis, depth - 1);
        break;
      case OpType::Ewadd:
      case OpType::Ewmul:
        found = split_boundary(alt.children[0], axis, depth - 1);
        if (!found) found = split_boundary(alt.children[1], axis, depth - 1);
        break;
      default:
        break;
    }
    if (found) return found;
  }
  return std::nullopt;
}

}  // namespace

TensorGraph extraction_to_graph(const EGraph& g,
                                const std::map<EClassId, ENode>& chosen) {
  GraphRebuilder rebuilder(g, chosen);
  rebuilder.outputs(g.root(), true);
  TensorGraph out = rebuilder.take();
  out.validate();
  return out;
}

std::optional<Symbol> TensorLanguage::make_symbol(
    const std::string& name, const std::vector<std::int64_t>& params,
    std::span<const TermView> children) const {
  const auto type = parse_op(name);
  if (!type || op_arity(*type) == 0) return std::nullopt;
  if (children.size() != op_arity(*type)) return std::nullopt;
  if (params.size() != op_param_count(*type)) return std::nullopt;
  try {
    std::vector<TensorShape> shapes;
    for (const auto& c : children) {
      shapes.push_back(symbol_shape(c.representative()));
    }
    Symbol probe{name, params};
    for (auto d : shapes[0].dims) probe.payload.push_back(d);
    TensorOpKind kind = decode_symbol(probe).first;
    if (*type == OpType::Split) {
      const auto& in = shapes[0].dims;
      if (kind.axis < 0 || kind.axis >= static_cast<std::int64_t>(in.size())) {
        return std::nullopt;
      }
      const auto boundary = split_boundary(children[0], kind.axis, 8);
      if (!boundary) return std::nullopt;
      kind.size = kind.index == 0 ? *boundary : in[kind.axis] - *boundary;
    }
    return tensor_symbol(kind, infer_shape(kind, shapes));
  } catch (const Error&) {
    return std::nullopt;
  }
}

bool TensorLanguage::can_merge(const TermView& target,
                               const TermView& root) const {
  try {
    return symbol_shape(target.representative()) ==
           symbol_shape(root.representative());
  } catch (const Error&) {
    return false;
  }
}

const Language& tensor_language() {
  static const TensorLanguage language;
  return language;
}

}  // namespace esat
