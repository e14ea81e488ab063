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

#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "esat/error.hpp"
#include "esat/tensor.hpp"
#include "json.hpp"

namespace esat {

namespace {

using nlohmann::json;

[[noreturn]] void schema_fail(const std::string& where,
                              const std::string& message) {
  throw ConfigError(where + ": " + message);
}

std::int64_t int_field(const json& obj, const char* key, std::int64_t fallback,
                       const std::string& where) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_number_integer()) schema_fail(where, std::string(key) + " must be an integer");
  return v.get<std::int64_t>();
}

Padding padding_field(const json& params, const std::string& where) {
  if (!params.contains("padding")) return Padding::Same;
  const auto& v = params.at("padding");
  if (v.is_string()) {
    if (v == "same") return Padding::Same;
    if (v == "valid") return Padding::Valid;
  } else if (v.is_number_integer()) {
    const auto p = v.get<int>();
    if (p == 0 || p == 1) return static_cast<Padding>(p);
  }
  schema_fail(where, "padding must be \"same\" or \"valid\"");
}

Activation activation_field(const json& params, const std::string& where) {
  if (!params.contains("activation")) return Activation::None;
  const auto& v = params.at("activation");
  if (v.is_string()) {
    if (v == "none") return Activation::None;
    if (v == "relu") return Activation::Relu;
    if (v == "sigmoid") return Activation::Sigmoid;
    if (v == "tanh") return Activation::Tanh;
  } else if (v.is_number_integer()) {
    const auto a = v.get<int>();
    if (a >= 0 && a <= 3) return static_cast<Activation>(a);
  }
  schema_fail(where, "unknown activation");
}

const char* padding_name(Padding p) {
  return p == Padding::Same ? "same" : "valid";
}

const char* activation_name(Activation a) {
  switch (a) {
    case Activation::Relu:
      return "relu";
    case Activation::Sigmoid:
      return "sigmoid";
    case Activation::Tanh:
      return "tanh";
    default:
      return "none";
  }
}

struct RawNode {
  std::int64_t id = 0;
  OpType type = OpType::Noop;
  json params;
  std::vector<std::int64_t> inputs;
  std::optional<TensorShape> shape;
};

TensorOpKind make_kind(const RawNode& raw, const std::string& where) {
  const json& p = raw.params;
  switch (raw.type) {
    case OpType::Input:
      return TensorOpKind::input(int_field(p, "uid", raw.id, where));
    case OpType::Weight:
      return TensorOpKind::weight(int_field(p, "uid", raw.id, where));
    case OpType::Conv2d:
      return TensorOpKind::conv2d(int_field(p, "stride", 1, where),
                                  padding_field(p, where),
                                  activation_field(p, where));
    case OpType::Concat:
      return TensorOpKind::concat(int_field(p, "axis", 0, where));
    case OpType::Split:
      if (!p.contains("size")) schema_fail(where, "split needs params.size");
      return TensorOpKind::split(int_field(p, "axis", 0, where),
                                 int_field(p, "index", 0, where),
                                 int_field(p, "size", 0, where));
    case OpType::Maxpool:
      return TensorOpKind::maxpool(int_field(p, "kernel", 2, where),
                                   int_field(p, "stride", 2, where));
    default:
      return TensorOpKind::simple(raw.type);
  }
}

}  // namespace

TensorGraph parse_graph_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed graph JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("nodes") || !doc["nodes"].is_array()) {
    schema_fail("graph", "expected an object with a \"nodes\" array");
  }

  std::map<std::int64_t, RawNode> raw;
  std::vector<std::int64_t> order;
  for (const auto& n : doc["nodes"]) {
    if (!n.is_object() || !n.contains("id") || !n["id"].is_number_integer()) {
      schema_fail("graph", "every node needs an integer \"id\"");
    }
    RawNode r;
    r.id = n["id"].get<std::int64_t>();
    const std::string where = "node " + std::to_string(r.id);
    if (raw.count(r.id)) schema_fail(where, "duplicate id");
    if (!n.contains("op") || !n["op"].is_string()) schema_fail(where, "missing op");
    const auto type = parse_op(n["op"].get<std::string>());
    if (!type) schema_fail(where, "unknown op " + n["op"].get<std::string>());
    r.type = *type;
    r.params = n.value("params", json::object());
    if (!r.params.is_object()) schema_fail(where, "params must be an object");
    if (n.contains("inputs")) {
      if (!n["inputs"].is_array()) schema_fail(where, "inputs must be an array");
      for (const auto& in : n["inputs"]) {
        if (!in.is_number_integer()) schema_fail(where, "inputs must be integers");
        r.inputs.push_back(in.get<std::int64_t>());
      }
    }
    if (r.inputs.size() != op_arity(r.type)) {
      schema_fail(where, "op " + n["op"].get<std::string>() + " expects " +
                             std::to_string(op_arity(r.type)) + " input(s), got " +
                             std::to_string(r.inputs.size()));
    }
    if (n.contains("shape")) {
      if (!n["shape"].is_array()) schema_fail(where, "shape must be an array");
      TensorShape s;
      for (const auto& d : n["shape"]) {
        if (!d.is_number_integer()) schema_fail(where, "shape must be integers");
        s.dims.push_back(d.get<std::int64_t>());
      }
      r.shape = std::move(s);
    } else if (op_arity(r.type) == 0) {
      schema_fail(where, "leaf nodes need a shape");
    }
    order.push_back(r.id);
    raw.emplace(r.id, std::move(r));
  }
  for (const auto& [id, r] : raw) {
    for (auto in : r.inputs) {
      if (!raw.count(in)) {
        schema_fail("node " + std::to_string(id),
                    "unknown input " + std::to_string(in));
      }
    }
  }

  // Topological order, stable with respect to file order; rejects cycles.
  TensorGraph graph;
  std::map<std::int64_t, int> placed;
  std::set<std::int64_t> visiting;
  std::function<int(std::int64_t)> place = [&](std::int64_t id) -> int {
    if (auto it = placed.find(id); it != placed.end()) return it->second;
    const std::string where = "node " + std::to_string(id);
    if (!visiting.insert(id).second) schema_fail(where, "graph has a cycle");
    const RawNode& r = raw.at(id);
    std::vector<int> inputs;
    for (auto in : r.inputs) inputs.push_back(place(in));
    const TensorOpKind kind = make_kind(r, where);
    int out;
    try {
      if (kind.is_leaf()) {
        out = graph.add_leaf(kind, *r.shape);
      } else {
        out = graph.add(kind, std::move(inputs));
        if (r.shape && !(*r.shape == graph.node(out).shape)) {
          throw ShapeError("declared shape " + r.shape->to_string() +
                           " but inferred " + graph.node(out).shape.to_string());
        }
      }
    } catch (const ShapeError& e) {
      throw ShapeError(where + ": " + e.what());
    }
    visiting.erase(id);
    placed.emplace(id, out);
    return out;
  };
  for (auto id : order) place(id);

  if (!doc.contains("outputs") || !doc["outputs"].is_array() ||
      doc["outputs"].empty()) {
    schema_fail("graph", "expected a non-empty \"outputs\" array");
  }
  std::vector<int> outputs;
  for (const auto& o : doc["outputs"]) {
    if (!o.is_number_integer() || !raw.count(o.get<std::int64_t>())) {
      schema_fail("graph", "outputs must name existing node ids");
    }
    outputs.push_back(placed.at(o.get<std::int64_t>()));
  }
  graph.set_outputs(std::move(outputs));
  graph.validate();
  return graph;
}

TensorGraph load_graph(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open graph file " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_graph_json(buffer.str());
}

std::string graph_to_json(const TensorGraph& graph) {
  json nodes = json::array();
  for (const auto& n : graph.nodes()) {
    json params = json::object();
    const auto& k = n.kind;
    switch (k.type) {
      case OpType::Input:
      case OpType::Weight:
        params["uid"] = k.uid;
        break;
      case OpType::Conv2d:
        params["stride"] = k.stride;
        params["padding"] = padding_name(k.padding);
        params["activation"] = activation_name(k.activation);
        break;
      case OpType::Concat:
        params["axis"] = k.axis;
        break;
      case OpType::Split:
        params["axis"] = k.axis;
        params["index"] = k.index;
        params["size"] = k.size;
        break;
      case OpType::Maxpool:
        params["kernel"] = k.kernel;
        params["stride"] = k.stride;
        break;
      default:
        break;
    }
    nodes.push_back(json{{"id", n.id},
                         {"op", std::string(op_name(k.type))},
                         {"params", params},
                         {"inputs", n.inputs},
                         {"shape", n.shape.dims}});
  }
  json doc{{"nodes", nodes}, {"outputs", graph.outputs()}};
  return doc.dump(2) + "\n";
}

void save_graph(const TensorGraph& graph, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write graph file " + path.string());
  out << graph_to_json(graph);
}

}  // namespace esat
