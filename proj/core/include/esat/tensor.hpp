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

#ifndef ESAT_TENSOR_HPP
#define ESAT_TENSOR_HPP

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "esat/egraph.hpp"
#include "esat/rewrite.hpp"

namespace esat {

struct TensorShape {
  std::vector<std::int64_t> dims;

  std::size_t rank() const { return dims.size(); }
  std::int64_t elements() const;
  std::string to_string() const;

  friend bool operator==(const TensorShape&, const TensorShape&) = default;
};

enum class OpType {
  Input,
  Weight,
  Ewadd,
  Ewmul,
  Matmul,
  Conv2d,
  Relu,
  Tanh,
  Sigmoid,
  Concat,
  Split,
  Maxpool,
  Transpose,
  Noop,
};

inline constexpr OpType kAllOpTypes[] = {
    OpType::Input,   OpType::Weight,  OpType::Ewadd,  OpType::Ewmul,
    OpType::Matmul,  OpType::Conv2d,  OpType::Relu,   OpType::Tanh,
    OpType::Sigmoid, OpType::Concat,  OpType::Split,  OpType::Maxpool,
    OpType::Transpose, OpType::Noop};

enum class Padding { Valid = 0, Same = 1 };
enum class Activation { None = 0, Relu = 1, Sigmoid = 2, Tanh = 3 };

std::string_view op_name(OpType type);
std::optional<OpType> parse_op(std::string_view name);
std::size_t op_arity(OpType type);
/// Number of leading payload entries that are operator attributes.
std::size_t op_param_count(OpType type);

/// Operator plus its attributes.
struct TensorOpKind {
  OpType type = OpType::Noop;
  std::int64_t uid = 0;  // Input, Weight
  std::int64_t stride = 1;
  Padding padding = Padding::Same;
  Activation activation = Activation::None;
  std::int64_t axis = 0;   // Concat, Split
  std::int64_t index = 0;  // Split: 0 = leading part, 1 = trailing part
  std::int64_t size = 0;   // Split: extent of this part along `axis`
  std::int64_t kernel = 2; // Maxpool

  static TensorOpKind input(std::int64_t uid);
  static TensorOpKind weight(std::int64_t uid);
  static TensorOpKind simple(OpType type);
  static TensorOpKind conv2d(std::int64_t stride, Padding padding,
                             Activation activation = Activation::None);
  static TensorOpKind concat(std::int64_t axis);
  static TensorOpKind split(std::int64_t axis, std::int64_t index,
                            std::int64_t size);
  static TensorOpKind maxpool(std::int64_t kernel, std::int64_t stride);

  std::size_t arity() const { return op_arity(type); }
  bool is_leaf() const { return arity() == 0; }

  /// Attribute prefix of the e-node payload. Split sizes are not included;
  /// they are recovered from the output shape.
  std::vector<std::int64_t> params() const;

  friend bool operator==(const TensorOpKind&, const TensorOpKind&) = default;
};

/// Output shape of `kind` applied to `inputs`. Leaves have no inferable
/// shape and are rejected.
TensorShape infer_shape(const TensorOpKind& kind,
                        std::span<const TensorShape> inputs);

/// Payload layout: params() followed by the output dims.
Symbol tensor_symbol(const TensorOpKind& kind, const TensorShape& shape);
/// Inverse of tensor_symbol.
std::pair<TensorOpKind, TensorShape> decode_symbol(const Symbol& symbol);

struct TensorNode {
  int id = 0;
  TensorOpKind kind;
  std::vector<int> inputs;
  TensorShape shape;
};

/// Tensor DAG. Node ids are positions; inputs always precede their users.
class TensorGraph {
 public:
  int add_input(TensorShape shape);
  int add_weight(TensorShape shape);
  /// Adds a leaf with an explicit uid.
  int add_leaf(TensorOpKind kind, TensorShape shape);
  /// Adds an operator; the shape is inferred.
  int add(TensorOpKind kind, std::vector<int> inputs);

  void add_output(int id);
  void set_outputs(std::vector<int> outputs);

  const std::vector<TensorNode>& nodes() const { return nodes_; }
  const TensorNode& node(int id) const;
  const std::vector<int>& outputs() const { return outputs_; }
  std::size_t size() const { return nodes_.size(); }
  bool empty() const { return nodes_.empty(); }

  /// Re-checks arity, input order, shapes and outputs.
  void validate() const;

 private:
  std::vector<TensorNode> nodes_;
  std::vector<int> outputs_;
  std::int64_t next_uid_ = 0;
};

/// One e-class per unique node; several outputs are joined by a left-leaning
/// chain of Noop sinks so the e-graph has a single root.
EGraph graph_to_egraph(const TensorGraph& graph);

/// Rebuilds a tensor graph from one chosen e-node per e-class, starting at
/// the root. Shared e-classes become shared nodes. Throws ExtractionError on
/// a missing choice or a cycle.
TensorGraph extraction_to_graph(const EGraph& g,
                                const std::map<EClassId, ENode>& chosen);

/// Typed tensor alphabet for rule targets: fills in output dims and the
/// extent of split parts; rejects ill-shaped instantiations.
class TensorLanguage final : public Language {
 public:
  std::optional<Symbol> make_symbol(
      const std::string& name, const std::vector<std::int64_t>& params,
      std::span<const TermView> children) const override;
  bool can_merge(const TermView& target, const TermView& root) const override;
};

const Language& tensor_language();

/// Output dims stored in a tensor e-node payload.
TensorShape symbol_shape(const Symbol& symbol);

TensorGraph load_graph(const std::filesystem::path& path);
TensorGraph parse_graph_json(std::string_view text);
void save_graph(const TensorGraph& graph, const std::filesystem::path& path);
std::string graph_to_json(const TensorGraph& graph);

}  // namespace esat

#endif  // ESAT_TENSOR_HPP
