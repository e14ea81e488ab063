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

#include "esat/cost_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "esat/error.hpp"
#include "hashing.hpp"
#include "json.hpp"

namespace esat {

CostModelConfig CostModelConfig::analytic() {
  CostModelConfig c;
  c.mode = CostMode::Analytic;
  for (auto t : kAllOpTypes) c.coefficients[t] = 1e-9;
  c.coefficients[OpType::Split] = 0.0;
  return c;
}

CostModelConfig CostModelConfig::unit() {
  CostModelConfig c = analytic();
  c.mode = CostMode::Unit;
  return c;
}

double CostModelConfig::coefficient(OpType type) const {
  auto it = coefficients.find(type);
  return it == coefficients.end() ? 1e-9 : it->second;
}

void CostModelConfig::validate() const {
  for (const auto& [type, value] : coefficients) {
    if (!(value >= 0.0) || !std::isfinite(value)) {
      throw ConfigError("cost coefficient for " + std::string(op_name(type)) +
                        " must be a finite non-negative number");
    }
  }
  if (!(launch_overhead >= 0.0) || !std::isfinite(launch_overhead)) {
    throw ConfigError("launch_overhead must be non-negative");
  }
  if (!(noise_stddev >= 0.0) || !std::isfinite(noise_stddev)) {
    throw ConfigError("noise_stddev must be non-negative");
  }
}

std::string_view cost_mode_name(CostMode mode) {
  return mode == CostMode::Unit ? "unit" : "analytic";
}

CostModelConfig parse_cost_config(std::string_view text) {
  using nlohmann::json;
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed cost config: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("cost config must be an object");
  CostModelConfig c = CostModelConfig::analytic();
  try {
    if (doc.contains("mode")) {
      const auto mode = doc["mode"].get<std::string>();
      if (mode == "unit") {
        c.mode = CostMode::Unit;
      } else if (mode == "analytic") {
        c.mode = CostMode::Analytic;
      } else {
        throw ConfigError("unknown cost mode '" + mode + "'");
      }
    }
    if (doc.contains("coefficients")) {
      for (const auto& [name, value] : doc["coefficients"].items()) {
        const auto type = parse_op(name);
        if (!type) throw ConfigError("unknown operator '" + name + "' in coefficients");
        c.coefficients[*type] = value.get<double>();
      }
    }
    c.launch_overhead = doc.value("launch_overhead", c.launch_overhead);
    c.noise_stddev = doc.value("noise_stddev", c.noise_stddev);
    c.seed = doc.value("seed", c.seed);
    c.fold_constants = doc.value("fold_constants", c.fold_constants);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("cost config: ") + e.what());
  }
  c.validate();
  return c;
}

CostModelConfig load_cost_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open cost config " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_cost_config(buffer.str());
}

double operator_work(const TensorOpKind& kind,
                     std::span<const TensorShape> inputs) {
  switch (kind.type) {
    case OpType::Input:
    case OpType::Weight:
    case OpType::Noop:
    case OpType::Split:
      return 0.0;
    default:
      break;
  }
  const TensorShape out = infer_shape(kind, inputs);
  switch (kind.type) {
    case OpType::Matmul: {
      const auto& a = inputs[0].dims;
      const auto& b = inputs[1].dims;
      return 2.0 * static_cast<double>(a[0]) * static_cast<double>(a[1]) *
             static_cast<double>(b[1]);
    }
    case OpType::Conv2d: {
      const auto& x = inputs[0].dims;
      const auto& w = inputs[1].dims;
      return 2.0 * static_cast<double>(x[0]) * static_cast<double>(x[1]) *
             static_cast<double>(w[2]) * static_cast<double>(w[3]) *
             static_cast<double>(out.dims[2]) *
             static_cast<double>(out.dims[3]) * static_cast<double>(w[0]);
    }
    default:
      return static_cast<double>(out.elements());
  }
}

std::optional<double> CostCache::op(const std::string& key) const {
  std::lock_guard lock(mu_);
  auto it = ops_.find(key);
  if (it == ops_.end()) return std::nullopt;
  return it->second;
}

double CostCache::put_op(const std::string& key, double value) {
  std::lock_guard lock(mu_);
  return ops_.try_emplace(key, value).first->second;
}

std::optional<double> CostCache::egraph(std::uint64_t fingerprint,
                                        int method) const {
  std::lock_guard lock(mu_);
  auto it = egraphs_.find({fingerprint, method});
  if (it == egraphs_.end()) return std::nullopt;
  ++egraph_hits_;
  return it->second;
}

double CostCache::put_egraph(std::uint64_t fingerprint, int method,
                             double value) {
  std::lock_guard lock(mu_);
  return egraphs_.try_emplace({fingerprint, method}, value).first->second;
}

std::size_t CostCache::op_entries() const {
  std::lock_guard lock(mu_);
  return ops_.size();
}

std::size_t CostCache::egraph_entries() const {
  std::lock_guard lock(mu_);
  return egraphs_.size();
}

std::size_t CostCache::egraph_hits() const {
  std::lock_guard lock(mu_);
  return egraph_hits_;
}

namespace {

std::string signature(const TensorOpKind& kind,
                      std::span<const TensorShape> inputs) {
  std::string key(op_name(kind.type));
  for (auto p : kind.params()) key += "," + std::to_string(p);
  if (kind.type == OpType::Split) key += ",s" + std::to_string(kind.size);
  for (const auto& s : inputs) key += "|" + s.to_string();
  return key;
}

double compute_cost(const CostModelConfig& config, const TensorOpKind& kind,
                    std::span<const TensorShape> inputs,
                    const std::string& key) {
  const bool free = kind.is_leaf() || kind.type == OpType::Noop;
  if (!kind.is_leaf()) infer_shape(kind, inputs);  // reject malformed queries
  if (config.mode == CostMode::Unit) return free ? 0.0 : 1.0;
  if (free || kind.type == OpType::Split) return 0.0;
  double cost = config.launch_overhead +
                config.coefficient(kind.type) * operator_work(kind, inputs);
  if (config.noise_stddev > 0.0) {
    const std::uint64_t s =
        detail::hash_combine(config.seed, detail::hash_string(key));
    std::mt19937_64 rng(s);
    std::normal_distribution<double> noise(0.0, config.noise_stddev);
    cost *= std::max(0.0, 1.0 + noise(rng));
  }
  return cost;
}

}  // namespace

double operator_cost(const CostModelConfig& config, CostCache& cache,
                     const TensorOpKind& kind,
                     std::span<const TensorShape> inputs) {
  if (kind.is_leaf()) return 0.0;
  const std::string key = signature(kind, inputs);
  if (auto hit = cache.op(key)) return *hit;
  return cache.put_op(key, compute_cost(config, kind, inputs, key));
}

double graph_cost(const CostModelConfig& config, CostCache& cache,
                  const TensorGraph& graph) {
  graph.validate();
  const bool fold = config.mode == CostMode::Analytic && config.fold_constants;
  std::vector<bool> constant(graph.size(), false);
  double total = 0.0;
  for (const auto& n : graph.nodes()) {
    if (n.kind.is_leaf()) {
      constant[n.id] = n.kind.type == OpType::Weight;
      continue;
    }
    std::vector<TensorShape> shapes;
    bool all_const = true;
    for (int in : n.inputs) {
      shapes.push_back(graph.node(in).shape);
      all_const = all_const && constant[in];
    }
    constant[n.id] = all_const;
    if (fold && all_const) continue;
    total += operator_cost(config, cache, n.kind, shapes);
  }
  return total;
}

TensorCostModel::TensorCostModel(CostModelConfig config,
                                 std::shared_ptr<CostCache> cache)
    : config_(std::move(config)), cache_(std::move(cache)) {
  config_.validate();
  if (!cache_) cache_ = std::make_shared<CostCache>();
}

NodeCosts TensorCostModel::node_costs(const EGraph& g) const {
  const auto ids = g.class_ids();
  const bool fold = config_.mode == CostMode::Analytic && config_.fold_constants;

  std::vector<bool> constant(g.id_bound(), false);
  if (fold) {
    for (bool grew = true; grew;) {
      grew = false;
      for (auto c : ids) {
        if (constant[index_of(c)]) continue;
        for (const auto& n : g.nodes(c)) {
          bool all = n.symbol.name == op_name(OpType::Weight);
          if (!n.children.empty()) {
            all = std::all_of(n.children.begin(), n.children.end(),
                              [&](EClassId k) { return constant[index_of(g.find(k))]; });
          }
          if (all) {
            constant[index_of(c)] = true;
            grew = true;
            break;
          }
        }
      }
    }
  }

  NodeCosts out(g.id_bound());
  for (auto c : ids) {
    auto& slot = out[index_of(c)];
    for (const auto& n : g.nodes(c)) {
      const auto kind = decode_symbol(n.symbol).first;
      if (kind.is_leaf()) {
        slot.push_back(0.0);
        continue;
      }
      std::vector<TensorShape> shapes;
      bool all_const = true;
      for (auto k : n.children) {
        shapes.push_back(symbol_shape(g.nodes(k).front().symbol));
        all_const = all_const && constant[index_of(g.find(k))];
      }
      if (fold && all_const) {
        slot.push_back(0.0);
      } else {
        slot.push_back(operator_cost(config_, *cache_, kind, shapes));
      }
    }
  }
  return out;
}

}  // namespace esat
