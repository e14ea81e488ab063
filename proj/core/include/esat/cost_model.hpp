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

#ifndef ESAT_COST_MODEL_HPP
#define ESAT_COST_MODEL_HPP

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>

#include "esat/costs.hpp"
#include "esat/tensor.hpp"

namespace esat {

enum class CostMode { Analytic, Unit };

/// Analytic mode: (launch_overhead + coefficient * work) * (1 + eps) where
/// work is the FLOP or element count of the operator and eps is a frozen
/// Gaussian sample. Unit mode: 1 per operator, 0 for inputs, weights and
/// noops.
struct CostModelConfig {
  CostMode mode = CostMode::Analytic;
  std::map<OpType, double> coefficients;
  double launch_overhead = 5e-6;
  double noise_stddev = 0.0;
  std::uint64_t seed = 0;
  /// Operators whose inputs all derive from weights cost nothing; they can
  /// be evaluated ahead of time.
  bool fold_constants = true;

  static CostModelConfig analytic();
  static CostModelConfig unit();

  double coefficient(OpType type) const;
  void validate() const;
};

/// Reads a JSON config; keys: mode, coefficients{op: value},
/// launch_overhead, noise_stddev, seed, fold_constants.
CostModelConfig load_cost_config(const std::filesystem::path& path);
CostModelConfig parse_cost_config(std::string_view text);

/// Work estimate (FLOPs or elements) used by the analytic mode.
double operator_work(const TensorOpKind& kind,
                     std::span<const TensorShape> inputs);

/// Thread-safe memo of operator costs and extracted e-graph costs. The
/// first stored value wins.
class CostCache {
 public:
  std::optional<double> op(const std::string& key) const;
  double put_op(const std::string& key, double value);

  std::optional<double> egraph(std::uint64_t fingerprint, int method) const;
  double put_egraph(std::uint64_t fingerprint, int method, double value);

  std::size_t op_entries() const;
  std::size_t egraph_entries() const;
  std::size_t egraph_hits() const;

 private:
  mutable std::mutex mu_;
  std::unordered_map<std::string, double> ops_;
  std::map<std::pair<std::uint64_t, int>, double> egraphs_;
  mutable std::size_t egraph_hits_ = 0;
};

double operator_cost(const CostModelConfig& config, CostCache& cache,
                     const TensorOpKind& kind,
                     std::span<const TensorShape> inputs);

/// Sum of operator costs over the unique nodes of `graph`.
double graph_cost(const CostModelConfig& config, CostCache& cache,
                  const TensorGraph& graph);

/// Costs tensor e-nodes decoded from their payloads.
class TensorCostModel final : public CostModel {
 public:
  TensorCostModel(CostModelConfig config, std::shared_ptr<CostCache> cache);

  NodeCosts node_costs(const EGraph& g) const override;

  const CostModelConfig& config() const { return config_; }
  CostCache& cache() const { return *cache_; }

 private:
  CostModelConfig config_;
  std::shared_ptr<CostCache> cache_;
};

std::string_view cost_mode_name(CostMode mode);

}  // namespace esat

#endif  // ESAT_COST_MODEL_HPP
