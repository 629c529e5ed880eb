#pragma once

#include <cstdint>
#include <functional>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "stylesplit/objective.hpp"

namespace stylesplit {

/// Family of subsets (FOS) over bit positions from a hierarchical
/// clustering of pairwise mutual information. Holds every tree node except
/// the root; singletons come first, merged clusters in merge order.
struct LinkageModel {
  std::vector<std::vector<int>> subsets;

  static LinkageModel learn(const std::vector<Partition>& population);
};

/// Pairwise mutual information (nats) between bit positions of a population.
std::vector<std::vector<double>> mutual_information(const std::vector<Partition>& population);

/// k-nearest-neighbour regressor under Hamming distance over truly
/// evaluated solutions, weighted by inverse distance.
class HammingKnnSurrogate {
 public:
  explicit HammingKnnSurrogate(int k) : k_(k) {}

  void add(const Partition& p, double value);
  std::size_t size() const { return points_.size(); }
  /// Requires at least one stored point.
  double predict(const Partition& p) const;

 private:
  int k_;
  std::vector<Partition> points_;
  std::vector<double> values_;
};

struct SurrogateConfig {
  bool enabled = true;
  int k = 5;
};

struct GAConfig {
  int population_size = 32;
  int max_true_evaluations = 250;
  int warmup_evaluations = 200;
  SurrogateConfig surrogate;
  std::uint64_t seed = 1;
  int stall_generations = 10;
  /// True evaluations issued per generation when the surrogate screens.
  int batch_size = 4;
  /// Batch slots per generation reserved for flipping the best solution's
  /// scans with the largest relative scores R_i (the scans the opposite
  /// subgroup's model already fits best). 0 disables.
  int guided_moves = 2;

  void validate() const;
  nlohmann::json to_json() const;
  static GAConfig from_json(const nlohmann::json& j);
  static GAConfig from_json(const nlohmann::json& j, GAConfig defaults);
};

/// Minimises a partition objective. Called concurrently; must be
/// deterministic per partition.
using PartitionObjective = std::function<EvaluationRecord(const Partition&)>;

struct OptimizationResult {
  Partition best;
  double best_value = 0.0;
  /// Every true evaluation in the order it was issued.
  std::vector<EvaluationRecord> log;
  int true_evaluations = 0;
  int generations = 0;
  std::string stop_reason;
};

/// GOMEA-style search over canonical bit vectors of length n: a truly
/// evaluated random warm-up, then gene-pool optimal mixing over a linkage
/// tree with optional Hamming-kNN screening. Never exceeds
/// cfg.max_true_evaluations objective calls and only reports solutions it
/// truly evaluated.
OptimizationResult optimize_partition(std::size_t n, const PartitionObjective& objective, const GAConfig& cfg);

/// Minimises the proxy objective G over the evaluator's scans (at least 4).
OptimizationResult optimize_partition(const PartitionEvaluator& evaluator, const GAConfig& cfg);

}  // namespace stylesplit
