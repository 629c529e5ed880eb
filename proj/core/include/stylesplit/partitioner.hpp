#pragma once

#include <memory>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "stylesplit/optimizer.hpp"

namespace stylesplit {

/// Node of the style hierarchy. Leaves are the final style groups.
struct PartitionTreeNode {
  std::vector<std::string> scan_ids;
  /// Best split found at this node (over scan_ids); empty for nodes that
  /// were never split.
  Partition decision;
  /// Mean leave-one-out SDSC of one model on all node scans.
  double mixture_sdsc = 0.0;
  /// Mean leave-one-out SDSC inside the two subgroups of `decision`.
  double split_sdsc = 0.0;
  double improvement = 0.0;
  bool evaluated = false;
  int true_evaluations = 0;
  /// GA seed used for this node's split.
  std::uint64_t ga_seed = 0;
  /// Optimizer evaluation log for this node's split (not serialised by
  /// to_json).
  std::vector<EvaluationRecord> log;
  std::vector<std::unique_ptr<PartitionTreeNode>> children;

  bool leaf() const { return children.empty(); }
  nlohmann::json to_json() const;
};

struct RecursiveConfig {
  int min_group = 4;
  double min_improvement = 0.0;
  /// Stop once this many leaves exist; 0 means no limit.
  int expected_groups = 0;
  GAConfig ga;
};

/// Splits scans in two with the optimizer and keeps splitting accepted
/// children that still hold at least 2 * min_group scans. A split is kept
/// when within-subgroup leave-one-out SDSC beats the mixture by more than
/// min_improvement. Requires a pretrained learner and >= 2 * min_group scans.
std::unique_ptr<PartitionTreeNode> recursive_partition(const std::vector<const Scan*>& scans,
                                                       const Learner& learner, const RecursiveConfig& cfg);

/// Leaves in depth-first order, left child first.
std::vector<const PartitionTreeNode*> leaves(const PartitionTreeNode& root);

/// Minimum number of wrongly grouped scans over one-to-one matchings of
/// groups to labels 0..k-1. Throws unless the group count equals the
/// number of distinct labels.
int misclassification(const std::vector<std::vector<std::size_t>>& groups, const std::vector<int>& labels);
int misclassification(const Partition& p, const std::vector<int>& labels);

}  // namespace stylesplit
