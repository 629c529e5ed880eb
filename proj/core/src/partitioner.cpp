#include "stylesplit/partitioner.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>

namespace stylesplit {

nlohmann::json PartitionTreeNode::to_json() const {
  nlohmann::json j{{"scan_ids", scan_ids}};
  if (evaluated) {
    j["decision"] = decision.to_string();
    j["mixture_sdsc"] = mixture_sdsc;
    j["split_sdsc"] = split_sdsc;
    j["improvement"] = improvement;
    j["true_evaluations"] = true_evaluations;
    j["ga_seed"] = ga_seed;
  }
  j["children"] = nlohmann::json::array();
  for (const auto& c : children) j["children"].push_back(c->to_json());
  return j;
}

namespace {

double mean_sdsc(const std::vector<ScorePair>& scores) {
  double s = 0.0;
  for (const auto& x : scores) s += x.sdsc;
  return scores.empty() ? 0.0 : s / double(scores.size());
}

// Optimises a split of the node and fills in its decision fields. Returns
// true when the split is accepted.
bool try_split(PartitionTreeNode& node, const std::vector<const Scan*>& scans, const Learner& learner,
               const RecursiveConfig& cfg, std::uint64_t seed) {
  auto baseline = compute_baseline(scans, learner);
  node.mixture_sdsc = baseline.mean_sdsc();
  PartitionEvaluator evaluator(scans, learner, std::move(baseline));
  auto ga = cfg.ga;
  ga.seed = seed;
  node.ga_seed = seed;
  const auto result = optimize_partition(evaluator, ga);
  node.decision = result.best;
  node.true_evaluations = result.true_evaluations;
  node.log = result.log;
  node.evaluated = true;

  // A lone scan has no leave-one-out score, so such splits never qualify.
  if (result.best.group(0).size() < 2 || result.best.group(1).size() < 2) {
    node.split_sdsc = 0.0;
    node.improvement = -node.mixture_sdsc;
    return false;
  }
  node.split_sdsc = mean_sdsc(subgroup_leave_one_out(scans, result.best, learner, false));
  node.improvement = node.split_sdsc - node.mixture_sdsc;
  if (node.improvement <= cfg.min_improvement) return false;

  for (int g = 0; g < 2; ++g) {
    auto child = std::make_unique<PartitionTreeNode>();
    for (auto i : result.best.group(g)) child->scan_ids.push_back(node.scan_ids[i]);
    node.children.push_back(std::move(child));
  }
  return true;
}

}  // namespace

std::unique_ptr<PartitionTreeNode> recursive_partition(const std::vector<const Scan*>& scans,
                                                       const Learner& learner, const RecursiveConfig& cfg) {
  if (cfg.min_group < 2) throw InvalidArgument("min_group must be at least 2");
  if (static_cast<int>(scans.size()) < 2 * cfg.min_group)
    throw InvalidArgument("recursive partitioning needs at least 2 * min_group scans");
  if (cfg.expected_groups < 0) throw InvalidArgument("expected group count must be non-negative");

  std::map<std::string, const Scan*> by_id;
  for (const auto* s : scans) {
    if (!by_id.emplace(s->id(), s).second) throw InvalidArgument("duplicate scan id '" + s->id() + "'");
  }

  auto root = std::make_unique<PartitionTreeNode>();
  for (const auto* s : scans) root->scan_ids.push_back(s->id());

  // Open nodes are split largest first so a group limit cuts the least
  // informative splits.
  std::vector<PartitionTreeNode*> open{root.get()};
  int leaf_count = 1;
  std::uint64_t node_index = 0;
  while (!open.empty()) {
    if (cfg.expected_groups > 0 && leaf_count >= cfg.expected_groups) break;
    auto it = std::max_element(open.begin(), open.end(), [](const auto* a, const auto* b) {
      return a->scan_ids.size() < b->scan_ids.size();
    });
    PartitionTreeNode* node = *it;
    open.erase(it);

    std::vector<const Scan*> node_scans;
    for (const auto& id : node->scan_ids) node_scans.push_back(by_id.at(id));
    if (!try_split(*node, node_scans, learner, cfg, cfg.ga.seed + node_index++)) continue;
    ++leaf_count;
    for (auto& child : node->children)
      if (static_cast<int>(child->scan_ids.size()) >= 2 * cfg.min_group) open.push_back(child.get());
  }
  return root;
}

std::vector<const PartitionTreeNode*> leaves(const PartitionTreeNode& root) {
  std::vector<const PartitionTreeNode*> out;
  std::vector<const PartitionTreeNode*> stack{&root};
  while (!stack.empty()) {
    const auto* n = stack.back();
    stack.pop_back();
    if (n->leaf()) {
      out.push_back(n);
      continue;
    }
    for (auto c = n->children.rbegin(); c != n->children.rend(); ++c) stack.push_back(c->get());
  }
  return out;
}

int misclassification(const std::vector<std::vector<std::size_t>>& groups, const std::vector<int>& labels) {
  std::set<int> distinct(labels.begin(), labels.end());
  if (distinct.size() != groups.size())
    throw InvalidArgument("group count " + std::to_string(groups.size()) + " != label count " +
                          std::to_string(distinct.size()));
  const std::vector<int> label_values(distinct.begin(), distinct.end());

  std::vector<std::vector<int>> hits(groups.size(), std::vector<int>(label_values.size(), 0));
  std::size_t total = 0;
  std::vector<bool> seen(labels.size(), false);
  for (std::size_t g = 0; g < groups.size(); ++g) {
    for (auto i : groups[g]) {
      if (i >= labels.size() || seen[i]) throw InvalidArgument("groups must be disjoint indices into labels");
      seen[i] = true;
      ++total;
      const auto l = std::lower_bound(label_values.begin(), label_values.end(), labels[i]) - label_values.begin();
      ++hits[g][static_cast<std::size_t>(l)];
    }
  }
  if (total != labels.size()) throw InvalidArgument("groups must cover every labelled scan");

  std::vector<std::size_t> perm(label_values.size());
  std::iota(perm.begin(), perm.end(), 0);
  int best_correct = -1;
  do {
    int correct = 0;
    for (std::size_t g = 0; g < groups.size(); ++g) correct += hits[g][perm[g]];
    best_correct = std::max(best_correct, correct);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return static_cast<int>(total) - best_correct;
}

int misclassification(const Partition& p, const std::vector<int>& labels) {
  if (p.size() != labels.size()) throw InvalidArgument("partition length does not match label count");
  std::vector<std::vector<std::size_t>> groups;
  for (int g = 0; g < 2; ++g) {
    auto idx = p.group(g);
    if (!idx.empty()) groups.push_back(std::move(idx));
  }
  return misclassification(groups, labels);
}

}  // namespace stylesplit
