#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <nlohmann/json.hpp>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "stylesplit/learner.hpp"

namespace stylesplit {

class InvalidPartitionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Binary split of an ordered scan list: bit 0 puts the scan in the first
/// subgroup, bit 1 in the second.
class Partition {
 public:
  Partition() = default;
  explicit Partition(std::vector<std::uint8_t> bits);
  static Partition from_string(std::string_view text);
  /// Bit i = labels[i] != labels[0]; only meaningful for two labels.
  static Partition from_labels(std::span<const int> labels);

  std::size_t size() const { return bits_.size(); }
  const std::vector<std::uint8_t>& bits() const { return bits_; }
  bool operator[](std::size_t i) const { return bits_[i] != 0; }

  /// First bit zero; a split and its complement are the same split.
  Partition canonical() const;
  Partition complement() const;
  Partition flipped(std::size_t i) const;
  bool is_canonical() const { return bits_.empty() || bits_.front() == 0; }

  /// Positions assigned to subgroup `which` (0 or 1).
  std::vector<std::size_t> group(int which) const;
  bool both_nonempty() const;
  std::size_t hamming(const Partition& other) const;
  std::string to_string() const;

  friend bool operator==(const Partition&, const Partition&) = default;
  friend auto operator<=>(const Partition&, const Partition&) = default;

 private:
  std::vector<std::uint8_t> bits_;
};

/// Per-scan hold-out SDSC of the mixture model (M_i), floor-clamped.
struct BaselineScores {
  std::vector<double> m;
  /// Unclamped leave-one-out scores of the mixture model.
  std::vector<ScorePair> raw;
  double floor = 1e-3;

  double mean_sdsc() const;
  double mean_dsc() const;
};

enum class ObjectiveKind { kDirectF, kProxyG };
std::string_view to_string(ObjectiveKind kind);

struct EvaluationRecord {
  Partition partition;
  ObjectiveKind kind = ObjectiveKind::kProxyG;
  double value = 0.0;
  /// S_i and R_i = S_i / M_i for every scan, in scan order.
  std::vector<double> scores;
  std::vector<double> relative;
  int fits = 0;

  nlohmann::json to_json(std::uint64_t seed) const;
};

/// Leave-one-out over `scans`: fit on all but i, score scan i. DSC is only
/// computed when `with_dsc` is set (it needs full predictions).
std::vector<ScorePair> leave_one_out(std::span<const Scan* const> scans, const Learner& learner, bool with_dsc);

/// Leave-one-out inside each nonempty subgroup of `p`; results in scan order.
/// Throws if a nonempty subgroup has a single scan.
std::vector<ScorePair> subgroup_leave_one_out(std::span<const Scan* const> scans, const Partition& p,
                                              const Learner& learner, bool with_dsc);

BaselineScores compute_baseline(std::span<const Scan* const> scans, const Learner& learner,
                                double floor = 1e-3);

/// Scores partitions of a fixed ordered scan list with the proxy objective
/// G (two fits, minimised) and the direct objective F (leave-one-out within
/// subgroups, maximised). Results are cached by canonical bit vector.
class PartitionEvaluator {
 public:
  PartitionEvaluator(std::vector<const Scan*> scans, const Learner& learner, BaselineScores baseline);

  std::size_t size() const { return scans_.size(); }
  const std::vector<const Scan*>& scans() const { return scans_; }
  const BaselineScores& baseline() const { return baseline_; }
  const Learner& learner() const { return learner_; }

  EvaluationRecord proxy_g(const Partition& p) const;
  EvaluationRecord direct_f(const Partition& p) const;

  /// Learner fits actually executed (cache hits excluded).
  std::size_t fits_performed() const { return fits_performed_.load(); }

 private:
  Partition checked(const Partition& p) const;
  std::shared_ptr<const SegmentationModel> fit_group(const std::vector<std::size_t>& idx) const;

  std::vector<const Scan*> scans_;
  const Learner& learner_;
  BaselineScores baseline_;

  mutable std::mutex mu_;
  mutable std::map<std::pair<ObjectiveKind, Partition>, EvaluationRecord> cache_;
  mutable std::atomic<std::size_t> fits_performed_{0};
};

}  // namespace stylesplit
