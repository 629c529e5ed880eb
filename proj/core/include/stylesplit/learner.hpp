#pragma once

#include <functional>
#include <map>
#include <memory>
#include <nlohmann/json.hpp>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "stylesplit/mask.hpp"
#include "stylesplit/metrics.hpp"

namespace stylesplit {

class LearnerError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Identifies a trainable segmenter: the registered kind, free-form
/// hyperparameters and, once pretrained, the fitted base state.
struct LearnerSpec {
  std::string kind = "morphological-style";
  nlohmann::json hyperparams = nlohmann::json::object();
  std::optional<nlohmann::json> pretrain_state;

  nlohmann::json to_json() const;
  static LearnerSpec from_json(const nlohmann::json& j);
};

class SegmentationModel {
 public:
  virtual ~SegmentationModel() = default;
  virtual std::vector<Mask> predict(const Scan& scan) const = 0;
  /// Fitted state for reports.
  virtual nlohmann::json describe() const = 0;
};

/// A segmenter that can be pretrained once and then fitted on arbitrary
/// subsets of scans. Implementations must be safe to call concurrently and
/// deterministic: identical inputs give identical models.
class Learner {
 public:
  virtual ~Learner() = default;

  virtual const LearnerSpec& spec() const = 0;
  virtual const MetricConfig& metric() const = 0;

  /// Returns a copy of spec() carrying the pretrain state.
  virtual LearnerSpec pretrain(std::span<const Scan* const> scans) const = 0;

  /// Requires a pretrained spec and a nonempty training list.
  virtual std::shared_ptr<const SegmentationModel> fit(std::span<const Scan* const> train) const = 0;

  /// Scan-level SDSC of the model's prediction against the scan's masks.
  virtual double sdsc(const SegmentationModel& model, const Scan& scan) const;
  virtual ScorePair score(const SegmentationModel& model, const Scan& scan) const;
};

using LearnerFactory =
    std::function<std::unique_ptr<Learner>(const LearnerSpec& spec, const MetricConfig& metric)>;

/// Maps learner kinds to factories. The built-in learners are registered on
/// first access.
class LearnerRegistry {
 public:
  static LearnerRegistry& instance();

  void add(const std::string& kind, LearnerFactory factory);
  bool contains(const std::string& kind) const;
  std::vector<std::string> kinds() const;
  std::unique_ptr<Learner> make(const LearnerSpec& spec, const MetricConfig& metric = {}) const;

 private:
  LearnerRegistry();
  std::map<std::string, LearnerFactory> factories_;
};

std::vector<const Scan*> as_pointers(std::span<const Scan> scans);

}  // namespace stylesplit
