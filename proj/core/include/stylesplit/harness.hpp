#pragma once

#include <filesystem>
#include <memory>
#include <nlohmann/json.hpp>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "stylesplit/cohort_io.hpp"
#include "stylesplit/partitioner.hpp"
#include "stylesplit/style_sim.hpp"

namespace stylesplit {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Failure inside one experiment stage; the message is prefixed with the
/// stage name.
class StageError : public std::runtime_error {
 public:
  StageError(std::string stage, const std::string& what)
      : std::runtime_error(stage + ": " + what), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

enum class ExperimentKind { kGridRow, kCorrelation, kRecursive };
std::string_view to_string(ExperimentKind kind);
ExperimentKind parse_experiment_kind(std::string_view text);

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::kGridRow;
  std::vector<StyleSpec> styles{{StyleOperation::kErosion, 10, 4}, {StyleOperation::kDilation, 10, 4}};
  std::string layout = "two-style";
  std::uint64_t seed = 1;
  PhantomConfig phantom;
  LearnerSpec learner;
  MetricConfig metric;
  GAConfig ga;
  int min_group = 4;
  double min_improvement = 0.0;
  /// Leaf limit for the recursive partitioner; 0 uses the style count.
  int expected_groups = 0;
  int samples_per_distance = 5;
  int max_distance = 10;

  void validate() const;
  nlohmann::json to_json() const;
  /// Missing fields keep their defaults; unknown keys are rejected.
  static ExperimentConfig from_json(const nlohmann::json& j);
};

nlohmann::json phantom_to_json(const PhantomConfig& cfg);
PhantomConfig phantom_from_json(const nlohmann::json& j, PhantomConfig defaults);

/// The nine variation rows: four operation pairs at N(10,4) and N(5,1),
/// plus the three-style recursive row. Row i uses seed + i.
std::vector<ExperimentConfig> default_grid(std::uint64_t seed = 1);
nlohmann::json grid_to_json(const std::vector<ExperimentConfig>& rows);
std::vector<ExperimentConfig> grid_from_json(const nlohmann::json& j);

/// Cohort plus a pretrained learner, ready for partitioning.
struct PreparedExperiment {
  StyledCohort cohort;
  std::unique_ptr<Learner> learner;
  std::vector<const Scan*> scans;
  std::vector<int> labels;
};

std::unique_ptr<PreparedExperiment> prepare_experiment(StyledCohort cohort, const LearnerSpec& learner,
                                                       const MetricConfig& metric);
std::unique_ptr<PreparedExperiment> prepare_experiment(const ExperimentConfig& cfg);

struct GridRowReport {
  std::string variation;
  std::string magnitude;
  /// Empty when the found group count differs from the style count.
  std::optional<int> misclassified;
  int groups = 0;
  ScorePair mixture;
  ScorePair specific;
  std::vector<std::vector<std::string>> group_ids;
  /// Sum over all optimizer runs of the row.
  int true_evaluations = 0;
  /// True evaluations of each optimizer run (one per split node for
  /// recursive rows).
  std::vector<int> run_evaluations;
  std::vector<nlohmann::json> evaluations;
  /// Manifest of the generated cohort (labels, split, specs, seed).
  nlohmann::json cohort;

  double dsc_improvement() const;
  double sdsc_improvement() const;
  nlohmann::json to_json() const;
  /// Restores the summary fields written by to_json.
  static GridRowReport from_json(const nlohmann::json& j);
};

/// Percent change 100 * (specific - mixture) / mixture; infinite when the
/// mixture score is zero and the specific score is not.
double improvement_percent(double mixture, double specific);

GridRowReport run_grid_row(const ExperimentConfig& cfg);

struct CorrelationPoint {
  int distance = 0;
  Partition partition;
  double f = 0.0;
  double g = 0.0;
  bool optimum = false;
};

struct CorrelationReport {
  std::vector<CorrelationPoint> points;
  double rho = 0.0;
  std::vector<nlohmann::json> evaluations;

  nlohmann::json to_json() const;
};

class InsufficientSolutionsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Draws `per_distance` distinct canonical partitions at each Hamming
/// distance 1..max_distance from `optimum` by flipping uniformly chosen bit
/// sets. Complements count as the same partition. Every draw keeps at least
/// two scans in each subgroup.
std::vector<CorrelationPoint> sample_hamming_shell(const Partition& optimum, int per_distance, int max_distance,
                                                   Rng& rng);

double pearson(const std::vector<double>& x, const std::vector<double>& y);

CorrelationReport correlation_study(const PartitionEvaluator& evaluator, const Partition& optimum,
                                    int per_distance, int max_distance, Rng& rng);
CorrelationReport run_correlation(const ExperimentConfig& cfg);

/// Runs every row sequentially and writes cohort.json, evals.jsonl,
/// grid.csv and report.md under `out_dir`.
std::vector<GridRowReport> run_grid(const std::vector<ExperimentConfig>& rows, const std::filesystem::path& out_dir);

}  // namespace stylesplit
