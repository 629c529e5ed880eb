#pragma once

#include <compare>
#include <memory>

#include "stylesplit/learner.hpp"

namespace stylesplit {

/// Fitted state of the built-in learner: signed radial offsets (positive
/// grows, negative shrinks) for the whole contour and for the halves above
/// and below the centroid row, followed by a translation.
struct StyleParams {
  int global_offset = 0;
  int top_offset = 0;
  int bottom_offset = 0;
  int shift_dx = 0;
  int shift_dy = 0;

  int& operator[](int i);
  int operator[](int i) const;
  static constexpr int kSize = 5;

  nlohmann::json to_json() const;
  static StyleParams from_json(const nlohmann::json& j);

  friend auto operator<=>(const StyleParams&, const StyleParams&) = default;
};

/// Threshold segmentation of the image channel.
Mask threshold_segmentation(const Image& image, double threshold, Spacing spacing);

/// Base segmentation of one slice prepared for repeated transformation.
struct BaseSlice {
  int width = 0;
  int height = 0;
  Spacing spacing;
  bool empty = true;
  int centroid_row = 0;
  int min_col = 0, max_col = -1, min_row = 0, max_row = -1;
  /// Outside the base: squared distance to the nearest foreground pixel.
  /// Inside: minus the squared distance to the nearest background pixel
  /// (out-of-grid counts as background).
  std::vector<std::int64_t> signed_d2;

  static BaseSlice from_mask(const Mask& base);
};

/// Applies the style transform to a prepared base segmentation.
Mask render_prediction(const BaseSlice& base, const StyleParams& params);

struct MorphologicalHyperparams {
  int search_radius = 15;
  int coarse_step = 3;
  int fine_step = 1;
  int max_sweeps = 8;
  double threshold_min = 0.1;
  double threshold_max = 0.9;
  double threshold_step = 0.05;

  static MorphologicalHyperparams from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

class MorphologicalStyleLearner;

class MorphologicalStyleModel : public SegmentationModel {
 public:
  MorphologicalStyleModel(double threshold, StyleParams params) : threshold_(threshold), params_(params) {}

  std::vector<Mask> predict(const Scan& scan) const override;
  nlohmann::json describe() const override;

  double threshold() const { return threshold_; }
  const StyleParams& params() const { return params_; }

 private:
  double threshold_;
  StyleParams params_;
};

/// Built-in learner: a pretrained threshold segmenter followed by a
/// coordinate-wise coarse-to-fine grid search over StyleParams that
/// maximises mean training SDSC. Per-scan scores are memoised by scan id, so
/// scan ids must be unique within one learner instance.
class MorphologicalStyleLearner : public Learner {
 public:
  static constexpr const char* kKind = "morphological-style";

  MorphologicalStyleLearner(LearnerSpec spec, MetricConfig metric);
  ~MorphologicalStyleLearner() override;

  const LearnerSpec& spec() const override { return spec_; }
  const MetricConfig& metric() const override { return metric_; }
  const MorphologicalHyperparams& hyperparams() const { return hyper_; }

  LearnerSpec pretrain(std::span<const Scan* const> scans) const override;
  std::shared_ptr<const SegmentationModel> fit(std::span<const Scan* const> train) const override;
  double sdsc(const SegmentationModel& model, const Scan& scan) const override;

  /// Mean scan SDSC of `params` over `scans`; the fit objective.
  double training_objective(std::span<const Scan* const> scans, const StyleParams& params) const;

  std::optional<double> threshold() const { return threshold_; }

 private:
  struct Cache;

  SurfaceCounts scan_counts(const Scan& scan, const StyleParams& params) const;

  LearnerSpec spec_;
  MetricConfig metric_;
  MorphologicalHyperparams hyper_;
  std::optional<double> threshold_;
  std::unique_ptr<Cache> cache_;
};

}  // namespace stylesplit
