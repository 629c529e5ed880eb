#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <nlohmann/json.hpp>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "stylesplit/mask.hpp"

namespace stylesplit {

using Rng = std::mt19937_64;

enum class StyleOperation {
  kErosion,
  kDilation,
  kShiftUp,
  kShiftDown,
  kTopOver,
  kTopUnder,
  kBottomOver,
  kBottomUnder,
};

std::string_view to_string(StyleOperation op);
StyleOperation parse_style_operation(std::string_view name);

/// A simulated segmentation style: an operator whose per-slice magnitude in
/// pixels is drawn from N(mean, std), clamped at zero and rounded.
struct StyleSpec {
  StyleOperation operation = StyleOperation::kDilation;
  double magnitude_mean = 10.0;
  double magnitude_std = 4.0;

  void validate() const;
  /// "dilation:10:4"
  std::string to_string() const;
  static StyleSpec parse(std::string_view text);
  int sample_magnitude(Rng& rng) const;

  friend bool operator==(const StyleSpec&, const StyleSpec&) = default;
};

/// Parses a comma-separated list of StyleSpec strings.
std::vector<StyleSpec> parse_style_list(std::string_view text);

/// In-plane spacing is 0.3 mm: 0.6 mm voxels zoomed in by a factor of two
/// before cropping to 128x128, so the 0.5 mm surface tolerance spans one
/// pixel.
struct PhantomConfig {
  int width = 128;
  int height = 128;
  VoxelSpacing spacing{0.3, 0.3, 2.0};
  int slices_per_scan = 20;
  double blur_sigma = 1.0;
  double noise_sd = 0.03;

  void validate() const;
};

std::vector<Scan> generate_phantom(Rng& rng, int n_scans, const PhantomConfig& cfg);
std::vector<Scan> generate_phantom(std::uint64_t seed, int n_scans, const PhantomConfig& cfg = {});

/// Applies one operator with a fixed magnitude to a single slice. Returns an
/// empty mask when the operator removes everything; empty input is returned
/// unchanged.
Mask apply_style_op(const Mask& m, StyleOperation op, int magnitude);

/// Styles every slice with an independently sampled magnitude. When a slice
/// would become empty the magnitude is reduced to the largest value that
/// keeps foreground.
Scan apply_style(const Scan& scan, const StyleSpec& spec, Rng& rng);

struct CohortLayout {
  std::string name;
  int styles = 2;
  int total_scans = 32;
  int pretrain_scans = 12;

  static CohortLayout two_style() { return {"two-style", 2, 32, 12}; }
  static CohortLayout three_style() { return {"three-style", 3, 32, 11}; }
  static CohortLayout one_style() { return {"one-style", 1, 32, 12}; }
  static CohortLayout parse(std::string_view name);
};

struct StyledCohort {
  std::vector<Scan> scans;
  std::map<std::string, int> style_labels;
  std::vector<std::string> pretrain_ids;
  std::vector<std::string> optimize_ids;
  std::vector<StyleSpec> specs;
  std::string layout;
  std::uint64_t seed = 0;

  const Scan& scan(const std::string& id) const;
  std::vector<const Scan*> pretrain_scans() const;
  std::vector<const Scan*> optimize_scans() const;
  /// Style label per optimize scan, in optimize order.
  std::vector<int> optimize_labels() const;
};

/// Generates phantoms, assigns styles round-robin, styles each scan and
/// splits into style-balanced pretrain/optimize sets. All randomness comes
/// from one stream seeded by `seed`.
StyledCohort build_experiment_cohort(std::uint64_t seed, const std::vector<StyleSpec>& specs,
                                     const CohortLayout& layout, const PhantomConfig& phantom = {});

nlohmann::json cohort_manifest(const StyledCohort& cohort);

/// Writes scans plus cohort.json under `dir`.
void write_cohort(const std::filesystem::path& dir, const StyledCohort& cohort);
StyledCohort read_cohort(const std::filesystem::path& dir);

}  // namespace stylesplit
