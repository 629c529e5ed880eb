#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "stylesplit/mask.hpp"

namespace stylesplit {

struct MetricConfig {
  /// Surface tolerance in mm; a border point within tau (closed ball) of
  /// the other border counts as a hit.
  double tau_mm = 0.5;

  void validate() const {
    if (!(tau_mm >= 0.0)) throw InvalidArgument("tau must be non-negative");
  }
};

struct ScorePair {
  double dsc = 0.0;
  double sdsc = 0.0;
};

/// Raw surface-Dice counts for one slice, kept unnormalised so scans can
/// pool them.
struct SurfaceCounts {
  std::size_t hits = 0;
  std::size_t total = 0;

  SurfaceCounts& operator+=(const SurfaceCounts& o) {
    hits += o.hits;
    total += o.total;
    return *this;
  }
  bool scoreable() const { return total > 0; }
  double ratio() const { return static_cast<double>(hits) / static_cast<double>(total); }

  friend bool operator==(const SurfaceCounts&, const SurfaceCounts&) = default;
};

class NoScoreableSliceError : public std::runtime_error {
 public:
  NoScoreableSliceError() : std::runtime_error("scan has no slice with a nonempty border") {}
};

/// 2|G n P| / (|G| + |P|); 1.0 when both masks are empty.
double dsc(const Mask& g, const Mask& p);

/// Hits and totals of the 2D surface Dice. Both masks empty gives (0, 0).
SurfaceCounts sdsc_slice(const Mask& g, const Mask& p, const MetricConfig& cfg);

/// Scan-level scores pooled over slices: DSC from summed overlaps, SDSC from
/// summed hits over summed totals. Throws NoScoreableSliceError when every
/// slice pair is empty.
ScorePair score_scan(std::span<const Mask> g, std::span<const Mask> p, const MetricConfig& cfg);

/// Pixel offsets (dcol, drow) whose physical length is within tau.
std::vector<Pixel> tolerance_offsets(Spacing spacing, double tau_mm);

/// Counts hits of `from` border points that lie within the tolerance of the
/// `to` border given as a flag grid (row-major, same size as the mask).
std::size_t count_border_hits(const std::vector<Pixel>& from, std::span<const std::uint8_t> to_flags,
                              int width, int height, std::span<const Pixel> offsets);

}  // namespace stylesplit
