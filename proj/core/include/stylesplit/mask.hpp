#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace stylesplit {

/// Raised when a value violates a documented invariant at construction time.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// In-plane pixel spacing in millimetres.
struct Spacing {
  double x = 1.0;
  double y = 1.0;

  friend bool operator==(const Spacing&, const Spacing&) = default;
};

/// Physical voxel spacing of a scan; z is the slice distance.
struct VoxelSpacing {
  double x = 0.6;
  double y = 0.6;
  double z = 2.0;

  Spacing in_plane() const { return {x, y}; }
  friend bool operator==(const VoxelSpacing&, const VoxelSpacing&) = default;
};

struct Pixel {
  int col = 0;
  int row = 0;

  friend bool operator==(const Pixel&, const Pixel&) = default;
  friend auto operator<=>(const Pixel& a, const Pixel& b) {
    if (auto c = a.row <=> b.row; c != 0) return c;
    return a.col <=> b.col;
  }
};

struct PointMm {
  double x = 0.0;
  double y = 0.0;
};

/// Dense row-major grid of scalar values.
template <typename T>
class Grid {
 public:
  Grid() = default;
  Grid(int width, int height, T fill = T{})
      : width_(width), height_(height), values_(checked_size(width, height), fill) {}
  Grid(int width, int height, std::vector<T> values)
      : width_(width), height_(height), values_(std::move(values)) {
    if (values_.size() != checked_size(width, height)) {
      throw InvalidArgument("grid value count does not match width x height");
    }
  }

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return values_.size(); }

  T& operator()(int col, int row) { return values_[index(col, row)]; }
  const T& operator()(int col, int row) const { return values_[index(col, row)]; }

  std::span<T> values() { return values_; }
  std::span<const T> values() const { return values_; }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  static std::size_t checked_size(int width, int height) {
    if (width <= 0 || height <= 0) throw InvalidArgument("grid dimensions must be positive");
    return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  }
  std::size_t index(int col, int row) const {
    return static_cast<std::size_t>(row) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(col);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<T> values_;
};

using Image = Grid<float>;
using DistanceField = Grid<double>;

/// Binary segmentation mask with physical pixel spacing.
///
/// Pixels are stored row-major as 0/1 bytes. Any nonzero byte handed to the
/// constructor is normalised to 1 so equality compares foreground sets.
class Mask {
 public:
  Mask(int width, int height, Spacing spacing = {});
  Mask(int width, int height, std::vector<std::uint8_t> pixels, Spacing spacing = {});

  int width() const { return width_; }
  int height() const { return height_; }
  Spacing spacing() const { return spacing_; }
  std::size_t pixel_count() const { return pixels_.size(); }

  bool in_bounds(int col, int row) const {
    return col >= 0 && row >= 0 && col < width_ && row < height_;
  }
  bool at(int col, int row) const { return pixels_[index(col, row)] != 0; }
  /// Out-of-bounds reads are background.
  bool at_or_background(int col, int row) const { return in_bounds(col, row) && at(col, row); }
  void set(int col, int row, bool value) { pixels_[index(col, row)] = value ? 1 : 0; }

  std::span<const std::uint8_t> pixels() const { return pixels_; }
  std::size_t foreground_count() const;
  bool empty() const { return foreground_count() == 0; }

  bool same_grid(const Mask& other) const {
    return width_ == other.width_ && height_ == other.height_;
  }
  /// Foreground of *this is contained in the foreground of `other`.
  bool subset_of(const Mask& other) const;

  /// Row of the foreground centroid, rounded to the nearest row. Requires a
  /// nonempty mask.
  int centroid_row() const;

  friend bool operator==(const Mask& a, const Mask& b) {
    return a.width_ == b.width_ && a.height_ == b.height_ && a.pixels_ == b.pixels_;
  }

 private:
  std::size_t index(int col, int row) const {
    return static_cast<std::size_t>(row) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(col);
  }

  int width_;
  int height_;
  Spacing spacing_;
  std::vector<std::uint8_t> pixels_;
};

struct Slice {
  Image image;
  Mask mask;
};

/// One patient volume: ordered 2D slices sharing geometry.
class Scan {
 public:
  Scan(std::string id, std::vector<Slice> slices, VoxelSpacing spacing);

  const std::string& id() const { return id_; }
  const std::vector<Slice>& slices() const { return slices_; }
  std::size_t slice_count() const { return slices_.size(); }
  VoxelSpacing spacing() const { return spacing_; }
  int width() const { return slices_.front().mask.width(); }
  int height() const { return slices_.front().mask.height(); }

  /// Copy of this scan with the mask channel replaced slice by slice.
  Scan with_masks(std::vector<Mask> masks) const;
  std::vector<Mask> masks() const;

 private:
  std::string id_;
  std::vector<Slice> slices_;
  VoxelSpacing spacing_;
};

/// Inner border of a mask under 4-connectivity.
class BoundarySet {
 public:
  BoundarySet(std::vector<Pixel> points, Spacing spacing) : points_(std::move(points)), spacing_(spacing) {}

  const std::vector<Pixel>& points() const { return points_; }
  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }
  Spacing spacing() const { return spacing_; }

  /// Pixel centre in millimetres.
  PointMm to_physical(Pixel p) const {
    return {(p.col + 0.5) * spacing_.x, (p.row + 0.5) * spacing_.y};
  }

 private:
  std::vector<Pixel> points_;
  Spacing spacing_;
};

class EmptyBoundaryError : public std::runtime_error {
 public:
  EmptyBoundaryError() : std::runtime_error("boundary set is empty") {}
};

// Morphology with a Euclidean disk of integer pixel radius. Out-of-grid
// pixels count as background.
Mask erode(const Mask& m, int radius);
Mask dilate(const Mask& m, int radius);

/// Translate foreground by (dx, dy); pixels leaving the grid are dropped.
Mask shift(const Mask& m, int dx, int dy);

BoundarySet boundary(const Mask& m);

/// Per-pixel distance in mm from each pixel centre to the nearest boundary
/// point. Throws EmptyBoundaryError for an empty boundary.
DistanceField boundary_distance_field(const BoundarySet& b, int width, int height);

/// Squared Euclidean distance (pixel units) from each pixel to the nearest
/// pixel where `feature` is true. Pixels with no feature anywhere get
/// `kNoFeature`.
inline constexpr std::int64_t kNoFeature = std::int64_t{1} << 40;
Grid<std::int64_t> squared_distance_transform(const Grid<std::uint8_t>& feature);

/// Squared mm distance transform with anisotropic spacing.
Grid<double> squared_distance_transform(const Grid<std::uint8_t>& feature, Spacing spacing);

}  // namespace stylesplit
