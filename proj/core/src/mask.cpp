#include "stylesplit/mask.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace stylesplit {

namespace {

void check_spacing(Spacing s) {
  if (!(s.x > 0.0) || !(s.y > 0.0)) throw InvalidArgument("spacing must be strictly positive");
}

std::size_t checked_pixel_count(int width, int height) {
  if (width <= 0 || height <= 0) throw InvalidArgument("mask dimensions must be positive");
  return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
}

// Foreground flags of `m` padded by one background pixel on every side.
Grid<std::uint8_t> padded_background(const Mask& m) {
  Grid<std::uint8_t> bg(m.width() + 2, m.height() + 2, 1);
  for (int r = 0; r < m.height(); ++r)
    for (int c = 0; c < m.width(); ++c) bg(c + 1, r + 1) = m.at(c, r) ? 0 : 1;
  return bg;
}

Grid<std::uint8_t> foreground_flags(const Mask& m) {
  return Grid<std::uint8_t>(m.width(), m.height(),
                            std::vector<std::uint8_t>(m.pixels().begin(), m.pixels().end()));
}

}  // namespace

Mask::Mask(int width, int height, Spacing spacing)
    : width_(width), height_(height), spacing_(spacing),
      pixels_(checked_pixel_count(width, height), 0) {
  check_spacing(spacing);
}

Mask::Mask(int width, int height, std::vector<std::uint8_t> pixels, Spacing spacing)
    : width_(width), height_(height), spacing_(spacing), pixels_(std::move(pixels)) {
  if (pixels_.size() != checked_pixel_count(width, height))
    throw InvalidArgument("mask pixel count does not match width x height");
  check_spacing(spacing);
  for (auto& p : pixels_) p = p ? 1 : 0;
}

std::size_t Mask::foreground_count() const {
  return static_cast<std::size_t>(std::count(pixels_.begin(), pixels_.end(), std::uint8_t{1}));
}

bool Mask::subset_of(const Mask& other) const {
  if (!same_grid(other)) return false;
  for (std::size_t i = 0; i < pixels_.size(); ++i)
    if (pixels_[i] && !other.pixels_[i]) return false;
  return true;
}

int Mask::centroid_row() const {
  std::int64_t sum = 0;
  std::int64_t count = 0;
  for (int r = 0; r < height_; ++r)
    for (int c = 0; c < width_; ++c)
      if (at(c, r)) {
        sum += r;
        ++count;
      }
  if (count == 0) throw InvalidArgument("centroid of an empty mask");
  return static_cast<int>(std::lround(static_cast<double>(sum) / static_cast<double>(count)));
}

Scan::Scan(std::string id, std::vector<Slice> slices, VoxelSpacing spacing)
    : id_(std::move(id)), slices_(std::move(slices)), spacing_(spacing) {
  if (slices_.empty()) throw InvalidArgument("scan '" + id_ + "' has no slices");
  if (!(spacing_.z > 0.0)) throw InvalidArgument("slice spacing must be strictly positive");
  const auto& first = slices_.front().mask;
  bool any_foreground = false;
  for (const auto& s : slices_) {
    if (!s.mask.same_grid(first) || s.mask.spacing() != spacing_.in_plane())
      throw InvalidArgument("scan '" + id_ + "' mixes slice geometries");
    if (s.image.width() != first.width() || s.image.height() != first.height())
      throw InvalidArgument("scan '" + id_ + "' image/mask size mismatch");
    any_foreground = any_foreground || !s.mask.empty();
  }
  if (!any_foreground) throw InvalidArgument("scan '" + id_ + "' has no foreground");
}

Scan Scan::with_masks(std::vector<Mask> masks) const {
  if (masks.size() != slices_.size()) throw InvalidArgument("mask count differs from slice count");
  std::vector<Slice> out;
  out.reserve(slices_.size());
  for (std::size_t i = 0; i < slices_.size(); ++i)
    out.push_back({slices_[i].image, std::move(masks[i])});
  return Scan(id_, std::move(out), spacing_);
}

std::vector<Mask> Scan::masks() const {
  std::vector<Mask> out;
  out.reserve(slices_.size());
  for (const auto& s : slices_) out.push_back(s.mask);
  return out;
}

Mask dilate(const Mask& m, int radius) {
  if (radius < 0) throw InvalidArgument("dilation radius must be non-negative");
  if (radius == 0 || m.empty()) return m;
  const auto d2 = squared_distance_transform(foreground_flags(m));
  const std::int64_t r2 = std::int64_t{radius} * radius;
  Mask out(m.width(), m.height(), m.spacing());
  for (int r = 0; r < m.height(); ++r)
    for (int c = 0; c < m.width(); ++c) out.set(c, r, d2(c, r) <= r2);
  return out;
}

Mask erode(const Mask& m, int radius) {
  if (radius < 0) throw InvalidArgument("erosion radius must be non-negative");
  if (radius == 0 || m.empty()) return m;
  const auto d2 = squared_distance_transform(padded_background(m));
  const std::int64_t r2 = std::int64_t{radius} * radius;
  Mask out(m.width(), m.height(), m.spacing());
  for (int r = 0; r < m.height(); ++r)
    for (int c = 0; c < m.width(); ++c) out.set(c, r, d2(c + 1, r + 1) > r2);
  return out;
}

Mask shift(const Mask& m, int dx, int dy) {
  if (std::abs(dx) >= m.width() || std::abs(dy) >= m.height())
    throw InvalidArgument("shift must be smaller than the grid");
  Mask out(m.width(), m.height(), m.spacing());
  for (int r = 0; r < m.height(); ++r)
    for (int c = 0; c < m.width(); ++c)
      if (m.at(c, r) && out.in_bounds(c + dx, r + dy)) out.set(c + dx, r + dy, true);
  return out;
}

BoundarySet boundary(const Mask& m) {
  std::vector<Pixel> points;
  for (int r = 0; r < m.height(); ++r)
    for (int c = 0; c < m.width(); ++c) {
      if (!m.at(c, r)) continue;
      if (!m.at_or_background(c - 1, r) || !m.at_or_background(c + 1, r) ||
          !m.at_or_background(c, r - 1) || !m.at_or_background(c, r + 1))
        points.push_back({c, r});
    }
  return BoundarySet(std::move(points), m.spacing());
}

DistanceField boundary_distance_field(const BoundarySet& b, int width, int height) {
  if (b.empty()) throw EmptyBoundaryError();
  Grid<std::uint8_t> feature(width, height, 0);
  for (auto p : b.points()) {
    if (p.col < 0 || p.row < 0 || p.col >= width || p.row >= height)
      throw InvalidArgument("boundary point outside the requested grid");
    feature(p.col, p.row) = 1;
  }
  auto sq = squared_distance_transform(feature, b.spacing());
  DistanceField out(width, height);
  auto src = sq.values();
  auto dst = out.values();
  std::transform(src.begin(), src.end(), dst.begin(), [](double v) { return std::sqrt(v); });
  return out;
}

}  // namespace stylesplit
