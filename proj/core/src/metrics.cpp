#include "stylesplit/metrics.hpp"

#include <cmath>

namespace stylesplit {

namespace {

void require_same_grid(const Mask& g, const Mask& p) {
  if (!g.same_grid(p)) throw InvalidArgument("masks have different dimensions");
}

std::vector<std::uint8_t> border_flags(const BoundarySet& b, int width, int height) {
  std::vector<std::uint8_t> flags(static_cast<std::size_t>(width) * height, 0);
  for (auto px : b.points()) flags[static_cast<std::size_t>(px.row) * width + px.col] = 1;
  return flags;
}

std::size_t overlap(const Mask& g, const Mask& p) {
  auto a = g.pixels();
  auto b = p.pixels();
  std::size_t n = 0;
  for (std::size_t i = 0; i < a.size(); ++i) n += (a[i] & b[i]);
  return n;
}

}  // namespace

double dsc(const Mask& g, const Mask& p) {
  require_same_grid(g, p);
  const auto denom = g.foreground_count() + p.foreground_count();
  if (denom == 0) return 1.0;
  return 2.0 * static_cast<double>(overlap(g, p)) / static_cast<double>(denom);
}

std::vector<Pixel> tolerance_offsets(Spacing spacing, double tau_mm) {
  if (!(tau_mm >= 0.0)) throw InvalidArgument("tau must be non-negative");
  const int reach_x = static_cast<int>(std::floor(tau_mm / spacing.x));
  const int reach_y = static_cast<int>(std::floor(tau_mm / spacing.y));
  const double tau2 = tau_mm * tau_mm;
  std::vector<Pixel> out;
  for (int dr = -reach_y; dr <= reach_y; ++dr)
    for (int dc = -reach_x; dc <= reach_x; ++dc) {
      const double x = dc * spacing.x;
      const double y = dr * spacing.y;
      if (x * x + y * y <= tau2) out.push_back({dc, dr});
    }
  return out;
}

std::size_t count_border_hits(const std::vector<Pixel>& from, std::span<const std::uint8_t> to_flags,
                              int width, int height, std::span<const Pixel> offsets) {
  std::size_t hits = 0;
  for (auto px : from) {
    for (auto o : offsets) {
      const int c = px.col + o.col;
      const int r = px.row + o.row;
      if (c < 0 || r < 0 || c >= width || r >= height) continue;
      if (to_flags[static_cast<std::size_t>(r) * width + c]) {
        ++hits;
        break;
      }
    }
  }
  return hits;
}

SurfaceCounts sdsc_slice(const Mask& g, const Mask& p, const MetricConfig& cfg) {
  require_same_grid(g, p);
  if (g.spacing() != p.spacing()) throw InvalidArgument("masks have different spacing");
  cfg.validate();
  const auto sg = boundary(g);
  const auto sp = boundary(p);
  SurfaceCounts counts{0, sg.size() + sp.size()};
  if (sg.empty() || sp.empty()) return counts;
  const auto offsets = tolerance_offsets(g.spacing(), cfg.tau_mm);
  const int w = g.width();
  const int h = g.height();
  counts.hits = count_border_hits(sg.points(), border_flags(sp, w, h), w, h, offsets) +
                count_border_hits(sp.points(), border_flags(sg, w, h), w, h, offsets);
  return counts;
}

ScorePair score_scan(std::span<const Mask> g, std::span<const Mask> p, const MetricConfig& cfg) {
  if (g.size() != p.size()) throw InvalidArgument("slice counts differ");
  if (g.empty()) throw NoScoreableSliceError();
  std::size_t inter = 0;
  std::size_t sizes = 0;
  SurfaceCounts pooled;
  for (std::size_t i = 0; i < g.size(); ++i) {
    require_same_grid(g[i], p[i]);
    inter += overlap(g[i], p[i]);
    sizes += g[i].foreground_count() + p[i].foreground_count();
    pooled += sdsc_slice(g[i], p[i], cfg);
  }
  if (!pooled.scoreable()) throw NoScoreableSliceError();
  const double d = sizes == 0 ? 1.0 : 2.0 * static_cast<double>(inter) / static_cast<double>(sizes);
  return {d, pooled.ratio()};
}

}  // namespace stylesplit
