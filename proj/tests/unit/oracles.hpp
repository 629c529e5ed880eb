#pragma once

// Brute-force reference implementations. Deliberately naive: every result is
// obtained by enumerating pixels or pixel pairs.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "stylesplit/mask.hpp"
#include "stylesplit/metrics.hpp"

namespace oracle {

using stylesplit::Mask;
using stylesplit::Pixel;
using stylesplit::Spacing;

inline bool in_disk(int dx, int dy, int r) { return dx * dx + dy * dy <= r * r; }

inline Mask erode(const Mask& m, int r) {
  Mask out(m.width(), m.height(), m.spacing());
  for (int y = 0; y < m.height(); ++y)
    for (int x = 0; x < m.width(); ++x) {
      bool all = true;
      for (int dy = -r; dy <= r && all; ++dy)
        for (int dx = -r; dx <= r && all; ++dx)
          if (in_disk(dx, dy, r) && !m.at_or_background(x + dx, y + dy)) all = false;
      out.set(x, y, all);
    }
  return out;
}

inline Mask dilate(const Mask& m, int r) {
  Mask out(m.width(), m.height(), m.spacing());
  for (int y = 0; y < m.height(); ++y)
    for (int x = 0; x < m.width(); ++x) {
      bool any = false;
      for (int dy = -r; dy <= r && !any; ++dy)
        for (int dx = -r; dx <= r && !any; ++dx)
          if (in_disk(dx, dy, r) && m.at_or_background(x + dx, y + dy)) any = true;
      out.set(x, y, any);
    }
  return out;
}

inline std::vector<Pixel> border(const Mask& m) {
  std::vector<Pixel> pts;
  for (int y = 0; y < m.height(); ++y)
    for (int x = 0; x < m.width(); ++x) {
      if (!m.at(x, y)) continue;
      if (!m.at_or_background(x - 1, y) || !m.at_or_background(x + 1, y) || !m.at_or_background(x, y - 1) ||
          !m.at_or_background(x, y + 1))
        pts.push_back({x, y});
    }
  return pts;
}

inline double dist_mm(Pixel a, Pixel b, Spacing s) {
  const double dx = ((a.col + 0.5) - (b.col + 0.5)) * s.x;
  const double dy = ((a.row + 0.5) - (b.row + 0.5)) * s.y;
  return std::sqrt(dx * dx + dy * dy);
}

inline std::vector<double> distance_field(const std::vector<Pixel>& pts, int w, int h, Spacing s) {
  std::vector<double> out(static_cast<std::size_t>(w) * h, std::numeric_limits<double>::infinity());
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (const auto& p : pts) {
        double& d = out[static_cast<std::size_t>(y) * w + x];
        d = std::min(d, dist_mm({x, y}, p, s));
      }
  return out;
}

inline std::vector<std::int64_t> squared_edt(const std::vector<std::uint8_t>& feat, int w, int h) {
  std::vector<std::int64_t> out(feat.size(), stylesplit::kNoFeature);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int fy = 0; fy < h; ++fy)
        for (int fx = 0; fx < w; ++fx)
          if (feat[static_cast<std::size_t>(fy) * w + fx]) {
            const std::int64_t d = std::int64_t{x - fx} * (x - fx) + std::int64_t{y - fy} * (y - fy);
            auto& o = out[static_cast<std::size_t>(y) * w + x];
            o = std::min(o, d);
          }
  return out;
}

/// Hits of `from` border points within tau of any `to` border point.
inline std::size_t hits(const std::vector<Pixel>& from, const std::vector<Pixel>& to, Spacing s, double tau) {
  std::size_t n = 0;
  for (const auto& a : from)
    for (const auto& b : to)
      if (dist_mm(a, b, s) <= tau) {
        ++n;
        break;
      }
  return n;
}

inline stylesplit::SurfaceCounts sdsc(const Mask& g, const Mask& p, double tau) {
  const auto bg = border(g);
  const auto bp = border(p);
  return {hits(bg, bp, g.spacing(), tau) + hits(bp, bg, g.spacing(), tau), bg.size() + bp.size()};
}

/// Random blobby mask: union of a few random discs.
inline Mask random_blobs(std::mt19937_64& rng, int w, int h, Spacing s, int blobs = 3) {
  Mask m(w, h, s);
  std::uniform_int_distribution<int> cx(0, w - 1), cy(0, h - 1), rad(1, std::max(2, std::min(w, h) / 5));
  for (int b = 0; b < blobs; ++b) {
    const int x0 = cx(rng), y0 = cy(rng), r = rad(rng);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        if (in_disk(x - x0, y - y0, r)) m.set(x, y, true);
  }
  return m;
}

/// Random mask with independent pixels; guaranteed nonempty.
inline Mask random_noise(std::mt19937_64& rng, int w, int h, Spacing s, double p) {
  Mask m(w, h, s);
  std::bernoulli_distribution on(p);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) m.set(x, y, on(rng));
  if (m.empty()) m.set(w / 2, h / 2, true);
  return m;
}

/// Axis-aligned filled ellipse, convex by construction.
inline Mask ellipse(int w, int h, double cx, double cy, double rx, double ry, Spacing s = {}) {
  Mask m(w, h, s);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double u = (x - cx) / rx, v = (y - cy) / ry;
      if (u * u + v * v <= 1.0) m.set(x, y, true);
    }
  return m;
}

}  // namespace oracle
