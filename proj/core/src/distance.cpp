// Exact Euclidean distance transforms by separable lower envelopes of
// parabolas (Felzenszwalb & Huttenlocher).
#include <algorithm>
#include <limits>
#include <vector>

#include "stylesplit/mask.hpp"

namespace stylesplit {

namespace {

// One-dimensional pass: out[p] = min_q ((p-q)*scale)^2 + f[q] over finite f.
template <typename T>
void lower_envelope_1d(const std::vector<T>& f, const std::vector<bool>& finite, double scale,
                       T infinity, std::vector<T>& out, std::vector<int>& hull,
                       std::vector<double>& bounds) {
  const int n = static_cast<int>(f.size());
  const double weight = scale * scale;
  int k = -1;
  auto intersect = [&](int q, int p) {
    const double lhs = static_cast<double>(f[q]) + weight * double(q) * double(q);
    const double rhs = static_cast<double>(f[p]) + weight * double(p) * double(p);
    return (lhs - rhs) / (2.0 * weight * double(q - p));
  };
  for (int q = 0; q < n; ++q) {
    if (!finite[q]) continue;
    if (k < 0) {
      k = 0;
      hull[0] = q;
      bounds[0] = -std::numeric_limits<double>::infinity();
      bounds[1] = std::numeric_limits<double>::infinity();
      continue;
    }
    double s = intersect(q, hull[k]);
    while (k >= 0 && s <= bounds[k]) {
      --k;
      if (k >= 0) s = intersect(q, hull[k]);
    }
    if (k < 0) {
      k = 0;
      hull[0] = q;
      bounds[0] = -std::numeric_limits<double>::infinity();
    } else {
      ++k;
      hull[k] = q;
      bounds[k] = s;
    }
    bounds[k + 1] = std::numeric_limits<double>::infinity();
  }
  if (k < 0) {
    std::fill(out.begin(), out.end(), infinity);
    return;
  }
  int j = 0;
  for (int p = 0; p < n; ++p) {
    while (bounds[j + 1] < p) ++j;
    const T d = static_cast<T>(p - hull[j]) * static_cast<T>(scale);
    out[p] = d * d + f[hull[j]];
  }
}

template <typename T>
Grid<T> separable_transform(const Grid<std::uint8_t>& feature, double sx, double sy, T infinity) {
  const int w = feature.width();
  const int h = feature.height();
  Grid<T> grid(w, h, infinity);
  std::vector<bool> finite(h);
  const int n = std::max(w, h);
  std::vector<T> f(n), out(n);
  std::vector<int> hull(n);
  std::vector<double> bounds(n + 1);

  f.resize(h);
  out.resize(h);
  for (int c = 0; c < w; ++c) {
    for (int r = 0; r < h; ++r) {
      finite[r] = feature(c, r) != 0;
      f[r] = finite[r] ? T{0} : infinity;
    }
    lower_envelope_1d(f, finite, sy, infinity, out, hull, bounds);
    for (int r = 0; r < h; ++r) grid(c, r) = out[r];
  }

  finite.assign(w, false);
  f.resize(w);
  out.resize(w);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      f[c] = grid(c, r);
      finite[c] = f[c] < infinity;
    }
    lower_envelope_1d(f, finite, sx, infinity, out, hull, bounds);
    for (int c = 0; c < w; ++c) grid(c, r) = out[c];
  }
  return grid;
}

}  // namespace

Grid<std::int64_t> squared_distance_transform(const Grid<std::uint8_t>& feature) {
  return separable_transform<std::int64_t>(feature, 1.0, 1.0, kNoFeature);
}

Grid<double> squared_distance_transform(const Grid<std::uint8_t>& feature, Spacing spacing) {
  return separable_transform<double>(feature, spacing.x, spacing.y,
                                     std::numeric_limits<double>::infinity());
}

}  // namespace stylesplit
