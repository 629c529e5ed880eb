#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "stylesplit/metrics.hpp"

using namespace stylesplit;

namespace {

Mask block(int w, int h, int c0, int r0, int bw, int bh, Spacing s = {}) {
  Mask m(w, h, s);
  for (int r = r0; r < r0 + bh; ++r)
    for (int c = c0; c < c0 + bw; ++c) m.set(c, r, true);
  return m;
}

}  // namespace

TEST_CASE("dsc examples") {
  const Mask a = block(6, 6, 0, 0, 2, 2);
  CHECK(dsc(a, a) == 1.0);
  CHECK(dsc(a, block(6, 6, 3, 3, 2, 2)) == 0.0);
  CHECK(dsc(a, block(6, 6, 1, 0, 2, 2)) == 0.5);
  CHECK(dsc(Mask(6, 6), Mask(6, 6)) == 1.0);
  CHECK_THROWS(dsc(a, Mask(5, 6)));
}

TEST_CASE("sdsc_slice examples") {
  const Spacing s{0.6, 0.6};
  const Mask g = block(20, 20, 5, 5, 8, 6, s);
  const auto same = sdsc_slice(g, g, {});
  CHECK(same.hits == same.total);

  const auto far = sdsc_slice(g, block(20, 20, 15, 15, 3, 3, s), {});
  CHECK(far.hits == 0);

  const Mask p = dilate(g, 1);
  CHECK(sdsc_slice(g, p, {0.5}).ratio() < 1.0);
  CHECK(sdsc_slice(g, p, {0.7}).ratio() == 1.0);

  CHECK(sdsc_slice(Mask(8, 8, s), Mask(8, 8, s), {}) == SurfaceCounts{0, 0});
  const auto one_empty = sdsc_slice(g, Mask(20, 20, s), {});
  CHECK(one_empty.hits == 0);
  CHECK(one_empty.total == boundary(g).size());
}

TEST_CASE("sdsc_slice equals all-pairs oracle") {
  std::mt19937_64 rng(21);
  const double taus[] = {0.0, 0.3, 0.5, 0.6, 0.9, 1.3};
  for (int trial = 0; trial < 40; ++trial) {
    const Spacing s = trial % 2 ? Spacing{0.6, 0.6} : Spacing{0.3, 0.45};
    const Mask g = oracle::random_blobs(rng, 32, 32, s);
    const Mask p = trial % 3 ? oracle::random_blobs(rng, 32, 32, s) : dilate(g, trial % 4);
    for (double tau : taus) CHECK(sdsc_slice(g, p, {tau}) == oracle::sdsc(g, p, tau));
  }
}

TEST_CASE("metrics are symmetric and monotone in tau") {
  std::mt19937_64 rng(22);
  for (int trial = 0; trial < 15; ++trial) {
    const Spacing s{0.6, 0.6};
    const Mask g = oracle::random_blobs(rng, 28, 28, s);
    const Mask p = oracle::random_blobs(rng, 28, 28, s);
    CHECK(dsc(g, p) == dsc(p, g));
    CHECK(sdsc_slice(g, p, {}) == sdsc_slice(p, g, {}));
    double prev = -1;
    for (double tau : {0.0, 0.2, 0.5, 0.8, 1.5, 3.0}) {
      const double v = sdsc_slice(g, p, {tau}).ratio();
      CHECK(v >= prev);
      prev = v;
    }
  }
}

TEST_CASE("sdsc does not increase along a dilation ladder") {
  const Spacing s{0.6, 0.6};
  const Mask g = oracle::ellipse(40, 40, 20, 20, 9, 7, s);
  for (double tau : {0.5, 1.0, 2.0}) {
    double prev = 2.0;
    for (int r = 0; r <= 5; ++r) {
      const double v = sdsc_slice(g, dilate(g, r), {tau}).ratio();
      CHECK(v <= prev);
      prev = v;
    }
  }
}

TEST_CASE("separation beyond tau gives zero") {
  const Spacing s{0.6, 0.6};
  const Mask g = block(30, 30, 2, 2, 5, 5, s);
  const Mask p = block(30, 30, 9, 2, 5, 5, s);
  // Closest borders are 3 columns apart: 1.8 mm.
  CHECK(sdsc_slice(g, p, {1.7}).hits == 0);
  CHECK(sdsc_slice(g, p, {1.8}).hits > 0);
}

TEST_CASE("score_scan pooling") {
  const Spacing s{0.6, 0.6};
  const Mask a = block(20, 20, 2, 2, 4, 4, s);
  const Mask b = block(20, 20, 12, 12, 4, 4, s);
  std::vector<Mask> g{a, a};
  CHECK(score_scan(g, g, {}).sdsc == 1.0);
  CHECK(score_scan(g, g, {}).dsc == 1.0);

  // One perfect slice, one miss with equal border counts.
  std::vector<Mask> p{a, b};
  CHECK(score_scan(g, p, {}).sdsc == 0.5);

  std::vector<Mask> empties{Mask(20, 20, s), Mask(20, 20, s)};
  CHECK_THROWS_AS(score_scan(empties, empties, {}), NoScoreableSliceError);

  // Empty-vs-empty slices are skipped.
  std::vector<Mask> g2{a, Mask(20, 20, s)};
  CHECK(score_scan(g2, g2, {}).sdsc == 1.0);
}

TEST_CASE("score_scan equals concatenated oracle") {
  std::mt19937_64 rng(23);
  const Spacing s{0.3, 0.3};
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<Mask> g, p;
    std::size_t hits = 0, total = 0, inter = 0, sizes = 0;
    for (int k = 0; k < 4; ++k) {
      g.push_back(oracle::random_blobs(rng, 24, 24, s));
      p.push_back(k == 2 ? Mask(24, 24, s) : oracle::random_blobs(rng, 24, 24, s));
      const auto c = oracle::sdsc(g.back(), p.back(), 0.5);
      hits += c.hits;
      total += c.total;
      for (int y = 0; y < 24; ++y)
        for (int x = 0; x < 24; ++x) {
          inter += g.back().at(x, y) && p.back().at(x, y);
          sizes += g.back().at(x, y) + p.back().at(x, y);
        }
    }
    const auto sp = score_scan(g, p, {});
    CHECK(sp.sdsc == static_cast<double>(hits) / static_cast<double>(total));
    CHECK(sp.dsc == 2.0 * static_cast<double>(inter) / static_cast<double>(sizes));
  }
}

TEST_CASE("tolerance offsets use a closed ball") {
  CHECK(tolerance_offsets({0.5, 0.5}, 0.5).size() == 5);
  CHECK(tolerance_offsets({0.6, 0.6}, 0.5).size() == 1);
  CHECK_THROWS_AS(tolerance_offsets({0.6, 0.6}, -1), InvalidArgument);
  CHECK_THROWS_AS(MetricConfig{-0.1}.validate(), InvalidArgument);
}
