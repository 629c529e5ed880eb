#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "stylesplit/mask.hpp"

using namespace stylesplit;

namespace {

Mask full(int w, int h) { return Mask(w, h, std::vector<std::uint8_t>(static_cast<std::size_t>(w) * h, 1)); }

Mask single(int w, int h, int c, int r) {
  Mask m(w, h);
  m.set(c, r, true);
  return m;
}

}  // namespace

TEST_CASE("mask normalises nonzero bytes and rejects bad sizes") {
  Mask m(2, 1, std::vector<std::uint8_t>{0, 7});
  CHECK(m.at(1, 0));
  CHECK(m == Mask(2, 1, std::vector<std::uint8_t>{0, 1}));
  CHECK_THROWS_AS(Mask(2, 2, std::vector<std::uint8_t>{1}), InvalidArgument);
  CHECK_THROWS_AS(Mask(0, 3), InvalidArgument);
}

TEST_CASE("erode examples") {
  const Mask e = erode(full(3, 3), 1);
  CHECK(e.foreground_count() == 1);
  CHECK(e.at(1, 1));

  std::mt19937_64 rng(3);
  const Mask m = oracle::random_blobs(rng, 20, 20, {});
  CHECK(erode(m, 0) == m);
  CHECK(erode(Mask(9, 9), 5).empty());
}

TEST_CASE("dilate examples") {
  const Mask d = dilate(single(5, 5, 2, 2), 1);
  CHECK(d.foreground_count() == 5);
  for (auto [c, r] : {std::pair{2, 2}, {1, 2}, {3, 2}, {2, 1}, {2, 3}}) CHECK(d.at(c, r));

  std::mt19937_64 rng(4);
  const Mask m = oracle::random_blobs(rng, 20, 20, {});
  CHECK(dilate(m, 0) == m);
}

TEST_CASE("erode and dilate match disk enumeration") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 40; ++trial) {
    const Mask m = trial % 2 ? oracle::random_blobs(rng, 24, 20, {}) : oracle::random_noise(rng, 24, 20, {}, 0.6);
    const int r = trial % 6;
    CHECK(erode(m, r) == oracle::erode(m, r));
    CHECK(dilate(m, r) == oracle::dilate(m, r));
  }
}

TEST_CASE("closing contains convex masks away from the grid edge") {
  // Out-of-grid pixels are background, so the property only holds for
  // pixels whose disk fits inside the grid.
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> c(5, 11), rad(1.5, 5);
  int checked = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const Mask m = oracle::ellipse(16, 16, c(rng), c(rng), rad(rng), rad(rng));
    for (int r = 1; r <= 3; ++r) {
      bool interior = true;
      for (int y = 0; y < 16; ++y)
        for (int x = 0; x < 16; ++x)
          if (m.at(x, y) && (x < r || y < r || x >= 16 - r || y >= 16 - r)) interior = false;
      if (!interior) continue;
      ++checked;
      CHECK(m.subset_of(erode(dilate(m, r), r)));
    }
  }
  CHECK(checked > 50);
}

TEST_CASE("morphology is monotone and ordered") {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    const Mask a = oracle::random_blobs(rng, 24, 24, {});
    Mask b = a;
    const Mask extra = oracle::random_blobs(rng, 24, 24, {}, 1);
    for (int y = 0; y < 24; ++y)
      for (int x = 0; x < 24; ++x)
        if (extra.at(x, y)) b.set(x, y, true);
    for (int r = 0; r <= 4; ++r) {
      CHECK(erode(a, r).subset_of(erode(b, r)));
      CHECK(dilate(a, r).subset_of(dilate(b, r)));
      CHECK(erode(a, r).subset_of(a));
      CHECK(a.subset_of(dilate(a, r)));
    }
  }
}

TEST_CASE("shift examples and inverse") {
  std::mt19937_64 rng(7);
  const Mask m = oracle::random_blobs(rng, 16, 16, {});
  CHECK(shift(m, 0, 0) == m);
  CHECK(shift(single(5, 5, 2, 2), 1, -2) == single(5, 5, 3, 0));
  CHECK(shift(single(5, 5, 0, 0), -1, 0).empty());

  const Mask inner = oracle::ellipse(20, 20, 10, 10, 4, 3);
  for (int dx = -5; dx <= 5; dx += 2)
    for (int dy = -5; dy <= 5; dy += 5) CHECK(shift(shift(inner, dx, dy), -dx, -dy) == inner);
}

TEST_CASE("boundary examples") {
  CHECK(boundary(full(3, 3)).size() == 8);
  const auto b = boundary(single(4, 4, 1, 2));
  REQUIRE(b.size() == 1);
  CHECK(b.points()[0] == Pixel{1, 2});
  CHECK(boundary(Mask(4, 4)).empty());
}

TEST_CASE("boundary matches 4-neighbour enumeration") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 30; ++trial) {
    const Mask m = oracle::random_noise(rng, 17, 13, {}, 0.5);
    auto got = boundary(m).points();
    auto want = oracle::border(m);
    std::sort(got.begin(), got.end());
    std::sort(want.begin(), want.end());
    CHECK(got == want);
    for (auto p : got) CHECK(m.at(p.col, p.row));
  }
}

TEST_CASE("boundary distance field examples") {
  const Spacing s{0.6, 0.6};
  const BoundarySet b({{0, 0}}, s);
  const auto f = boundary_distance_field(b, 8, 8);
  CHECK(f(0, 0) == 0.0);
  CHECK(f(3, 4) == doctest::Approx(3.0).epsilon(1e-12));
  CHECK_THROWS_AS(boundary_distance_field(BoundarySet({}, s), 8, 8), EmptyBoundaryError);
}

TEST_CASE("boundary distance field matches brute force") {
  std::mt19937_64 rng(9);
  const Spacing spacings[] = {{0.6, 0.6}, {0.3, 0.3}, {0.5, 1.25}};
  for (int trial = 0; trial < 12; ++trial) {
    const Spacing s = spacings[trial % 3];
    const Mask m = trial % 2 ? oracle::random_blobs(rng, 32, 32, s) : oracle::random_noise(rng, 32, 32, s, 0.02);
    const auto b = boundary(m);
    const auto f = boundary_distance_field(b, 32, 32);
    const auto want = oracle::distance_field(b.points(), 32, 32, s);
    for (int y = 0; y < 32; ++y)
      for (int x = 0; x < 32; ++x) CHECK(f(x, y) == doctest::Approx(want[y * 32 + x]).epsilon(1e-9));
  }
}

TEST_CASE("squared distance transform matches brute force") {
  std::mt19937_64 rng(10);
  for (int trial = 0; trial < 12; ++trial) {
    const int w = 9 + trial, h = 21 - trial;
    std::bernoulli_distribution on(trial < 2 ? 0.0 : 0.05);
    std::vector<std::uint8_t> feat(static_cast<std::size_t>(w) * h);
    for (auto& v : feat) v = on(rng);
    const auto got = squared_distance_transform(Grid<std::uint8_t>(w, h, feat));
    const auto want = oracle::squared_edt(feat, w, h);
    CHECK(std::vector<std::int64_t>(got.values().begin(), got.values().end()) == want);
  }
}

TEST_CASE("scan geometry") {
  Mask a(4, 4, Spacing{0.6, 0.6}), b(4, 4, Spacing{0.6, 0.6});
  a.set(1, 1, true);
  b.set(2, 2, true);
  std::vector<Slice> slices{{Image(4, 4), a}, {Image(4, 4), b}};
  Scan s("a", slices, {0.6, 0.6, 2.0});
  CHECK(s.slice_count() == 2);
  const Scan t = s.with_masks({Mask(4, 4, Spacing{0.6, 0.6}), a});
  CHECK(t.masks()[0].empty());
  CHECK(t.masks()[1] == a);
  CHECK(t.id() == "a");
  CHECK_THROWS(s.with_masks({Mask(4, 4, Spacing{0.6, 0.6}), Mask(4, 4, Spacing{0.6, 0.6})}));
  CHECK_THROWS(s.with_masks({a}));
}
