#include <cmath>

#include "doctest.h"
#include "exdet/errors.h"
#include "exdet/octagon.h"
#include "exdet/rng.h"
#include "oracles.h"

namespace exdet {
namespace {

std::vector<oracle::XY> xy(const Polygon& p) {
  std::vector<oracle::XY> out;
  for (const auto& v : p.vertices) out.push_back({v.x, v.y});
  return out;
}

TEST_CASE("octagon on edge midpoints") {
  const Polygon oct = build_octagon({4, 0}, {0, 4}, {4, 8}, {8, 4});
  const std::vector<Point> expected{{3, 0}, {5, 0}, {8, 3}, {8, 5},
                                    {5, 8}, {3, 8}, {0, 5}, {0, 3}};
  CHECK(oct.vertices == expected);
  CHECK(polygon_area(oct) == 46.0);
  CHECK(oracle::shoelace(xy(oct)) == 64.0 - 4 * 4.5);
}

TEST_CASE("octagon segments are clipped at the box corners") {
  const Polygon oct = build_octagon({7.8, 0}, {0, 4}, {4, 8}, {8, 4});
  CHECK(oct.vertices[0] == Point{7.8 - 1.0, 0});
  CHECK(oct.vertices[1] == Point{8, 0});
}

TEST_CASE("corner extremes collapse the octagon toward their quadrangle") {
  // Extremes at (0,0), (0,8), (8,8), (8,0) along a diagonal-free chain.
  const Polygon oct = build_octagon({0, 0}, {0, 0}, {8, 8}, {8, 8});
  CHECK(oct.vertices.size() == 8);
  CHECK(oct.vertices[0] == Point{0, 0});
  CHECK(oct.vertices[1] == Point{1, 0});
  CHECK(polygon_area(oct) == doctest::Approx(64.0 - 2 * 0.5 * 7 * 7).epsilon(1e-12));
}

TEST_CASE("octagon errors") {
  CHECK_THROWS_AS(build_octagon({5, 9}, {2, 5}, {5, 2}, {8, 5}), InputError);
  CHECK_THROWS_AS(build_octagon({2, 0}, {2, 0}, {2, 4}, {2, 4}), InputError);
}

TEST_CASE("random octagons are convex, inside the box, through the extremes") {
  Rng rng(51);
  for (int iter = 0; iter < 2000; ++iter) {
    const double l = rng.uniform(-50, 50), t = rng.uniform(-50, 50);
    const double r = l + rng.uniform(0.5, 100), b = t + rng.uniform(0.5, 100);
    const Point top{rng.uniform(l, r), t}, bottom{rng.uniform(l, r), b};
    const Point left{l, rng.uniform(t, b)}, right{r, rng.uniform(t, b)};
    const Polygon oct = build_octagon(top, left, bottom, right);
    const auto v = xy(oct);
    for (const auto& p : oct.vertices) {
      CHECK(p.x >= l);
      CHECK(p.x <= r);
      CHECK(p.y >= t);
      CHECK(p.y <= b);
    }
    CHECK(oracle::inside_convex(v, v[0].x, v[0].y));
    bool pos = false, neg = false;
    for (std::size_t i = 0; i < 8; ++i) {
      const auto& a = v[i];
      const auto& m = v[(i + 1) % 8];
      const auto& c = v[(i + 2) % 8];
      const double cross = (m.x - a.x) * (c.y - m.y) - (m.y - a.y) * (c.x - m.x);
      if (cross > 1e-9) pos = true;
      if (cross < -1e-9) neg = true;
    }
    CHECK_FALSE((pos && neg));
    for (const Point& e : {top, left, bottom, right}) {
      CHECK(oracle::inside_convex(v, e.x, e.y));
    }
    // Box minus the four corner triangles.
    const double corners =
        0.5 * (v[0].x - l) * (v[7].y - t) + 0.5 * (r - v[1].x) * (v[2].y - t) +
        0.5 * (r - v[4].x) * (b - v[3].y) + 0.5 * (v[5].x - l) * (b - v[6].y);
    CHECK(polygon_area(oct) ==
          doctest::Approx((r - l) * (b - t) - corners).epsilon(1e-9));
  }
}

TEST_CASE("rasterization samples pixel centers") {
  const Polygon sq{{{0, 0}, {4, 0}, {4, 4}, {0, 4}}};
  const RasterMask m = rasterize(sq, 8, 8);
  CHECK(m.count() == 16);
  for (int y = 0; y < 8; ++y) {
    for (int x = 0; x < 8; ++x) CHECK(m.get(x, y) == (x < 4 && y < 4));
  }
  CHECK(rasterize(Polygon{{{20, 20}, {30, 20}, {30, 30}}}, 8, 8).count() == 0);
  CHECK(rasterize(Polygon{{{-10, -10}, {-2, -10}, {-2, -2}, {-10, -2}}}, 8, 8).count() == 0);
}

TEST_CASE("triangle raster area is within half the perimeter") {
  const Polygon tri{{{0, 0}, {40, 0}, {0, 40}}};
  const double count = static_cast<double>(rasterize(tri, 64, 64).count());
  const double perimeter = 80 + 40 * std::sqrt(2.0);
  CHECK(std::abs(count - 800.0) <= perimeter / 2);
}

TEST_CASE("tiled polygons never share a pixel") {
  const Polygon a{{{0, 0}, {5.5, 0}, {3.2, 9}, {0, 9}}};
  const Polygon b{{{5.5, 0}, {10, 0}, {10, 9}, {3.2, 9}}};
  const RasterMask ma = rasterize(a, 12, 12), mb = rasterize(b, 12, 12);
  const std::vector<Polygon> both{a, b};
  const RasterMask u = rasterize(both, 12, 12);
  CHECK(ma.count() + mb.count() == u.count());
  CHECK(u.count() == 90);
}

TEST_CASE("rasterization agrees with a point-in-polygon oracle") {
  Rng rng(52);
  for (int iter = 0; iter < 100; ++iter) {
    const double l = rng.uniform(0, 20), t = rng.uniform(0, 20);
    const double r = l + rng.uniform(1, 20), b = t + rng.uniform(1, 20);
    const Polygon oct = build_octagon({rng.uniform(l, r), t}, {l, rng.uniform(t, b)},
                                      {rng.uniform(l, r), b}, {r, rng.uniform(t, b)});
    const RasterMask m = rasterize(oct, 48, 48);
    const auto v = xy(oct);
    int disagreements = 0;
    for (int y = 0; y < 48; ++y) {
      for (int x = 0; x < 48; ++x) {
        // Boundary samples may go either way.
        if (m.get(x, y) != oracle::inside_convex(v, x + 0.5, y + 0.5)) ++disagreements;
      }
    }
    CHECK(disagreements <= 8);
  }
}

TEST_CASE("mask IoU") {
  const Polygon oct = build_octagon({4, 0}, {0, 4}, {4, 8}, {8, 4});
  const RasterMask a = rasterize(oct, 8, 8);
  CHECK(mask_iou(a, a) == 1.0);
  const RasterMask left = rasterize(Polygon{{{0, 0}, {4, 0}, {4, 8}, {0, 8}}}, 8, 8);
  const RasterMask right = rasterize(Polygon{{{4, 0}, {8, 0}, {8, 8}, {4, 8}}}, 8, 8);
  CHECK(mask_iou(left, right) == 0.0);
  CHECK(mask_iou(RasterMask(8, 8), RasterMask(8, 8)) == 0.0);
  CHECK_THROWS_AS(mask_iou(RasterMask(8, 8), RasterMask(8, 9)), InputError);

  const int n = 512;
  const double s = n / 8.0;
  const Polygon big = build_octagon({4 * s, 0}, {0, 4 * s}, {4 * s, 8 * s}, {8 * s, 4 * s});
  RasterMask box(n, n);
  for (int y = 0; y < n; ++y) box.set_span(y, 0, n);
  CHECK(std::abs(mask_iou(rasterize(big, n, n), box) / 0.71875 - 1.0) < 0.01);
}

}  // namespace
}  // namespace exdet
