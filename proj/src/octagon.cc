#include "exdet/octagon.h"

#include <algorithm>
#include <bit>
#include <cmath>

#include "exdet/errors.h"

namespace exdet {

Polygon build_octagon(const Point& top, const Point& left, const Point& bottom,
                      const Point& right) {
  if (!is_valid_extreme_chain(top, left, bottom, right)) {
    throw InputError("extreme points violate the top/left/bottom/right order");
  }
  const Box box{left.x, top.y, right.x, bottom.y};
  const double w = box.width();
  const double h = box.height();
  if (!(w > 0.0) || !(h > 0.0)) {
    throw InputError("octagon needs a box with positive width and height");
  }
  const double hx = w / 8.0;
  const double hy = h / 8.0;
  auto clip_x = [&](double x) { return std::clamp(x, box.left, box.right); };
  auto clip_y = [&](double y) { return std::clamp(y, box.top, box.bottom); };

  Polygon oct;
  oct.vertices = {
      {clip_x(top.x - hx), box.top},       {clip_x(top.x + hx), box.top},
      {box.right, clip_y(right.y - hy)},   {box.right, clip_y(right.y + hy)},
      {clip_x(bottom.x + hx), box.bottom}, {clip_x(bottom.x - hx), box.bottom},
      {box.left, clip_y(left.y + hy)},     {box.left, clip_y(left.y - hy)},
  };
  return oct;
}

RasterMask::RasterMask(int width, int height)
    : width_(std::max(width, 0)), height_(std::max(height, 0)) {
  words_.assign((static_cast<std::size_t>(width_) * height_ + 63) / 64, 0);
}

void RasterMask::set_span(int y, int x0, int x1) {
  for (int x = std::max(x0, 0); x < std::min(x1, width_); ++x) set(x, y);
}

std::size_t RasterMask::count() const {
  std::size_t n = 0;
  for (std::uint64_t w : words_) n += std::popcount(w);
  return n;
}

namespace {

void fill_ring(const Polygon& polygon, RasterMask& mask) {
  const auto& v = polygon.vertices;
  const std::size_t n = v.size();
  if (n < 3) return;
  std::vector<double> xs;
  for (int y = 0; y < mask.height(); ++y) {
    const double sy = y + 0.5;
    xs.clear();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
      const Point& a = v[j];
      const Point& b = v[i];
      // Half-open: an edge covers sample rows in [min_y, max_y).
      if ((a.y <= sy) == (b.y <= sy)) continue;
      xs.push_back(a.x + (sy - a.y) * (b.x - a.x) / (b.y - a.y));
    }
    std::sort(xs.begin(), xs.end());
    for (std::size_t k = 0; k + 1 < xs.size(); k += 2) {
      // Pixel centers x + 0.5 in [xs[k], xs[k+1]).
      const int x0 = static_cast<int>(std::ceil(xs[k] - 0.5));
      const int x1 = static_cast<int>(std::ceil(xs[k + 1] - 0.5));
      mask.set_span(y, x0, x1);
    }
  }
}

}  // namespace

RasterMask rasterize(const Polygon& polygon, int width, int height) {
  RasterMask mask(width, height);
  fill_ring(polygon, mask);
  return mask;
}

RasterMask rasterize(std::span<const Polygon> parts, int width, int height) {
  RasterMask mask(width, height);
  for (const auto& part : parts) fill_ring(part, mask);
  return mask;
}

double mask_iou(const RasterMask& a, const RasterMask& b) {
  if (a.width() != b.width() || a.height() != b.height()) {
    throw InputError("mask dimensions differ");
  }
  std::size_t inter = 0;
  std::size_t uni = 0;
  const auto& wa = a.words();
  const auto& wb = b.words();
  for (std::size_t i = 0; i < wa.size(); ++i) {
    inter += std::popcount(wa[i] & wb[i]);
    uni += std::popcount(wa[i] | wb[i]);
  }
  if (uni == 0) return 0.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

}  // namespace exdet
