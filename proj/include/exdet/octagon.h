#ifndef EXDET_OCTAGON_H_
#define EXDET_OCTAGON_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "exdet/types.h"

namespace exdet {

// Octagon spanned by four extreme points: each point is widened to a segment
// of a quarter of its box edge (half on each side), clipped at the box
// corners. Vertices run clockwise (y down) from the left end of the top
// segment; coincident vertices are kept so there are always eight.
// Throws InputError for a broken ordering chain or a zero-width/height box.
Polygon build_octagon(const Point& top, const Point& left, const Point& bottom,
                      const Point& right);

// Row-major occupancy grid, one bit per pixel.
class RasterMask {
 public:
  RasterMask() = default;
  RasterMask(int width, int height);

  int width() const { return width_; }
  int height() const { return height_; }

  bool get(int x, int y) const {
    const std::size_t i = index(x, y);
    return (words_[i >> 6] >> (i & 63)) & 1u;
  }
  void set(int x, int y) {
    const std::size_t i = index(x, y);
    words_[i >> 6] |= std::uint64_t{1} << (i & 63);
  }
  // Sets pixels [x0, x1) of row y.
  void set_span(int y, int x0, int x1);

  std::size_t count() const;
  const std::vector<std::uint64_t>& words() const { return words_; }

  friend bool operator==(const RasterMask&, const RasterMask&) = default;

 private:
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * width_ + x;
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint64_t> words_;
};

// Even-odd fill sampled at pixel centers (x + 0.5, y + 0.5). Edges are
// half-open in y, and a row span covers centers in [x_enter, x_exit), so
// tiled polygons never share a pixel.
RasterMask rasterize(const Polygon& polygon, int width, int height);
// Union of several rings, each filled independently.
RasterMask rasterize(std::span<const Polygon> parts, int width, int height);

// |a & b| / |a | b|, 0 when both are empty. Throws InputError on a size
// mismatch.
double mask_iou(const RasterMask& a, const RasterMask& b);

}  // namespace exdet

#endif  // EXDET_OCTAGON_H_
