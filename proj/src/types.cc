#include "exdet/types.h"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "exdet/errors.h"

namespace exdet {

std::string_view kind_name(PointKind kind) {
  switch (kind) {
    case PointKind::kTop:
      return "top";
    case PointKind::kLeft:
      return "left";
    case PointKind::kBottom:
      return "bottom";
    case PointKind::kRight:
      return "right";
    case PointKind::kCenter:
      return "center";
  }
  return "unknown";
}

Heatmap::Heatmap(int width, int height)
    : Heatmap(width, height,
              std::vector<double>(static_cast<std::size_t>(std::max(width, 0)) *
                                      std::max(height, 0),
                                  0.0)) {}

Heatmap::Heatmap(int width, int height, std::vector<double> values)
    : width_(width), height_(height), values_(std::move(values)) {
  if (width <= 0 || height <= 0) {
    throw InputError("heatmap dimensions must be positive");
  }
  if (values_.size() != static_cast<std::size_t>(width) * height) {
    throw InputError("heatmap value count does not match dimensions");
  }
}

OffsetMaps OffsetMaps::zeros(int width, int height) {
  OffsetMaps maps;
  for (int k = 0; k < 4; ++k) {
    maps.dx[k] = Heatmap(width, height);
    maps.dy[k] = Heatmap(width, height);
  }
  return maps;
}

double box_iou(const Box& a, const Box& b) {
  const double iw = std::min(a.right, b.right) - std::max(a.left, b.left);
  const double ih = std::min(a.bottom, b.bottom) - std::max(a.top, b.top);
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  const double inter = iw * ih;
  const double uni = a.area() + b.area() - inter;
  if (uni <= 0.0) return 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

bool box_contains(const Box& outer, const Box& inner) {
  return outer.left <= inner.left && outer.top <= inner.top &&
         inner.right <= outer.right && inner.bottom <= outer.bottom;
}

bool is_valid_extreme_chain(const Point& top, const Point& left,
                            const Point& bottom, const Point& right) {
  return top.y <= left.y && left.y <= bottom.y &&   //
         top.y <= right.y && right.y <= bottom.y &&  //
         left.x <= top.x && top.x <= right.x &&      //
         left.x <= bottom.x && bottom.x <= right.x;
}

bool peak_before(const ScoredPoint& a, const ScoredPoint& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.point.y != b.point.y) return a.point.y < b.point.y;
  return a.point.x < b.point.x;
}

namespace {

auto geometry_key(const Detection& d) {
  static const ExtremeSet kNone{};
  const ExtremeSet& e = d.extremes ? *d.extremes : kNone;
  return std::make_tuple(d.box.top, d.box.left, d.class_id, d.box.bottom,
                         d.box.right, e.top.point.x, e.bottom.point.x,
                         e.left.point.y, e.right.point.y);
}

}  // namespace

bool detection_before(const Detection& a, const Detection& b) {
  if (a.score != b.score) return a.score > b.score;
  return geometry_key(a) < geometry_key(b);
}

void sort_detections(std::vector<Detection>& dets) {
  std::stable_sort(dets.begin(), dets.end(), detection_before);
}

double polygon_area(const Polygon& polygon) {
  const auto& v = polygon.vertices;
  if (v.size() < 3) return 0.0;
  double twice = 0.0;
  for (std::size_t i = 0, j = v.size() - 1; i < v.size(); j = i++) {
    twice += v[j].x * v[i].y - v[i].x * v[j].y;
  }
  return std::abs(twice) * 0.5;
}

}  // namespace exdet
