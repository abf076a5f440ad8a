#include "exdet/annotation.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>

#include "exdet/errors.h"

namespace exdet {

namespace {

// depth() grows in the cardinal direction; ortho() runs along the edge.
struct Direction {
  double sign;     // +1 or -1
  bool vertical;   // depth measured along y (top/bottom)

  double depth(const Point& p) const { return sign * (vertical ? p.y : p.x); }
  double ortho(const Point& p) const { return vertical ? p.x : p.y; }
  Point make(double depth_value, double ortho_value) const {
    const double d = sign * depth_value;
    return vertical ? Point{ortho_value, d} : Point{d, ortho_value};
  }
};

constexpr Direction kTopDir{-1.0, true};
constexpr Direction kBottomDir{+1.0, true};
constexpr Direction kLeftDir{-1.0, false};
constexpr Direction kRightDir{+1.0, false};

bool is_flat(const Point& a, const Point& b, const Direction& dir,
             double tol_rad) {
  const double along = std::abs(dir.vertical ? b.x - a.x : b.y - a.y);
  const double across = std::abs(dir.vertical ? b.y - a.y : b.x - a.x);
  if (along == 0.0) return false;
  return std::atan2(across, along) <= tol_rad;
}

Point extreme_in_direction(std::span<const Polygon> parts, const Direction& dir,
                           const ExtremeOptions& options) {
  const double tol_rad = options.parallel_tol_deg * std::numbers::pi / 180.0;

  double best_depth = -INFINITY;
  for (const auto& part : parts) {
    for (const auto& v : part.vertices) {
      best_depth = std::max(best_depth, dir.depth(v));
    }
  }

  std::optional<Point> chosen;
  double chosen_extent = -1.0;
  bool chosen_is_chain = false;

  for (std::size_t k = 0; k < parts.size(); ++k) {
    const auto& v = parts[k].vertices;
    const std::size_t n = v.size();
    for (std::size_t i = 0; i < n; ++i) {
      if (dir.depth(v[i]) != best_depth) continue;

      // Grow a chain of flat edges through the extremal vertex.
      std::size_t steps = 0;
      std::size_t hi = i;
      while (steps + 1 < n && is_flat(v[hi], v[(hi + 1) % n], dir, tol_rad)) {
        hi = (hi + 1) % n;
        ++steps;
      }
      std::size_t lo = i;
      while (steps + 1 < n &&
             is_flat(v[(lo + n - 1) % n], v[lo], dir, tol_rad)) {
        lo = (lo + n - 1) % n;
        ++steps;
      }
      const double oa = dir.ortho(v[lo]);
      const double ob = dir.ortho(v[hi]);
      const double extent = std::abs(ob - oa);
      const Point candidate = dir.make(best_depth, 0.5 * (oa + ob));
      const bool is_chain = steps > 0;

      bool take = false;
      if (!chosen) {
        take = true;
      } else if (options.chain_choice ==
                 ExtremeOptions::ChainChoice::kFirstInTraversal) {
        if (chosen_is_chain) {
          take = false;
        } else if (is_chain) {
          take = true;
        } else {
          take = dir.ortho(candidate) < dir.ortho(*chosen);
        }
      } else if (extent != chosen_extent) {
        take = extent > chosen_extent;
      } else {
        take = dir.ortho(candidate) < dir.ortho(*chosen);
      }
      if (take) {
        chosen = candidate;
        chosen_extent = extent;
        chosen_is_chain = is_chain;
      }
    }
  }
  return *chosen;
}

}  // namespace

ExtremePoints extremes_from_parts(std::span<const Polygon> parts,
                                  const ExtremeOptions& options) {
  if (parts.empty()) throw InputError("object has no polygon");
  double area = 0.0;
  for (const auto& part : parts) {
    if (part.vertices.size() < 3) {
      throw InputError("polygon needs at least three vertices");
    }
    for (const auto& p : part.vertices) {
      if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
        throw InputError("polygon vertex is not finite");
      }
    }
    area += polygon_area(part);
  }
  if (!(area > 0.0)) throw InputError("degenerate polygon (zero area)");

  ExtremePoints e;
  e.top = extreme_in_direction(parts, kTopDir, options);
  e.left = extreme_in_direction(parts, kLeftDir, options);
  e.bottom = extreme_in_direction(parts, kBottomDir, options);
  e.right = extreme_in_direction(parts, kRightDir, options);
  return e;
}

ExtremePoints extremes_from_polygon(const Polygon& polygon,
                                    const ExtremeOptions& options) {
  return extremes_from_parts(std::span<const Polygon>(&polygon, 1), options);
}

Point center_of(const Point& top, const Point& left, const Point& bottom,
                const Point& right) {
  return {(left.x + right.x) / 2.0, (top.y + bottom.y) / 2.0};
}

Box box_from_extremes(const Point& top, const Point& left, const Point& bottom,
                      const Point& right) {
  if (!is_valid_extreme_chain(top, left, bottom, right)) {
    throw InputError("extreme points violate the top/left/bottom/right order");
  }
  return {left.x, top.y, right.x, bottom.y};
}

SceneObject make_scene_object(int class_id, std::vector<Polygon> parts,
                              const ExtremeOptions& options) {
  SceneObject obj;
  obj.class_id = class_id;
  obj.extremes = extremes_from_parts(parts, options);
  obj.box = box_from_extremes(obj.extremes);
  for (const auto& part : parts) obj.area += polygon_area(part);
  obj.parts = std::move(parts);
  return obj;
}

}  // namespace exdet
