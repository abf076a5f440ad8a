#ifndef EXDET_ANNOTATION_H_
#define EXDET_ANNOTATION_H_

#include <cstdint>
#include <span>
#include <vector>

#include "exdet/types.h"

namespace exdet {

// Unscored extreme-point geometry of one object.
struct ExtremePoints {
  Point top;
  Point left;
  Point bottom;
  Point right;

  friend bool operator==(const ExtremePoints&, const ExtremePoints&) = default;
};

struct ExtremeOptions {
  // Edges within this many degrees of axis-parallel count as flat.
  double parallel_tol_deg = 3.0;
  // How to choose between several disjoint flat extremal chains.
  enum class ChainChoice { kLongest, kFirstInTraversal };
  ChainChoice chain_choice = ChainChoice::kLongest;
};

struct SceneObject {
  int class_id = 0;
  // One or more rings; extremes are taken over their union.
  std::vector<Polygon> parts;
  ExtremePoints extremes;
  Box box;
  double area = 0.0;
};

// Ground truth of one image, in input-image pixels.
struct Scene {
  std::int64_t image_id = 0;
  int width = 0;
  int height = 0;
  std::vector<SceneObject> objects;
};

// Extreme points of a polygon boundary. A flat extremal edge (or chain of
// flat edges) yields its midpoint along the edge direction; the depth
// coordinate is always the exact extremal value, so the derived box is the
// polygon's bounding box.
// Throws InputError for fewer than three vertices or zero area.
ExtremePoints extremes_from_polygon(const Polygon& polygon,
                                    const ExtremeOptions& options = {});
ExtremePoints extremes_from_parts(std::span<const Polygon> parts,
                                  const ExtremeOptions& options = {});

Point center_of(const Point& top, const Point& left, const Point& bottom,
                const Point& right);
inline Point center_of(const ExtremePoints& e) {
  return center_of(e.top, e.left, e.bottom, e.right);
}

// Throws InputError when the quadruple violates the ordering chain.
Box box_from_extremes(const Point& top, const Point& left, const Point& bottom,
                      const Point& right);
inline Box box_from_extremes(const ExtremePoints& e) {
  return box_from_extremes(e.top, e.left, e.bottom, e.right);
}

// Derives extremes, box and area for an annotated object.
SceneObject make_scene_object(int class_id, std::vector<Polygon> parts,
                              const ExtremeOptions& options = {});

}  // namespace exdet

#endif  // EXDET_ANNOTATION_H_
