#ifndef EXDET_SYNTH_H_
#define EXDET_SYNTH_H_

#include <cstdint>
#include <vector>

#include "exdet/annotation.h"

namespace exdet {

// Random scenes of convex polygons. Lengths are input-image pixels.
struct SynthConfig {
  int num_images = 10;
  std::int64_t first_image_id = 1;
  int width = 512;
  int height = 512;
  int num_classes = 3;
  int min_objects = 1;
  int max_objects = 8;
  double min_size = 24.0;
  double max_size = 128.0;
  // Minimum gap between the bounding boxes of any two objects.
  double separation = 16.0;
  // Minimum distance from an object to the image border.
  double border = 4.0;
  int min_vertices = 6;
  int max_vertices = 12;
  // Same-class objects are additionally kept free of grouping ambiguity: no
  // quadruple mixing their extreme points may satisfy the ordering chain
  // (with `chain_slack` px of tolerance) while its center lies within the
  // clearance radius of a same-class object's center. The radius is
  // max(clearance_min, clearance_ratio * box diagonal) + clearance_margin px,
  // which covers the default rendered center response above tau_c / 2.
  bool unambiguous_grouping = true;
  double chain_slack = 4.0;
  double clearance_ratio = 0.125;
  double clearance_min = 10.0;
  double clearance_margin = 8.0;
  // Share of axis-aligned, corner-cut rectangles (flat extremal edges); the
  // rest are inscribed-ellipse polygons.
  double box_like_fraction = 0.3;
  // Each scene is three equal, equally spaced, horizontally collinear
  // rectangles of one class.
  bool ghost_trap = false;
  int max_attempts = 2000;

  // Throws ConfigError for settings that cannot be satisfied.
  void validate() const;
};

// Scene `index` (0-based) of the set generated from `seed`. Each image draws
// from its own stream, so scenes can be built in any order.
Scene synth_scene(std::uint64_t seed, int index, const SynthConfig& config);
std::vector<Scene> synth_scenes(std::uint64_t seed, const SynthConfig& config,
                                int threads = 1);

}  // namespace exdet

#endif  // EXDET_SYNTH_H_
