#include "exdet/synth.h"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "exdet/errors.h"
#include "exdet/parallel.h"
#include "exdet/rng.h"

namespace exdet {

namespace {

// Coordinates are kept on a 0.01 px lattice so they survive text formats
// unchanged.
double snap(double v) { return std::round(v * 100.0) / 100.0; }

Box bounds_of(const Polygon& p) {
  Box b{INFINITY, INFINITY, -INFINITY, -INFINITY};
  for (const auto& v : p.vertices) {
    b.left = std::min(b.left, v.x);
    b.top = std::min(b.top, v.y);
    b.right = std::max(b.right, v.x);
    b.bottom = std::max(b.bottom, v.y);
  }
  return b;
}

// Convex polygon with vertices on an axis-aligned ellipse.
Polygon ellipse_polygon(Rng& rng, double w, double h, int n) {
  Polygon p;
  const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
  for (int i = 0; i < n; ++i) {
    const double jitter = rng.uniform(-0.3, 0.3);
    const double a = phase + 2.0 * std::numbers::pi * (i + jitter) / n;
    p.vertices.push_back({0.5 * w * (1.0 + std::cos(a)),
                          0.5 * h * (1.0 + std::sin(a))});
  }
  return p;
}

// Rectangle with independently cut corners.
Polygon box_like_polygon(Rng& rng, double w, double h) {
  const double m = 0.3 * std::min(w, h);
  double cut[4];
  for (double& c : cut) c = rng.bernoulli(0.25) ? 0.0 : rng.uniform(0.0, m);
  Polygon p;
  auto add = [&](double x, double y) {
    if (p.vertices.empty() || !(p.vertices.back() == Point{x, y})) {
      p.vertices.push_back({x, y});
    }
  };
  add(cut[0], 0.0);
  add(w - cut[1], 0.0);
  add(w, cut[1]);
  add(w, h - cut[2]);
  add(w - cut[2], h);
  add(cut[3], h);
  add(0.0, h - cut[3]);
  add(0.0, cut[0]);
  if (p.vertices.front() == p.vertices.back()) p.vertices.pop_back();
  return p;
}

Polygon translated(const Polygon& p, double dx, double dy) {
  Polygon out;
  for (const auto& v : p.vertices) out.vertices.push_back({snap(v.x + dx), snap(v.y + dy)});
  return out;
}

bool separated(const Box& a, const Box& b, double gap) {
  return a.right + gap <= b.left || b.right + gap <= a.left ||
         a.bottom + gap <= b.top || b.bottom + gap <= a.top;
}

double clearance(const SceneObject& o, const SynthConfig& c) {
  const double diag = std::hypot(o.box.width(), o.box.height());
  return std::max(c.clearance_min, c.clearance_ratio * diag) + c.clearance_margin;
}

// True when some mixed quadruple of same-class extreme points could be
// grouped around one of the objects' centers.
bool ambiguous(const std::vector<const SceneObject*>& objs, const SynthConfig& c) {
  const std::size_t n = objs.size();
  if (n < 2) return false;
  const double s = c.chain_slack;
  std::vector<Point> centers;
  std::vector<double> radius;
  for (const auto* o : objs) {
    centers.push_back(center_of(o->extremes));
    radius.push_back(clearance(*o, c));
  }
  for (std::size_t ti = 0; ti < n; ++ti) {
    const Point& t = objs[ti]->extremes.top;
    for (std::size_t li = 0; li < n; ++li) {
      const Point& l = objs[li]->extremes.left;
      if (t.y > l.y + s || l.x > t.x + s) continue;
      for (std::size_t bi = 0; bi < n; ++bi) {
        const Point& b = objs[bi]->extremes.bottom;
        if (l.y > b.y + s || l.x > b.x + s) continue;
        for (std::size_t ri = 0; ri < n; ++ri) {
          if (ti == li && li == bi && bi == ri) continue;
          const Point& r = objs[ri]->extremes.right;
          if (t.y > r.y + s || r.y > b.y + s || t.x > r.x + s || b.x > r.x + s) {
            continue;
          }
          const Point ctr = center_of(t, l, b, r);
          for (std::size_t e = 0; e < n; ++e) {
            if (std::hypot(ctr.x - centers[e].x, ctr.y - centers[e].y) < radius[e]) {
              return true;
            }
          }
        }
      }
    }
  }
  return false;
}

Scene ghost_trap_scene(Rng& rng, const SynthConfig& c, Scene scene) {
  const double usable = c.width - 2.0 * c.border;
  const double gap = std::floor(c.separation + rng.uniform(0.0, c.separation));
  const double max_w = std::min(c.max_size, (usable - 2.0 * gap) / 3.0);
  const double w = std::floor(rng.uniform(c.min_size, max_w));
  const double h = std::floor(rng.uniform(c.min_size,
                                          std::min(c.max_size, c.height - 2.0 * c.border)));
  const double span = 3.0 * w + 2.0 * gap;
  const double x0 = std::floor(rng.uniform(c.border, c.width - c.border - span));
  const double y0 = std::floor(rng.uniform(c.border, c.height - c.border - h));
  const int class_id = static_cast<int>(rng.uniform_int(0, c.num_classes - 1));
  for (int i = 0; i < 3; ++i) {
    const double left = x0 + i * (w + gap);
    Polygon rect{{{left, y0}, {left + w, y0}, {left + w, y0 + h}, {left, y0 + h}}};
    scene.objects.push_back(make_scene_object(class_id, {std::move(rect)}));
  }
  return scene;
}

}  // namespace

void SynthConfig::validate() const {
  if (num_images < 0) throw ConfigError("num_images must be >= 0");
  if (num_classes < 1) throw ConfigError("num_classes must be >= 1");
  if (width < 1 || height < 1) throw ConfigError("image size must be positive");
  if (min_objects < 0 || max_objects < min_objects) {
    throw ConfigError("object count range is empty");
  }
  if (!(min_size > 0.0) || max_size < min_size) {
    throw ConfigError("object size range is empty");
  }
  if (min_vertices < 3 || max_vertices < min_vertices) {
    throw ConfigError("vertex count range is empty");
  }
  if (chain_slack < 0.0 || clearance_ratio < 0.0 || clearance_min < 0.0 ||
      clearance_margin < 0.0) {
    throw ConfigError("grouping clearance settings must be >= 0");
  }
  if (border < 1.0 || separation < 0.0) {
    throw ConfigError("border must be >= 1 and separation >= 0");
  }
  const double usable_w = width - 2.0 * border;
  const double usable_h = height - 2.0 * border;
  if (min_size > usable_w || min_size > usable_h) {
    throw ConfigError("objects do not fit inside the image");
  }
  if (ghost_trap) {
    if (3.0 * min_size + 4.0 * separation > usable_w) {
      throw ConfigError("ghost-trap triple does not fit the image width");
    }
    return;
  }
  const double cell = min_size + separation;
  if (max_objects * cell * cell > (usable_w + separation) * (usable_h + separation)) {
    throw ConfigError("requested objects cannot be separated inside the image");
  }
}

Scene synth_scene(std::uint64_t seed, int index, const SynthConfig& c) {
  Rng rng(seed, static_cast<std::uint64_t>(index));
  Scene scene;
  scene.image_id = c.first_image_id + index;
  scene.width = c.width;
  scene.height = c.height;
  if (c.ghost_trap) return ghost_trap_scene(rng, c, std::move(scene));

  const int count = static_cast<int>(rng.uniform_int(c.min_objects, c.max_objects));
  std::vector<Box> placed;
  for (int i = 0; i < count; ++i) {
    const int class_id = static_cast<int>(rng.uniform_int(0, c.num_classes - 1));
    const double w = rng.uniform(c.min_size, std::min(c.max_size, c.width - 2.0 * c.border));
    const double h = rng.uniform(c.min_size, std::min(c.max_size, c.height - 2.0 * c.border));
    Polygon local;
    if (rng.bernoulli(c.box_like_fraction)) {
      local = box_like_polygon(rng, w, h);
    } else {
      const int n = static_cast<int>(rng.uniform_int(c.min_vertices, c.max_vertices));
      local = ellipse_polygon(rng, w, h, n);
    }
    const Box lb = bounds_of(local);

    bool ok = false;
    for (int attempt = 0; attempt < c.max_attempts && !ok; ++attempt) {
      const double x = rng.uniform(c.border - lb.left, c.width - c.border - lb.right);
      const double y = rng.uniform(c.border - lb.top, c.height - c.border - lb.bottom);
      Polygon poly = translated(local, x, y);
      const Box b = bounds_of(poly);
      if (b.left < c.border || b.top < c.border || b.right > c.width - c.border ||
          b.bottom > c.height - c.border) {
        continue;
      }
      ok = std::all_of(placed.begin(), placed.end(), [&](const Box& other) {
        return separated(b, other, c.separation);
      });
      if (!ok) continue;
      std::vector<Polygon> parts{std::move(poly)};
      SceneObject obj = make_scene_object(class_id, std::move(parts));
      if (c.unambiguous_grouping) {
        std::vector<const SceneObject*> same{&obj};
        for (const auto& o : scene.objects) {
          if (o.class_id == class_id) same.push_back(&o);
        }
        if (ambiguous(same, c)) {
          ok = false;
          continue;
        }
      }
      placed.push_back(b);
      scene.objects.push_back(std::move(obj));
    }
    if (!ok) {
      throw ConfigError("could not place object " + std::to_string(i + 1) + " of " +
                        std::to_string(count) + " in image " +
                        std::to_string(scene.image_id) + " with the requested separation");
    }
  }
  return scene;
}

std::vector<Scene> synth_scenes(std::uint64_t seed, const SynthConfig& config,
                                int threads) {
  config.validate();
  std::vector<Scene> scenes(config.num_images);
  parallel_for(scenes.size(), threads, [&](std::size_t i) {
    scenes[i] = synth_scene(seed, static_cast<int>(i), config);
  });
  return scenes;
}

}  // namespace exdet
