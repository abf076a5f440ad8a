#include "exdet/pipeline.h"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>
#include <string>
#include <thread>

#include "exdet/errors.h"
#include "exdet/octagon.h"
#include "exdet/parallel.h"
#include "exdet/rng.h"
#include "exdet/synth.h"
#include "exdet/tensor_file.h"

namespace exdet {

int default_thread_count() {
  const char* env = std::getenv("EXDET_THREADS");
  if (env == nullptr || *env == '\0') return 1;
  const std::string value(env);
  int n = 0;
  if (value == "max") {
    n = 0;
  } else {
    try {
      std::size_t used = 0;
      n = std::stoi(value, &used);
      if (used != value.size() || n < 0) throw std::invalid_argument(value);
    } catch (const std::exception&) {
      throw ConfigError("EXDET_THREADS must be a non-negative integer or \"max\"");
    }
  }
  if (n == 0) n = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  return n;
}

int grid_size(int pixels, int stride) {
  if (stride < 1) throw InputError("stride must be >= 1");
  return (pixels + stride - 1) / stride;
}

DetectionMaps render_scene(const Scene& scene, int num_classes,
                           const RenderConfig& config) {
  const int w = grid_size(scene.width, config.stride);
  const int h = grid_size(scene.height, config.stride);
  DetectionMaps maps(num_classes, w, h);
  for (int c = 0; c < num_classes; ++c) {
    for (PointKind kind : kAllKinds) {
      maps.heatmap(kind, c) =
          render_heatmap(scene, c, kind, config.gaussian, config.stride, w, h).heatmap;
    }
  }
  maps.offsets() = render_offset_targets(scene, config.stride, w, h);
  return maps;
}

ImageDetections to_input_coordinates(std::int64_t image_id,
                                     std::span<const Detection> dets,
                                     int stride) {
  const double s = stride;
  auto scale = [s](Point p) { return Point{p.x * s, p.y * s}; };
  ImageDetections out{image_id, {}};
  out.detections.reserve(dets.size());
  for (const Detection& d : dets) {
    Detection o = d;
    o.box = {d.box.left * s, d.box.top * s, d.box.right * s, d.box.bottom * s};
    o.octagon.reset();
    if (d.extremes) {
      ExtremeSet& e = *o.extremes;
      for (ScoredPoint* p : {&e.top, &e.left, &e.bottom, &e.right, &e.center}) {
        p->point = scale(p->point);
      }
      const Box& b = o.box;
      if (b.width() > 0.0 && b.height() > 0.0) {
        auto cx = [&](double x) { return std::clamp(x, b.left, b.right); };
        auto cy = [&](double y) { return std::clamp(y, b.top, b.bottom); };
        o.octagon = build_octagon({cx(e.top.point.x), b.top},
                                  {b.left, cy(e.left.point.y)},
                                  {cx(e.bottom.point.x), b.bottom},
                                  {b.right, cy(e.right.point.y)});
      }
    }
    out.detections.push_back(std::move(o));
  }
  return out;
}

RoundtripResult run_roundtrip(std::span<const Scene> scenes, int num_classes,
                              const RenderConfig& render,
                              const DecodeParams& decode,
                              const EvalConfig& eval, int threads) {
  RoundtripResult result;
  result.detections.resize(scenes.size());
  DecodeParams per_image = decode;
  per_image.threads = 1;
  parallel_for(scenes.size(), threads, [&](std::size_t i) {
    const DetectionMaps maps =
        quantize_to_float(render_scene(scenes[i], num_classes, render));
    const auto dets = decode_image(maps, per_image);
    result.detections[i] =
        to_input_coordinates(scenes[i].image_id, dets, render.stride);
  });
  result.eval = evaluate(scenes, result.detections, num_classes, eval, threads);
  return result;
}

namespace {

struct BenchObject {
  std::array<Point, 4> extremes;  // t, l, b, r grid cells
  Point center;
  std::array<double, 5> amplitude;
};

bool far_enough(const std::vector<BenchObject>& placed, const BenchObject& o) {
  for (const auto& p : placed) {
    for (int k = 0; k < 4; ++k) {
      if (std::abs(p.extremes[k].x - o.extremes[k].x) < 3 &&
          std::abs(p.extremes[k].y - o.extremes[k].y) < 3) {
        return false;
      }
    }
  }
  return true;
}

void splat(Heatmap& h, const Point& cell, double amplitude) {
  constexpr int kRadius = 4;
  const int cx = static_cast<int>(cell.x);
  const int cy = static_cast<int>(cell.y);
  for (int y = std::max(0, cy - kRadius); y <= std::min(h.height() - 1, cy + kRadius); ++y) {
    for (int x = std::max(0, cx - kRadius); x <= std::min(h.width() - 1, cx + kRadius); ++x) {
      const double d2 = (x - cx) * (x - cx) + (y - cy) * (y - cy);
      h(x, y) = std::max(h(x, y), amplitude * std::exp(-0.5 * d2));
    }
  }
}

// Adds `count` clutter responses to an extreme heatmap, each at least three
// cells from the others and away from existing responses.
void add_clutter(Heatmap& h, int count, const BenchMapConfig& config, Rng& rng) {
  std::vector<Point> placed;
  int attempts = 0;
  while (static_cast<int>(placed.size()) < count) {
    if (++attempts > 100000) throw ConfigError("cannot place bench clutter peaks");
    const Point p{double(rng.uniform_int(0, h.width() - 1)),
                  double(rng.uniform_int(0, h.height() - 1))};
    if (h(static_cast<int>(p.x), static_cast<int>(p.y)) >= 0.05) continue;
    const bool clear = std::none_of(placed.begin(), placed.end(), [&](const Point& q) {
      return std::abs(q.x - p.x) < 3 && std::abs(q.y - p.y) < 3;
    });
    if (!clear) continue;
    placed.push_back(p);
  }
  for (const auto& p : placed) {
    splat(h, p, rng.uniform(config.min_amplitude, config.max_amplitude));
  }
}

DetectionMaps dense_center_maps(Rng& rng, const BenchMapConfig& config) {
  DetectionMaps maps(config.num_classes, config.width, config.height);
  const int max_side = std::min(config.width, config.height) / 3;
  for (int c = 0; c < config.num_classes; ++c) {
    std::vector<BenchObject> placed;
    int attempts = 0;
    while (static_cast<int>(placed.size()) < config.peaks) {
      if (++attempts > 100000) throw ConfigError("cannot place bench peaks");
      const int w = static_cast<int>(rng.uniform_int(2, max_side));
      const int h = static_cast<int>(rng.uniform_int(2, max_side));
      const int l = static_cast<int>(rng.uniform_int(0, config.width - 1 - w));
      const int t = static_cast<int>(rng.uniform_int(0, config.height - 1 - h));
      const int r = l + w;
      const int b = t + h;
      BenchObject o;
      o.extremes = {Point{double(rng.uniform_int(l, r)), double(t)},
                    Point{double(l), double(rng.uniform_int(t, b))},
                    Point{double(rng.uniform_int(l, r)), double(b)},
                    Point{double(r), double(rng.uniform_int(t, b))}};
      o.center = {std::floor((l + r) / 2.0 + 0.5), std::floor((t + b) / 2.0 + 0.5)};
      for (double& a : o.amplitude) {
        a = rng.uniform(config.min_amplitude, config.max_amplitude);
      }
      if (!far_enough(placed, o)) continue;
      placed.push_back(o);
    }
    for (const auto& o : placed) {
      for (int k = 0; k < 4; ++k) {
        splat(maps.heatmap(static_cast<PointKind>(k), c), o.extremes[k], o.amplitude[k]);
      }
      splat(maps.heatmap(PointKind::kCenter, c), o.center, o.amplitude[4]);
    }
  }
  return maps;
}

}  // namespace

DetectionMaps make_bench_maps(std::uint64_t seed, int index,
                              const BenchMapConfig& config) {
  if (config.width < 16 || config.height < 16 || config.peaks < 1 ||
      config.num_classes < 1) {
    throw ConfigError("bench maps need at least 16x16 cells, one class and one peak");
  }
  DetectionMaps maps;
  if (config.mode == BenchMapConfig::Mode::kDenseCenters) {
    Rng rng(seed, static_cast<std::uint64_t>(index));
    maps = dense_center_maps(rng, config);
  } else {
    const RenderConfig render;
    SynthConfig sc;
    sc.num_images = 1;
    sc.num_classes = config.num_classes;
    sc.width = config.width * render.stride;
    sc.height = config.height * render.stride;
    const Scene scene = synth_scene(seed, index, sc);
    maps = render_scene(scene, config.num_classes, render);
    // Separate stream from the one the scene was drawn from.
    Rng rng(seed, (std::uint64_t{1} << 32) + static_cast<std::uint64_t>(index));
    for (int c = 0; c < config.num_classes; ++c) {
      for (PointKind kind : kExtremeKinds) {
        add_clutter(maps.heatmap(kind, c), config.peaks, config, rng);
      }
    }
  }
  maps = quantize_to_float(std::move(maps));
  const PeakParams forced{0.1, config.peaks};
  for (int c = 0; c < config.num_classes; ++c) {
    for (PointKind kind : kExtremeKinds) {
      if (static_cast<int>(extract_peaks(maps.heatmap(kind, c), forced).size()) !=
          config.peaks) {
        throw ConfigError("bench map does not carry the forced peak count");
      }
    }
  }
  return maps;
}

BenchReport run_bench(std::span<const DetectionMaps> images,
                      const DecodeParams& decode, int repetitions) {
  if (repetitions < 1) throw InputError("repetitions must be >= 1");
  BenchReport report;
  report.images = static_cast<int>(images.size());
  report.repetitions = repetitions;
  DecodeParams params = decode;
  params.threads = 1;
  for (int rep = 0; rep < repetitions; ++rep) {
    std::int64_t count = 0;
    for (const auto& maps : images) {
      StageTimings t;
      count += static_cast<std::int64_t>(decode_image(maps, params, &t).size());
      report.mean.peaks_ms += t.peaks_ms;
      report.mean.aggregation_ms += t.aggregation_ms;
      report.mean.grouping_ms += t.grouping_ms;
      report.mean.nms_ms += t.nms_ms;
      report.max_grouping_nms_ms =
          std::max(report.max_grouping_nms_ms, t.grouping_ms + t.nms_ms);
    }
    report.detections = count;
  }
  const double n = std::max<std::int64_t>(1, std::int64_t{report.images} * repetitions);
  report.mean.peaks_ms /= n;
  report.mean.aggregation_ms /= n;
  report.mean.grouping_ms /= n;
  report.mean.nms_ms /= n;
  report.grouping_nms_ms = report.mean.grouping_ms + report.mean.nms_ms;
  return report;
}

nlohmann::json bench_report_to_json(const BenchReport& r) {
  return {{"images", r.images},
          {"repetitions", r.repetitions},
          {"mean_ms_per_image",
           {{"peaks", r.mean.peaks_ms},
            {"aggregation", r.mean.aggregation_ms},
            {"grouping", r.mean.grouping_ms},
            {"nms", r.mean.nms_ms},
            {"grouping_plus_nms", r.grouping_nms_ms}}},
          {"max_grouping_plus_nms_ms", r.max_grouping_nms_ms},
          {"detections", r.detections},
          {"budget_ms", r.budget_ms},
          {"ceiling_ms", r.ceiling_ms},
          {"within_budget", r.within_budget()},
          {"within_ceiling", r.within_ceiling()}};
}

}  // namespace exdet
