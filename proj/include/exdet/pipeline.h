#ifndef EXDET_PIPELINE_H_
#define EXDET_PIPELINE_H_

#include <cstdint>
#include <span>
#include <vector>

#include "exdet/annotation.h"
#include "exdet/evaluator.h"
#include "exdet/grouping.h"
#include "exdet/heatmap_ops.h"
#include "json.hpp"

namespace exdet {

struct RenderConfig {
  int stride = 4;
  GaussianSpec gaussian;
};

// Heatmap grid size for an image: ceil(size / stride).
int grid_size(int pixels, int stride);

// Oracle network outputs for a scene: target heatmaps for every class and
// kind plus the sub-pixel offset targets.
DetectionMaps render_scene(const Scene& scene, int num_classes,
                           const RenderConfig& config);

// Scales heatmap-grid detections to input pixels and attaches octagons.
// The octagon is built on the detection box with each extreme point clamped
// onto its box edge; degenerate boxes get none.
ImageDetections to_input_coordinates(std::int64_t image_id,
                                     std::span<const Detection> dets,
                                     int stride);

struct RoundtripResult {
  std::vector<ImageDetections> detections;
  EvalResult eval;
};

// render -> float32 narrowing -> decode -> evaluate, images in parallel.
RoundtripResult run_roundtrip(std::span<const Scene> scenes, int num_classes,
                              const RenderConfig& render,
                              const DecodeParams& decode,
                              const EvalConfig& eval, int threads = 1);

// Synthetic maps for timing. Every extreme heatmap of every class is forced
// to carry at least `peaks` separated sigma-1 responses above tau_p.
// kScene: an oracle-rendered synthetic scene with C classes plus clutter
// peaks on the extreme maps; centers exist only for real objects.
// kDenseCenters: stress case; every class holds `peaks` random objects with
// matching center responses, so random quadruples often find a center.
struct BenchMapConfig {
  enum class Mode { kScene, kDenseCenters };
  Mode mode = Mode::kScene;
  int num_classes = 80;
  int width = 128;
  int height = 128;
  int peaks = 40;
  double min_amplitude = 0.3;
  double max_amplitude = 0.95;
};

DetectionMaps make_bench_maps(std::uint64_t seed, int index,
                              const BenchMapConfig& config);

struct BenchReport {
  int images = 0;
  int repetitions = 0;
  // Mean per image over all images and repetitions.
  StageTimings mean;
  double grouping_nms_ms = 0.0;
  double max_grouping_nms_ms = 0.0;
  std::int64_t detections = 0;  // per repetition, summed over images
  double budget_ms = 130.0;
  double ceiling_ms = 520.0;

  bool within_budget() const { return grouping_nms_ms <= budget_ms; }
  bool within_ceiling() const { return grouping_nms_ms <= ceiling_ms; }
};

// Single-threaded decode of each image, `repetitions` times.
BenchReport run_bench(std::span<const DetectionMaps> images,
                      const DecodeParams& decode, int repetitions);
nlohmann::json bench_report_to_json(const BenchReport& report);

}  // namespace exdet

#endif  // EXDET_PIPELINE_H_
