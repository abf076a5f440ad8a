#ifndef EXDET_GROUPING_H_
#define EXDET_GROUPING_H_

#include <span>
#include <vector>

#include "exdet/heatmap_ops.h"
#include "exdet/types.h"

namespace exdet {

struct SoftNmsParams {
  enum class Method { kGaussian, kLinear };
  bool enabled = true;
  Method method = Method::kGaussian;
  double sigma = 0.5;             // gaussian: score *= exp(-iou^2 / sigma)
  double linear_threshold = 0.3;  // linear: score *= 1 - iou when iou > thr
  double score_floor = 0.001;
};

struct GroupingParams {
  double tau_c = 0.1;
  bool ghost_suppression = true;
  double ghost_sum_factor = 3.0;
  double ghost_divisor = 2.0;
  SoftNmsParams soft_nms;
};

// Commits every geometrically ordered (t, l, b, r) quadruple whose center
// cell, rounded half up, scores >= tau_c on `center`. Detections carry the
// quadruple as their ExtremeSet and the mean of the five responses as score.
// Output-sensitive: candidates for t and b are range-queried per (l, r) pair.
std::vector<Detection> group_centers(std::span<const ScoredPoint> tops,
                                     std::span<const ScoredPoint> lefts,
                                     std::span<const ScoredPoint> bottoms,
                                     std::span<const ScoredPoint> rights,
                                     const Heatmap& center,
                                     const GroupingParams& params,
                                     int class_id = 0);

// Plain four-level loop over all quadruples. Same output as group_centers.
std::vector<Detection> group_centers_reference(
    std::span<const ScoredPoint> tops, std::span<const ScoredPoint> lefts,
    std::span<const ScoredPoint> bottoms, std::span<const ScoredPoint> rights,
    const Heatmap& center, const GroupingParams& params, int class_id = 0);

// One simultaneous pass: a detection whose contained same-class detections
// (other than itself) sum to more than ghost_sum_factor times its own score
// has that score divided by ghost_divisor. Order and count are preserved.
std::vector<Detection> suppress_ghosts(std::span<const Detection> dets,
                                       const GroupingParams& params);

// Greedy score decay among same-class detections. Returns survivors in
// selection order.
std::vector<Detection> soft_nms(std::span<const Detection> dets,
                                const SoftNmsParams& params);

// Adds the offset read at each extreme point's grid cell and rebuilds the box
// and center from the refined points.
std::vector<Detection> refine_with_offsets(std::span<const Detection> dets,
                                           const OffsetMaps& offsets);

// All network outputs for one image: 5 x C heatmaps plus offsets.
class DetectionMaps {
 public:
  DetectionMaps() = default;
  DetectionMaps(int num_classes, int width, int height);

  int num_classes() const { return num_classes_; }
  int width() const { return width_; }
  int height() const { return height_; }

  Heatmap& heatmap(PointKind kind, int class_id) {
    return heatmaps_[index(kind, class_id)];
  }
  const Heatmap& heatmap(PointKind kind, int class_id) const {
    return heatmaps_[index(kind, class_id)];
  }
  OffsetMaps& offsets() { return offsets_; }
  const OffsetMaps& offsets() const { return offsets_; }

  // Throws InputError unless every map is width x height.
  void validate() const;

  friend bool operator==(const DetectionMaps&, const DetectionMaps&) = default;

 private:
  std::size_t index(PointKind kind, int class_id) const {
    return static_cast<std::size_t>(kind) * num_classes_ + class_id;
  }

  int num_classes_ = 0;
  int width_ = 0;
  int height_ = 0;
  std::vector<Heatmap> heatmaps_;  // kind-major, then class
  OffsetMaps offsets_;
};

struct DecodeParams {
  PeakParams peaks;
  double lambda_aggr = 0.1;
  double center_scale = 2.0;
  bool refine = true;
  GroupingParams grouping;
  int threads = 1;
};

// Wall-clock milliseconds spent per stage, summed over classes.
struct StageTimings {
  double peaks_ms = 0.0;
  double aggregation_ms = 0.0;
  double grouping_ms = 0.0;
  double nms_ms = 0.0;
};

// Per class: peaks -> edge aggregation -> center scaling -> grouping ->
// offset refinement -> ghost suppression -> soft-NMS. Classes are decoded
// independently; the merged list is sorted with detection_before. Output is
// in heatmap coordinates.
std::vector<Detection> decode_image(const DetectionMaps& maps,
                                    const DecodeParams& params,
                                    StageTimings* timings = nullptr);

}  // namespace exdet

#endif  // EXDET_GROUPING_H_
