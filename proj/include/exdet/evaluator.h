#ifndef EXDET_EVALUATOR_H_
#define EXDET_EVALUATOR_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "exdet/annotation.h"
#include "exdet/types.h"

namespace exdet {

struct AreaRange {
  std::string name;
  double lo = 0.0;  // inclusive
  double hi = 0.0;  // exclusive
};

struct EvalConfig {
  enum class Mode { kBox, kMask };

  std::vector<double> iou_thresholds = default_iou_thresholds();
  std::vector<AreaRange> area_ranges = default_area_ranges();
  int max_dets = 100;  // per image and class
  Mode mode = Mode::kBox;

  // 0.50, 0.55, ..., 0.95
  static std::vector<double> default_iou_thresholds();
  // all, small (< 32^2), medium (32^2 .. 96^2), large (>= 96^2)
  static std::vector<AreaRange> default_area_ranges();
  // Throws InputError for unsorted thresholds or an empty range list.
  void validate() const;
};

// Detections of one image, in input-image pixels.
struct ImageDetections {
  std::int64_t image_id = 0;
  std::vector<Detection> detections;
};

struct MatchOutcome {
  std::vector<int> det_to_gt;  // -1 when unmatched
  std::vector<int> gt_to_det;  // -1 when unmatched
  std::vector<char> det_ignored;
};

// Greedy one-to-one matching. Detections must already be in score order;
// `ious` is [det][gt]. Each detection takes the highest-IoU unmatched
// ground truth with IoU >= threshold, preferring non-ignored ground truths;
// a detection matched to an ignored ground truth is itself ignored.
MatchOutcome match_detections(const std::vector<std::vector<double>>& ious,
                              std::span<const char> gt_ignore,
                              double threshold);

// One detection's outcome at a fixed IoU threshold and area range.
struct ScoredMatch {
  double score = 0.0;
  bool true_positive = false;
  bool ignored = false;
};

// 101-point interpolated AP over recall {0, 0.01, ..., 1}. Records are ranked
// by score (stable, so equal scores keep their input order). Returns -1 when
// num_gt == 0.
double interpolated_ap(std::span<const ScoredMatch> records, int num_gt);

struct ClassResult {
  int class_id = 0;
  int num_gt = 0;
  double ap = -1.0;
  double ap50 = -1.0;
  double ap75 = -1.0;
};

// Audit trail for the "all" area range.
struct MatchRecord {
  std::int64_t image_id = 0;
  int class_id = 0;
  int threshold_index = 0;
  int det_index = 0;  // index into that image's detection list
  int gt_index = -1;  // index into the scene's objects, -1 for FP
  double score = 0.0;
  double iou = 0.0;
};

// Every AP is in [0, 1], or -1 when no ground truth exists for it.
struct EvalResult {
  double ap = -1.0;
  double ap50 = -1.0;
  double ap75 = -1.0;
  double ap_small = -1.0;
  double ap_medium = -1.0;
  double ap_large = -1.0;
  std::vector<double> iou_thresholds;
  std::vector<double> ap_per_threshold;
  std::vector<ClassResult> per_class;
  std::vector<MatchRecord> matches;
};

// Scenes and detections are paired by image id; detections for unknown
// images are rejected with InputError. Class ids are indices in
// [0, num_classes).
EvalResult evaluate(std::span<const Scene> scenes,
                    std::span<const ImageDetections> detections,
                    int num_classes, const EvalConfig& config = {},
                    int threads = 1);

}  // namespace exdet

#endif  // EXDET_EVALUATOR_H_
