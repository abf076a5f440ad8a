#ifndef EXDET_LOSSES_H_
#define EXDET_LOSSES_H_

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "exdet/types.h"

namespace exdet {

struct FocalParams {
  double alpha = 2.0;
  double beta = 4.0;
};

struct LossResult {
  double value = 0.0;
  // dL/dprediction, same layout as the prediction grid(s).
  std::optional<std::vector<double>> gradient;
};

// Penalty-reduced pixel-wise focal loss, normalized by the object count.
// `positives` lists the row-major indices where the target is exactly 1
// (RenderedHeatmap::positives); every other pixel takes the negative branch
// weighted by (1 - target)^beta. Predictions are clamped into
// [eps, 1 - eps]. Throws InputError for n_objects < 1 or shape mismatch.
LossResult focal_loss(const Heatmap& pred, const Heatmap& target,
                      std::span<const std::size_t> positives, int n_objects,
                      const FocalParams& params = {},
                      bool with_gradient = false);

// Same, with positives taken as the pixels whose target equals 1 exactly.
LossResult focal_loss(const Heatmap& pred, const Heatmap& target,
                      int n_objects, const FocalParams& params = {},
                      bool with_gradient = false);

struct OffsetKeypoint {
  PointKind kind = PointKind::kTop;
  Point point;  // input-image coordinates
};

// Smooth L1: 0.5 d^2 for |d| < 1, |d| - 0.5 otherwise.
double smooth_l1(double d);
double smooth_l1_grad(double d);

// Mean over keypoints of SL1(dx - target_x) + SL1(dy - target_y), read at
// each keypoint's grid cell floor(p / s). The gradient is laid out as
// [kind 0..3][dx, dy][H * W]. Throws InputError for s < 1, no keypoints,
// center kinds, or a cell outside the grid.
LossResult offset_loss(const OffsetMaps& pred,
                       std::span<const OffsetKeypoint> keypoints, int stride,
                       bool with_gradient = false);

}  // namespace exdet

#endif  // EXDET_LOSSES_H_
