#ifndef EXDET_HEATMAP_OPS_H_
#define EXDET_HEATMAP_OPS_H_

#include <cstddef>
#include <span>
#include <vector>

#include "exdet/annotation.h"
#include "exdet/types.h"

namespace exdet {

// Gaussian kernel width used when rendering target heatmaps. Sigma is in
// heatmap cells.
struct GaussianSpec {
  enum class Mode { kFixed, kProportional };
  Mode mode = Mode::kProportional;
  double sigma = 1.0;       // kFixed
  double ratio = 1.0 / 20;  // kProportional: sigma = ratio * box diagonal
  double min_sigma = 1.0;   // kProportional floor

  double sigma_for(const Box& grid_box) const;
};

struct PeakParams {
  double tau_p = 0.1;
  int max_peaks = 40;
};

struct GaussianKeypoint {
  Point point;  // heatmap coordinates; the kernel mean is its grid cell
  double sigma = 1.0;
};

struct RenderedHeatmap {
  Heatmap heatmap;
  // Row-major indices of kernel means (the Y == 1 pixels), sorted, unique.
  std::vector<std::size_t> positives;
};

// Grid cell of a heatmap-coordinate point: (floor(x), floor(y)).
Point grid_cell(const Point& p);

// Max-combination of unit-height Gaussians centered at each keypoint's grid
// cell, clamped to [0, 1 - eps]. Throws InputError for keypoints outside
// [0, W) x [0, H) or non-positive sigma.
RenderedHeatmap render_keypoints(std::span<const GaussianKeypoint> keypoints,
                                 int width, int height);

// Target heatmap for one class and point kind. Scene coordinates are divided
// by `stride` to reach the heatmap grid.
RenderedHeatmap render_heatmap(const Scene& scene, int class_id, PointKind kind,
                               const GaussianSpec& spec, int stride, int width,
                               int height);

// Sub-pixel remainders x/s - floor(x/s) at every extreme point's grid cell;
// zero elsewhere. Later objects overwrite earlier ones sharing a cell.
OffsetMaps render_offset_targets(const Scene& scene, int stride, int width,
                                 int height);

// 3x3 local maxima (ties kept) strictly above tau_p, best first, at most
// max_peaks of them.
std::vector<ScoredPoint> extract_peaks(const Heatmap& heatmap,
                                       const PeakParams& params);

// Adds lambda * (sum over the monotone run through each peak) to its score.
// Top/bottom peaks scan horizontally, left/right vertically. The run extends
// through equal values and stops before the first strict increase or at the
// border. Scores are capped at 1. Output is re-sorted best first.
std::vector<ScoredPoint> edge_aggregate(const Heatmap& heatmap,
                                        std::span<const ScoredPoint> peaks,
                                        PointKind kind, double lambda_aggr);

// Unthresholded 3x3 local maxima that could still exceed tau_p after
// aggregation with `lambda_aggr`; scores are the raw heatmap values.
std::vector<ScoredPoint> find_peak_candidates(const Heatmap& heatmap,
                                              PointKind kind,
                                              const PeakParams& params,
                                              double lambda_aggr);

// Aggregates candidates, keeps those strictly above tau_p, truncates.
std::vector<ScoredPoint> select_aggregated_peaks(
    const Heatmap& heatmap, std::span<const ScoredPoint> candidates,
    PointKind kind, const PeakParams& params, double lambda_aggr);

// Local maxima are found without a threshold, edge-aggregated, and only then
// compared against tau_p. With lambda_aggr == 0 this equals extract_peaks.
std::vector<ScoredPoint> extract_aggregated_peaks(const Heatmap& heatmap,
                                                  PointKind kind,
                                                  const PeakParams& params,
                                                  double lambda_aggr);

// Multiplies every value by `factor` and clamps into [0, 1 - eps].
Heatmap scale_center(const Heatmap& heatmap, double factor);

}  // namespace exdet

#endif  // EXDET_HEATMAP_OPS_H_
