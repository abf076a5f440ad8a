#include "exdet/heatmap_ops.h"

#include <algorithm>
#include <cmath>

#include "exdet/errors.h"

namespace exdet {

namespace {

Point kind_point(const ExtremePoints& e, PointKind kind) {
  switch (kind) {
    case PointKind::kTop:
      return e.top;
    case PointKind::kLeft:
      return e.left;
    case PointKind::kBottom:
      return e.bottom;
    case PointKind::kRight:
      return e.right;
    case PointKind::kCenter:
      return center_of(e);
  }
  return {};
}

// Non-strict 3x3 maximality.
bool is_local_max(const Heatmap& h, int x, int y) {
  const double v = h(x, y);
  const int x0 = std::max(x - 1, 0), x1 = std::min(x + 1, h.width() - 1);
  const int y0 = std::max(y - 1, 0), y1 = std::min(y + 1, h.height() - 1);
  for (int yy = y0; yy <= y1; ++yy) {
    for (int xx = x0; xx <= x1; ++xx) {
      if (h(xx, yy) > v) return false;
    }
  }
  return true;
}

void sort_and_truncate(std::vector<ScoredPoint>& peaks, int max_peaks) {
  std::sort(peaks.begin(), peaks.end(), peak_before);
  if (max_peaks >= 0 && peaks.size() > static_cast<std::size_t>(max_peaks)) {
    peaks.resize(max_peaks);
  }
}

double run_sum(const Heatmap& h, int x, int y, bool horizontal) {
  const int len = horizontal ? h.width() : h.height();
  const int m = horizontal ? x : y;
  auto at = [&](int i) { return horizontal ? h(i, y) : h(x, i); };

  int lo = m;
  while (lo - 1 >= 0 && at(lo - 1) <= at(lo)) --lo;
  int hi = m;
  while (hi + 1 < len && at(hi + 1) <= at(hi)) ++hi;

  double sum = 0.0;
  for (int i = lo; i <= hi; ++i) sum += at(i);
  return sum;
}

}  // namespace

double GaussianSpec::sigma_for(const Box& grid_box) const {
  if (mode == Mode::kFixed) return sigma;
  const double diag = std::hypot(grid_box.width(), grid_box.height());
  return std::max(ratio * diag, min_sigma);
}

Point grid_cell(const Point& p) { return {std::floor(p.x), std::floor(p.y)}; }

RenderedHeatmap render_keypoints(std::span<const GaussianKeypoint> keypoints,
                                 int width, int height) {
  RenderedHeatmap out{Heatmap(width, height), {}};
  Heatmap& h = out.heatmap;
  for (const auto& kp : keypoints) {
    if (!(kp.point.x >= 0.0 && kp.point.x < width && kp.point.y >= 0.0 &&
          kp.point.y < height)) {
      throw InputError("keypoint outside the heatmap grid");
    }
    if (!(kp.sigma > 0.0)) throw InputError("gaussian sigma must be positive");
    const Point mean = grid_cell(kp.point);
    const double inv = 1.0 / (2.0 * kp.sigma * kp.sigma);
    for (int y = 0; y < height; ++y) {
      const double dy = y - mean.y;
      for (int x = 0; x < width; ++x) {
        const double dx = x - mean.x;
        const double v = std::exp(-(dx * dx + dy * dy) * inv);
        double& cell = h(x, y);
        cell = std::max(cell, std::min(v, kMaxStoredScore));
      }
    }
    out.positives.push_back(static_cast<std::size_t>(mean.y) * width +
                            static_cast<std::size_t>(mean.x));
  }
  std::sort(out.positives.begin(), out.positives.end());
  out.positives.erase(std::unique(out.positives.begin(), out.positives.end()),
                      out.positives.end());
  return out;
}

RenderedHeatmap render_heatmap(const Scene& scene, int class_id, PointKind kind,
                               const GaussianSpec& spec, int stride, int width,
                               int height) {
  if (stride < 1) throw InputError("stride must be >= 1");
  std::vector<GaussianKeypoint> keypoints;
  const double s = stride;
  for (const auto& obj : scene.objects) {
    if (obj.class_id != class_id) continue;
    const Point p = kind_point(obj.extremes, kind);
    const Box grid_box{obj.box.left / s, obj.box.top / s, obj.box.right / s,
                       obj.box.bottom / s};
    keypoints.push_back({{p.x / s, p.y / s}, spec.sigma_for(grid_box)});
  }
  return render_keypoints(keypoints, width, height);
}

OffsetMaps render_offset_targets(const Scene& scene, int stride, int width,
                                 int height) {
  if (stride < 1) throw InputError("stride must be >= 1");
  OffsetMaps maps = OffsetMaps::zeros(width, height);
  const double s = stride;
  for (const auto& obj : scene.objects) {
    for (PointKind kind : kExtremeKinds) {
      const Point p = kind_point(obj.extremes, kind);
      const double gx = p.x / s;
      const double gy = p.y / s;
      const double cx = std::floor(gx);
      const double cy = std::floor(gy);
      if (!(cx >= 0 && cy >= 0 && cx < width && cy < height)) {
        throw InputError("keypoint outside the heatmap grid");
      }
      const int k = static_cast<int>(kind);
      maps.dx[k](static_cast<int>(cx), static_cast<int>(cy)) = gx - cx;
      maps.dy[k](static_cast<int>(cx), static_cast<int>(cy)) = gy - cy;
    }
  }
  return maps;
}

std::vector<ScoredPoint> extract_peaks(const Heatmap& heatmap,
                                       const PeakParams& params) {
  std::vector<ScoredPoint> peaks;
  for (int y = 0; y < heatmap.height(); ++y) {
    for (int x = 0; x < heatmap.width(); ++x) {
      const double v = heatmap(x, y);
      if (v > params.tau_p && is_local_max(heatmap, x, y)) {
        peaks.push_back({{static_cast<double>(x), static_cast<double>(y)}, v});
      }
    }
  }
  sort_and_truncate(peaks, params.max_peaks);
  return peaks;
}

std::vector<ScoredPoint> edge_aggregate(const Heatmap& heatmap,
                                        std::span<const ScoredPoint> peaks,
                                        PointKind kind, double lambda_aggr) {
  if (kind == PointKind::kCenter) {
    throw InputError("edge aggregation applies to extreme points only");
  }
  const bool horizontal = kind == PointKind::kTop || kind == PointKind::kBottom;
  std::vector<ScoredPoint> out(peaks.begin(), peaks.end());
  for (auto& p : out) {
    const int x = static_cast<int>(p.point.x);
    const int y = static_cast<int>(p.point.y);
    const double aggregated =
        p.score + lambda_aggr * run_sum(heatmap, x, y, horizontal);
    p.score = std::min(aggregated, 1.0);
  }
  std::sort(out.begin(), out.end(), peak_before);
  return out;
}

std::vector<ScoredPoint> find_peak_candidates(const Heatmap& heatmap,
                                              PointKind kind,
                                              const PeakParams& params,
                                              double lambda_aggr) {
  const bool horizontal = kind == PointKind::kTop || kind == PointKind::kBottom;
  const double run_cap = horizontal ? heatmap.width() : heatmap.height();
  // Every value in a monotone run is <= the peak, so v * (1 + lambda * len)
  // bounds the aggregated score; the margin absorbs summation rounding.
  const double bound_factor = 1.0 + std::max(lambda_aggr, 0.0) * run_cap;
  const double cutoff = params.tau_p * (1.0 - 1e-9);

  std::vector<ScoredPoint> candidates;
  for (int y = 0; y < heatmap.height(); ++y) {
    for (int x = 0; x < heatmap.width(); ++x) {
      const double v = heatmap(x, y);
      if (v <= 0.0 || v * bound_factor < cutoff) continue;
      if (is_local_max(heatmap, x, y)) {
        candidates.push_back(
            {{static_cast<double>(x), static_cast<double>(y)}, v});
      }
    }
  }
  return candidates;
}

std::vector<ScoredPoint> select_aggregated_peaks(
    const Heatmap& heatmap, std::span<const ScoredPoint> candidates,
    PointKind kind, const PeakParams& params, double lambda_aggr) {
  auto aggregated = edge_aggregate(heatmap, candidates, kind, lambda_aggr);
  std::erase_if(aggregated,
                [&](const ScoredPoint& p) { return !(p.score > params.tau_p); });
  sort_and_truncate(aggregated, params.max_peaks);
  return aggregated;
}

std::vector<ScoredPoint> extract_aggregated_peaks(const Heatmap& heatmap,
                                                  PointKind kind,
                                                  const PeakParams& params,
                                                  double lambda_aggr) {
  const auto candidates =
      find_peak_candidates(heatmap, kind, params, lambda_aggr);
  return select_aggregated_peaks(heatmap, candidates, kind, params,
                                 lambda_aggr);
}

Heatmap scale_center(const Heatmap& heatmap, double factor) {
  if (!(factor > 0.0)) throw InputError("center scale factor must be positive");
  Heatmap out = heatmap;
  for (double& v : out.values()) {
    v = std::clamp(v * factor, 0.0, kMaxStoredScore);
  }
  return out;
}

}  // namespace exdet
