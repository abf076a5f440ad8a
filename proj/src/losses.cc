#include "exdet/losses.h"

#include <algorithm>
#include <cmath>

#include "exdet/errors.h"

namespace exdet {

namespace {

// Fixed-shape pairwise reduction, so the sum does not depend on how callers
// chunk the work.
double pairwise_sum(std::span<const double> v) {
  if (v.size() <= 8) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  const std::size_t half = v.size() / 2;
  return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

}  // namespace

LossResult focal_loss(const Heatmap& pred, const Heatmap& target,
                      std::span<const std::size_t> positives, int n_objects,
                      const FocalParams& params, bool with_gradient) {
  if (n_objects < 1) throw InputError("focal loss needs n_objects >= 1");
  if (pred.width() != target.width() || pred.height() != target.height()) {
    throw InputError("prediction and target shapes differ");
  }
  const std::size_t n = pred.values().size();
  std::vector<char> is_pos(n, 0);
  for (std::size_t i : positives) {
    if (i >= n) throw InputError("positive index outside the heatmap");
    is_pos[i] = 1;
  }

  const double a = params.alpha;
  const double b = params.beta;
  const double inv_n = 1.0 / n_objects;
  std::vector<double> terms(n);
  std::vector<double> grad;
  if (with_gradient) grad.resize(n);

  for (std::size_t i = 0; i < n; ++i) {
    const double p =
        std::clamp(pred.values()[i], kScoreEpsilon, 1.0 - kScoreEpsilon);
    if (is_pos[i]) {
      const double q = 1.0 - p;
      terms[i] = std::pow(q, a) * std::log(p);
      if (with_gradient) {
        const double dterm =
            -a * std::pow(q, a - 1.0) * std::log(p) + std::pow(q, a) / p;
        grad[i] = -inv_n * dterm;
      }
    } else {
      const double w = std::pow(1.0 - target.values()[i], b);
      const double q = 1.0 - p;
      terms[i] = w * std::pow(p, a) * std::log(q);
      if (with_gradient) {
        const double dterm =
            w * (a * std::pow(p, a - 1.0) * std::log(q) - std::pow(p, a) / q);
        grad[i] = -inv_n * dterm;
      }
    }
  }
  LossResult result;
  result.value = -inv_n * pairwise_sum(terms);
  if (with_gradient) result.gradient = std::move(grad);
  return result;
}

LossResult focal_loss(const Heatmap& pred, const Heatmap& target,
                      int n_objects, const FocalParams& params,
                      bool with_gradient) {
  std::vector<std::size_t> positives;
  for (std::size_t i = 0; i < target.values().size(); ++i) {
    if (target.values()[i] == 1.0) positives.push_back(i);
  }
  return focal_loss(pred, target, positives, n_objects, params, with_gradient);
}

double smooth_l1(double d) {
  const double ad = std::abs(d);
  return ad < 1.0 ? 0.5 * d * d : ad - 0.5;
}

double smooth_l1_grad(double d) {
  if (std::abs(d) < 1.0) return d;
  return d > 0.0 ? 1.0 : -1.0;
}

LossResult offset_loss(const OffsetMaps& pred,
                       std::span<const OffsetKeypoint> keypoints, int stride,
                       bool with_gradient) {
  if (stride < 1) throw InputError("stride must be >= 1");
  if (keypoints.empty()) throw InputError("offset loss needs keypoints");
  const int width = pred.width();
  const int height = pred.height();
  const std::size_t plane = static_cast<std::size_t>(width) * height;
  const double s = stride;
  const double inv_n = 1.0 / static_cast<double>(keypoints.size());

  std::vector<double> terms;
  terms.reserve(keypoints.size());
  std::vector<double> grad;
  if (with_gradient) grad.assign(8 * plane, 0.0);

  for (const auto& kp : keypoints) {
    if (kp.kind == PointKind::kCenter) {
      throw InputError("the center has no offset map");
    }
    const double gx = kp.point.x / s;
    const double gy = kp.point.y / s;
    const double cx = std::floor(gx);
    const double cy = std::floor(gy);
    if (!(cx >= 0 && cy >= 0 && cx < width && cy < height)) {
      throw InputError("keypoint outside the offset grid");
    }
    const int x = static_cast<int>(cx);
    const int y = static_cast<int>(cy);
    const int k = static_cast<int>(kp.kind);
    const double ex = pred.dx[k](x, y) - (gx - cx);
    const double ey = pred.dy[k](x, y) - (gy - cy);
    terms.push_back(smooth_l1(ex) + smooth_l1(ey));
    if (with_gradient) {
      const std::size_t cell = static_cast<std::size_t>(y) * width + x;
      grad[(2 * k) * plane + cell] += inv_n * smooth_l1_grad(ex);
      grad[(2 * k + 1) * plane + cell] += inv_n * smooth_l1_grad(ey);
    }
  }
  LossResult result;
  result.value = inv_n * pairwise_sum(terms);
  if (with_gradient) result.gradient = std::move(grad);
  return result;
}

}  // namespace exdet
