#ifndef EXDET_TYPES_H_
#define EXDET_TYPES_H_

#include <array>
#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

namespace exdet {

// Heatmap storage is kept inside [0, 1 - kScoreEpsilon] so that log(1 - y)
// stays finite.
inline constexpr double kScoreEpsilon = 1e-6;
inline constexpr double kMaxStoredScore = 1.0 - kScoreEpsilon;

// Image coordinates: x to the right, y downward. "Top" is minimum y.
struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

struct ScoredPoint {
  Point point;
  double score = 0.0;

  friend bool operator==(const ScoredPoint&, const ScoredPoint&) = default;
};

struct Box {
  double left = 0.0;
  double top = 0.0;
  double right = 0.0;
  double bottom = 0.0;

  double width() const { return right - left; }
  double height() const { return bottom - top; }
  double area() const { return width() * height(); }

  friend bool operator==(const Box&, const Box&) = default;
};

enum class PointKind { kTop = 0, kLeft = 1, kBottom = 2, kRight = 3, kCenter = 4 };

inline constexpr std::array<PointKind, 4> kExtremeKinds = {
    PointKind::kTop, PointKind::kLeft, PointKind::kBottom, PointKind::kRight};
inline constexpr std::array<PointKind, 5> kAllKinds = {
    PointKind::kTop, PointKind::kLeft, PointKind::kBottom, PointKind::kRight,
    PointKind::kCenter};

std::string_view kind_name(PointKind kind);

struct ExtremeSet {
  ScoredPoint top;
  ScoredPoint left;
  ScoredPoint bottom;
  ScoredPoint right;
  ScoredPoint center;

  friend bool operator==(const ExtremeSet&, const ExtremeSet&) = default;
};

struct Polygon {
  std::vector<Point> vertices;

  friend bool operator==(const Polygon&, const Polygon&) = default;
};

struct Detection {
  int class_id = 0;
  Box box;
  double score = 0.0;
  std::optional<ExtremeSet> extremes;
  std::optional<Polygon> octagon;

  friend bool operator==(const Detection&, const Detection&) = default;
};

// Dense H x W grid of scores, row-major.
class Heatmap {
 public:
  Heatmap() = default;
  Heatmap(int width, int height);
  Heatmap(int width, int height, std::vector<double> values);

  int width() const { return width_; }
  int height() const { return height_; }
  bool empty() const { return values_.empty(); }

  double operator()(int x, int y) const {
    return values_[static_cast<std::size_t>(y) * width_ + x];
  }
  double& operator()(int x, int y) {
    return values_[static_cast<std::size_t>(y) * width_ + x];
  }
  bool contains(int x, int y) const {
    return x >= 0 && y >= 0 && x < width_ && y < height_;
  }

  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }

  friend bool operator==(const Heatmap&, const Heatmap&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<double> values_;
};

// Category-agnostic sub-pixel offsets for the four extreme kinds.
struct OffsetMaps {
  // Indexed by static_cast<int>(PointKind) for the four extreme kinds.
  std::array<Heatmap, 4> dx;
  std::array<Heatmap, 4> dy;

  static OffsetMaps zeros(int width, int height);
  int width() const { return dx[0].width(); }
  int height() const { return dx[0].height(); }

  friend bool operator==(const OffsetMaps&, const OffsetMaps&) = default;
};

double box_iou(const Box& a, const Box& b);

// Non-strict containment on all four sides.
bool box_contains(const Box& outer, const Box& inner);

// The eight-inequality ordering chain of a top/left/bottom/right quadruple.
bool is_valid_extreme_chain(const Point& top, const Point& left,
                            const Point& bottom, const Point& right);

// Deterministic total order: score descending, then y, x ascending.
bool peak_before(const ScoredPoint& a, const ScoredPoint& b);

// Deterministic total order used for every detection list: score descending,
// then box top, box left, class, and the remaining geometry ascending.
bool detection_before(const Detection& a, const Detection& b);

void sort_detections(std::vector<Detection>& dets);

double polygon_area(const Polygon& polygon);

}  // namespace exdet

#endif  // EXDET_TYPES_H_
