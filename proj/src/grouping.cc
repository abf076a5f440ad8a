#include "exdet/grouping.h"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cassert>
#include <chrono>
#include <cmath>
#include <numeric>

#include "exdet/errors.h"
#include "exdet/parallel.h"

namespace exdet {

namespace {

int round_half_up(double v) { return static_cast<int>(std::floor(v + 0.5)); }

// Shared by both grouping paths so scores agree bit for bit.
Detection make_detection(const ScoredPoint& t, const ScoredPoint& l,
                         const ScoredPoint& b, const ScoredPoint& r,
                         double center_value, int class_id) {
  Detection d;
  d.class_id = class_id;
  d.box = {l.point.x, t.point.y, r.point.x, b.point.y};
  d.score = (t.score + l.score + b.score + r.score + center_value) / 5.0;
  ExtremeSet e;
  e.top = t;
  e.left = l;
  e.bottom = b;
  e.right = r;
  e.center = {{(l.point.x + r.point.x) / 2.0, (t.point.y + b.point.y) / 2.0},
              center_value};
  d.extremes = e;
  return d;
}

bool center_passes(const Heatmap& center, double cx, double cy, double tau_c,
                   double* value) {
  const int ix = round_half_up(cx);
  const int iy = round_half_up(cy);
  if (!center.contains(ix, iy)) return false;
  *value = center(ix, iy);
  return *value >= tau_c;
}

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since) {
  return std::chrono::duration<double, std::milli>(Clock::now() - since)
      .count();
}

}  // namespace

std::vector<Detection> group_centers_reference(
    std::span<const ScoredPoint> tops, std::span<const ScoredPoint> lefts,
    std::span<const ScoredPoint> bottoms, std::span<const ScoredPoint> rights,
    const Heatmap& center, const GroupingParams& params, int class_id) {
  std::vector<Detection> dets;
  for (const auto& t : tops) {
    for (const auto& l : lefts) {
      for (const auto& b : bottoms) {
        for (const auto& r : rights) {
          if (!is_valid_extreme_chain(t.point, l.point, b.point, r.point)) {
            continue;
          }
          const double cx = (l.point.x + r.point.x) / 2.0;
          const double cy = (t.point.y + b.point.y) / 2.0;
          double value = 0.0;
          if (center_passes(center, cx, cy, params.tau_c, &value)) {
            dets.push_back(make_detection(t, l, b, r, value, class_id));
          }
        }
      }
    }
  }
  sort_detections(dets);
  return dets;
}

std::vector<Detection> group_centers(std::span<const ScoredPoint> tops,
                                     std::span<const ScoredPoint> lefts,
                                     std::span<const ScoredPoint> bottoms,
                                     std::span<const ScoredPoint> rights,
                                     const Heatmap& center,
                                     const GroupingParams& params,
                                     int class_id) {
  std::vector<Detection> dets;
  if (tops.empty() || lefts.empty() || bottoms.empty() || rights.empty()) {
    return dets;
  }

  // Columns that hold at least one passing center cell.
  std::vector<char> column_live(center.width(), 0);
  for (int y = 0; y < center.height(); ++y) {
    for (int x = 0; x < center.width(); ++x) {
      if (center(x, y) >= params.tau_c) column_live[x] = 1;
    }
  }

  auto by_x = [](std::span<const ScoredPoint> pts) {
    std::vector<ScoredPoint> sorted(pts.begin(), pts.end());
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const ScoredPoint& a, const ScoredPoint& b) {
                       return a.point.x < b.point.x;
                     });
    return sorted;
  };
  const std::vector<ScoredPoint> tops_x = by_x(tops);
  const std::vector<ScoredPoint> bottoms_x = by_x(bottoms);
  auto x_less = [](const ScoredPoint& p, double x) { return p.point.x < x; };
  auto x_greater = [](double x, const ScoredPoint& p) { return x < p.point.x; };

  std::vector<const ScoredPoint*> t_cand;
  std::vector<const ScoredPoint*> b_cand;
  for (const auto& l : lefts) {
    for (const auto& r : rights) {
      if (l.point.x > r.point.x) continue;
      const double cx = (l.point.x + r.point.x) / 2.0;
      const int ix = round_half_up(cx);
      if (ix < 0 || ix >= center.width() || !column_live[ix]) continue;

      const double y_hi = std::min(l.point.y, r.point.y);
      const double y_lo = std::max(l.point.y, r.point.y);
      t_cand.clear();
      for (auto it = std::lower_bound(tops_x.begin(), tops_x.end(), l.point.x,
                                      x_less),
                end = std::upper_bound(tops_x.begin(), tops_x.end(),
                                       r.point.x, x_greater);
           it < end; ++it) {
        if (it->point.y <= y_hi) t_cand.push_back(&*it);
      }
      if (t_cand.empty()) continue;
      b_cand.clear();
      for (auto it = std::lower_bound(bottoms_x.begin(), bottoms_x.end(),
                                      l.point.x, x_less),
                end = std::upper_bound(bottoms_x.begin(), bottoms_x.end(),
                                       r.point.x, x_greater);
           it < end; ++it) {
        if (it->point.y >= y_lo) b_cand.push_back(&*it);
      }

      for (const ScoredPoint* t : t_cand) {
        for (const ScoredPoint* b : b_cand) {
          const double cy = (t->point.y + b->point.y) / 2.0;
          double value = 0.0;
          if (center_passes(center, cx, cy, params.tau_c, &value)) {
            dets.push_back(make_detection(*t, l, *b, r, value, class_id));
            assert(is_valid_extreme_chain(t->point, l.point, b->point,
                                          r.point));
          }
        }
      }
    }
  }
  sort_detections(dets);
  return dets;
}

namespace {

// Detection indices grouped by class, each group ascending.
std::vector<std::vector<std::size_t>> split_by_class(
    std::span<const Detection> dets) {
  std::vector<std::vector<std::size_t>> groups;
  std::vector<int> classes;
  for (std::size_t i = 0; i < dets.size(); ++i) {
    const int c = dets[i].class_id;
    auto it = std::find(classes.begin(), classes.end(), c);
    if (it == classes.end()) {
      classes.push_back(c);
      groups.emplace_back();
      it = classes.end() - 1;
    }
    groups[it - classes.begin()].push_back(i);
  }
  return groups;
}

// Bitsets over n items: row k holds the items whose value ranks >= k
// (ascending = false) or <= k (ascending = true). `rank` receives each
// item's rank among the distinct values.
std::vector<std::uint64_t> rank_masks(const std::vector<double>& values,
                                      bool ascending, std::size_t words,
                                      std::vector<int>& rank) {
  std::vector<double> distinct = values;
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  const std::size_t k = distinct.size();
  rank.resize(values.size());
  std::vector<std::uint64_t> masks(k * words, 0);
  for (std::size_t i = 0; i < values.size(); ++i) {
    rank[i] = static_cast<int>(
        std::lower_bound(distinct.begin(), distinct.end(), values[i]) -
        distinct.begin());
    masks[rank[i] * words + (i >> 6)] |= std::uint64_t{1} << (i & 63);
  }
  if (ascending) {
    for (std::size_t r = 1; r < k; ++r) {
      for (std::size_t w = 0; w < words; ++w) {
        masks[r * words + w] |= masks[(r - 1) * words + w];
      }
    }
  } else {
    for (std::size_t r = k - 1; r-- > 0;) {
      for (std::size_t w = 0; w < words; ++w) {
        masks[r * words + w] |= masks[(r + 1) * words + w];
      }
    }
  }
  return masks;
}

// Same-class rule on one class group. Contained boxes are found by ANDing
// per-side rank masks and summed in index order; partial sums of positive
// scores only grow, so stopping once the bound is exceeded is exact.
void suppress_group(std::span<const Detection> dets,
                    const std::vector<std::size_t>& group,
                    const GroupingParams& params, std::vector<Detection>& out) {
  const std::size_t n = group.size();
  const std::size_t words = (n + 63) / 64;
  std::vector<double> left(n), top(n), right(n), bottom(n), score(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Detection& d = dets[group[i]];
    left[i] = d.box.left;
    top[i] = d.box.top;
    right[i] = d.box.right;
    bottom[i] = d.box.bottom;
    score[i] = d.score;
  }
  std::vector<int> rl, rt, rr, rb;
  const auto ml = rank_masks(left, false, words, rl);
  const auto mt = rank_masks(top, false, words, rt);
  const auto mr = rank_masks(right, true, words, rr);
  const auto mb = rank_masks(bottom, true, words, rb);

  for (std::size_t i = 0; i < n; ++i) {
    const std::uint64_t* a = &ml[rl[i] * words];
    const std::uint64_t* b = &mt[rt[i] * words];
    const std::uint64_t* c = &mr[rr[i] * words];
    const std::uint64_t* d = &mb[rb[i] * words];
    const double bound = params.ghost_sum_factor * score[i];
    double contained = 0.0;
    bool exceeded = false;
    for (std::size_t w = 0; w < words && !exceeded; ++w) {
      std::uint64_t bits = a[w] & b[w] & c[w] & d[w];
      if (w == (i >> 6)) bits &= ~(std::uint64_t{1} << (i & 63));
      while (bits) {
        const std::size_t j = w * 64 + std::countr_zero(bits);
        bits &= bits - 1;
        contained += score[j];
        if (contained > bound) {
          exceeded = true;
          break;
        }
      }
    }
    if (exceeded) out[group[i]].score = score[i] / params.ghost_divisor;
  }
}

}  // namespace

std::vector<Detection> suppress_ghosts(std::span<const Detection> dets,
                                       const GroupingParams& params) {
  std::vector<Detection> out(dets.begin(), dets.end());
  for (const auto& group : split_by_class(dets)) {
    suppress_group(dets, group, params, out);
  }
  return out;
}

std::vector<Detection> soft_nms(std::span<const Detection> dets,
                                const SoftNmsParams& params) {
  std::vector<Detection> work(dets.begin(), dets.end());
  if (!params.enabled) return work;

  std::vector<Detection> kept;
  for (const auto& group : split_by_class(dets)) {
    // Compact working set: positions into `group`, with live scores.
    std::vector<std::size_t> pending;
    std::vector<double> score(group.size());
    std::vector<Box> box(group.size());
    std::vector<double> area(group.size());
    for (std::size_t k = 0; k < group.size(); ++k) {
      score[k] = work[group[k]].score;
      box[k] = work[group[k]].box;
      area[k] = box[k].area();
      if (score[k] >= params.score_floor) pending.push_back(k);
    }
    auto before = [&](std::size_t a, std::size_t b) {
      if (score[a] != score[b]) return score[a] > score[b];
      Detection& da = work[group[a]];
      Detection& db = work[group[b]];
      da.score = score[a];
      db.score = score[b];
      if (detection_before(da, db)) return true;
      if (detection_before(db, da)) return false;
      return a < b;
    };
    while (!pending.empty()) {
      std::size_t best = 0;
      for (std::size_t p = 1; p < pending.size(); ++p) {
        if (before(pending[p], pending[best])) best = p;
      }
      const std::size_t chosen = pending[best];
      pending[best] = pending.back();
      pending.pop_back();

      const Box& cb = box[chosen];
      std::size_t live = 0;
      for (std::size_t p = 0; p < pending.size(); ++p) {
        const std::size_t k = pending[p];
        // box_iou, with the areas hoisted.
        const double iw = std::min(cb.right, box[k].right) - std::max(cb.left, box[k].left);
        const double ih = std::min(cb.bottom, box[k].bottom) - std::max(cb.top, box[k].top);
        double iou = 0.0;
        if (iw > 0.0 && ih > 0.0) {
          const double inter = iw * ih;
          const double uni = area[chosen] + area[k] - inter;
          if (uni > 0.0) iou = std::clamp(inter / uni, 0.0, 1.0);
        }
        if (iou > 0.0) {
          if (params.method == SoftNmsParams::Method::kGaussian) {
            score[k] *= std::exp(-(iou * iou) / params.sigma);
          } else if (iou > params.linear_threshold) {
            score[k] *= 1.0 - iou;
          }
        }
        if (score[k] >= params.score_floor) pending[live++] = k;
      }
      pending.resize(live);

      Detection d = std::move(work[group[chosen]]);
      d.score = score[chosen];
      kept.push_back(std::move(d));
    }
  }
  // Each pick scores no higher than the previous one of its class, so the
  // selection order is the detection order of the survivors.
  sort_detections(kept);
  return kept;
}

std::vector<Detection> refine_with_offsets(std::span<const Detection> dets,
                                           const OffsetMaps& offsets) {
  std::vector<Detection> out(dets.begin(), dets.end());
  for (auto& d : out) {
    if (!d.extremes) continue;
    ExtremeSet& e = *d.extremes;
    auto shift = [&](ScoredPoint& p, PointKind kind) {
      const int x = static_cast<int>(std::floor(p.point.x));
      const int y = static_cast<int>(std::floor(p.point.y));
      const int k = static_cast<int>(kind);
      if (!offsets.dx[k].contains(x, y)) {
        throw InputError("extreme point outside the offset grid");
      }
      p.point.x += offsets.dx[k](x, y);
      p.point.y += offsets.dy[k](x, y);
    };
    shift(e.top, PointKind::kTop);
    shift(e.left, PointKind::kLeft);
    shift(e.bottom, PointKind::kBottom);
    shift(e.right, PointKind::kRight);
    e.center.point = {(e.left.point.x + e.right.point.x) / 2.0,
                      (e.top.point.y + e.bottom.point.y) / 2.0};
    d.box = {std::min(e.left.point.x, e.right.point.x),
             std::min(e.top.point.y, e.bottom.point.y),
             std::max(e.left.point.x, e.right.point.x),
             std::max(e.top.point.y, e.bottom.point.y)};
  }
  return out;
}

DetectionMaps::DetectionMaps(int num_classes, int width, int height)
    : num_classes_(num_classes), width_(width), height_(height) {
  if (num_classes < 1) throw InputError("need at least one class");
  heatmaps_.assign(static_cast<std::size_t>(5) * num_classes,
                   Heatmap(width, height));
  offsets_ = OffsetMaps::zeros(width, height);
}

void DetectionMaps::validate() const {
  if (num_classes_ < 1 ||
      heatmaps_.size() != static_cast<std::size_t>(5) * num_classes_) {
    throw InputError("detection maps hold the wrong number of heatmaps");
  }
  auto check = [&](const Heatmap& h) {
    if (h.width() != width_ || h.height() != height_) {
      throw InputError("heatmap dimensions differ within one image");
    }
  };
  for (const auto& h : heatmaps_) check(h);
  for (int k = 0; k < 4; ++k) {
    check(offsets_.dx[k]);
    check(offsets_.dy[k]);
  }
}

std::vector<Detection> decode_image(const DetectionMaps& maps,
                                    const DecodeParams& params,
                                    StageTimings* timings) {
  maps.validate();
  const int num_classes = maps.num_classes();
  std::vector<std::vector<Detection>> per_class(num_classes);
  std::vector<StageTimings> per_class_time(num_classes);

  parallel_for(num_classes, params.threads, [&](std::size_t c) {
    const int class_id = static_cast<int>(c);
    StageTimings& time = per_class_time[c];

    std::array<std::vector<ScoredPoint>, 4> candidates;
    auto start = Clock::now();
    for (PointKind kind : kExtremeKinds) {
      candidates[static_cast<int>(kind)] = find_peak_candidates(
          maps.heatmap(kind, class_id), kind, params.peaks, params.lambda_aggr);
    }
    time.peaks_ms = elapsed_ms(start);

    start = Clock::now();
    std::array<std::vector<ScoredPoint>, 4> peaks;
    for (PointKind kind : kExtremeKinds) {
      const int k = static_cast<int>(kind);
      peaks[k] = select_aggregated_peaks(maps.heatmap(kind, class_id),
                                         candidates[k], kind, params.peaks,
                                         params.lambda_aggr);
    }
    time.aggregation_ms = elapsed_ms(start);

    start = Clock::now();
    std::vector<Detection> dets;
    if (!peaks[0].empty() && !peaks[1].empty() && !peaks[2].empty() &&
        !peaks[3].empty()) {
      const Heatmap center = scale_center(
          maps.heatmap(PointKind::kCenter, class_id), params.center_scale);
      dets = group_centers(peaks[0], peaks[1], peaks[2], peaks[3], center,
                           params.grouping, class_id);
      if (params.refine) dets = refine_with_offsets(dets, maps.offsets());
    }
    time.grouping_ms = elapsed_ms(start);

    start = Clock::now();
    if (params.grouping.ghost_suppression) {
      dets = suppress_ghosts(dets, params.grouping);
    }
    dets = soft_nms(dets, params.grouping.soft_nms);
    time.nms_ms = elapsed_ms(start);

    per_class[c] = std::move(dets);
  });

  std::vector<Detection> merged;
  for (auto& dets : per_class) {
    merged.insert(merged.end(), std::make_move_iterator(dets.begin()),
                  std::make_move_iterator(dets.end()));
  }
  sort_detections(merged);

  if (timings) {
    *timings = {};
    for (const auto& t : per_class_time) {
      timings->peaks_ms += t.peaks_ms;
      timings->aggregation_ms += t.aggregation_ms;
      timings->grouping_ms += t.grouping_ms;
      timings->nms_ms += t.nms_ms;
    }
  }
  return merged;
}

}  // namespace exdet
