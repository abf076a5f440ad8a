// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero if any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <thread>
#include <vector>

#include "exdet/annotation.h"
#include "exdet/evaluator.h"
#include "exdet/grouping.h"
#include "exdet/json_io.h"
#include "exdet/losses.h"
#include "exdet/octagon.h"
#include "exdet/pipeline.h"
#include "exdet/rng.h"
#include "exdet/synth.h"
#include "exdet/tensor_file.h"
#include "oracles.h"

namespace exdet {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) {
  return std::chrono::duration<double>(Clock::now() - t).count();
}

struct Verdict {
  bool pass = true;
  std::string detail;
};

int failures = 0;

void report(int id, const char* name, const Verdict& v) {
  std::printf("%s [%d] %s: %s\n", v.pass ? "PASS" : "FAIL", id, name, v.detail.c_str());
  std::fflush(stdout);
  if (!v.pass) ++failures;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// 1. Oracle round trip on 1000 separated scenes.
Verdict roundtrip() {
  SynthConfig c;
  c.num_images = 1000;
  const auto start = Clock::now();
  const auto scenes = synth_scenes(1, c, 1);
  const auto out = run_roundtrip(scenes, c.num_classes, {}, {}, {}, 1);
  const double secs = seconds_since(start);
  std::size_t objects = 0;
  for (const auto& s : scenes) objects += s.objects.size();
  Verdict v;
  v.pass = out.eval.ap >= 0.95 && out.eval.ap50 == 1.0 && secs <= 120.0;
  v.detail = fmt("%zu objects, AP=%.6f (>= 0.95), AP50=%.6f (== 1), %.1f s (<= 120 s)",
                 objects, out.eval.ap, out.eval.ap50, secs);
  return v;
}

// 2. Fast grouping equals the quadruple loop.
Verdict grouping_equivalence() {
  Rng rng(2);
  std::size_t total = 0, mismatched = 0;
  for (int iter = 0; iter < 500; ++iter) {
    const int w = static_cast<int>(rng.uniform_int(8, 128));
    const int h = static_cast<int>(rng.uniform_int(8, 128));
    const bool half = rng.bernoulli(0.25);
    auto coord = [&](int hi) {
      const double v = static_cast<double>(rng.uniform_int(0, hi - 1));
      return half && rng.bernoulli(0.5) ? std::min(v + 0.5, hi - 1.0) : v;
    };
    std::array<std::vector<ScoredPoint>, 4> peaks;
    // Half of the points come from random boxes so that valid quadruples and
    // center hits are common.
    for (auto& list : peaks) list.resize(rng.uniform_int(0, 40));
    for (std::size_t k = 0; k < 4; ++k) {
      for (auto& p : peaks[k]) {
        p.score = rng.uniform(0.1, 1.0);
        if (rng.bernoulli(0.5)) {
          p.point = {coord(w), coord(h)};
          continue;
        }
        const double l = coord(w), t = coord(h);
        const double r = std::min(l + rng.uniform_int(0, w / 2), w - 1.0);
        const double b = std::min(t + rng.uniform_int(0, h / 2), h - 1.0);
        switch (k) {
          case 0: p.point = {std::floor(rng.uniform(l, r)), t}; break;
          case 1: p.point = {l, std::floor(rng.uniform(t, b))}; break;
          case 2: p.point = {std::floor(rng.uniform(l, r)), b}; break;
          default: p.point = {r, std::floor(rng.uniform(t, b))}; break;
        }
      }
    }
    Heatmap center(w, h);
    const double density = rng.uniform(0.0, 1.0);
    for (double& v : center.values()) {
      if (rng.bernoulli(density)) v = rng.uniform(0.0, kMaxStoredScore);
    }
    GroupingParams params;
    params.tau_c = rng.uniform(0.05, 0.6);
    auto fast = group_centers(peaks[0], peaks[1], peaks[2], peaks[3], center, params, 3);
    auto slow = group_centers_reference(peaks[0], peaks[1], peaks[2], peaks[3], center, params, 3);
    sort_detections(fast);
    sort_detections(slow);
    total += slow.size();
    if (!(fast == slow)) ++mismatched;
  }
  Verdict v;
  v.pass = mismatched == 0 && total > 0;
  v.detail = fmt("500 configurations, %zu reference detections, %zu mismatched sets",
                 total, mismatched);
  return v;
}

bool same_except_score(const Detection& a, const Detection& b) {
  Detection x = a;
  x.score = b.score;
  return x == b;
}

// 3. Ghost box on three equal collinear objects.
Verdict ghost_trap() {
  SynthConfig c;
  c.ghost_trap = true;
  c.num_images = 50;
  const auto scenes = synth_scenes(3, c, 1);
  int ok = 0;
  std::string first_problem;
  for (const auto& s : scenes) {
    const DetectionMaps maps = quantize_to_float(render_scene(s, c.num_classes, {}));
    Box span{s.objects[0].box.left, s.objects[0].box.top, s.objects[2].box.right,
             s.objects[2].box.bottom};
    DecodeParams raw;
    raw.grouping.ghost_suppression = false;
    raw.grouping.soft_nms.enabled = false;
    DecodeParams ghost_only = raw;
    ghost_only.grouping.ghost_suppression = true;
    const auto before = to_input_coordinates(s.image_id, decode_image(maps, raw), 4).detections;
    const auto after = to_input_coordinates(s.image_id, decode_image(maps, ghost_only), 4).detections;
    const auto full = to_input_coordinates(s.image_id, decode_image(maps, {}), 4).detections;

    auto is_ghost = [&](const Detection& d) { return box_iou(d.box, span) >= 0.9; };
    auto worst_true_rank = [&](const std::vector<Detection>& dets) {
      int worst = -1;
      for (const auto& o : s.objects) {
        int rank = -1;
        for (std::size_t i = 0; i < dets.size(); ++i) {
          if (box_iou(dets[i].box, o.box) >= 0.9) {
            rank = static_cast<int>(i);
            break;
          }
        }
        if (rank < 0) return -1;
        worst = std::max(worst, rank);
      }
      return worst;
    };
    auto best_ghost_rank = [&](const std::vector<Detection>& dets) {
      for (std::size_t i = 0; i < dets.size(); ++i) {
        if (is_ghost(dets[i])) return static_cast<int>(i);
      }
      return -1;
    };

    std::string problem;
    int ghosts = 0;
    for (const auto& g : before) {
      if (!is_ghost(g)) continue;
      ++ghosts;
      const auto it = std::find_if(after.begin(), after.end(), [&](const Detection& d) {
        return same_except_score(d, g);
      });
      if (it == after.end() || it->score != g.score / 2.0) problem = "ghost score not halved";
    }
    if (ghosts == 0) problem = "no ghost before suppression";
    const int true_rank = worst_true_rank(after);
    const int ghost_rank = best_ghost_rank(after);
    if (problem.empty() && (true_rank < 0 || ghost_rank <= true_rank)) {
      problem = "ghost not ranked below the true boxes";
    }
    const int full_true = worst_true_rank(full);
    const int full_ghost = best_ghost_rank(full);
    if (problem.empty() && (full_true < 0 || (full_ghost >= 0 && full_ghost <= full_true))) {
      problem = "ghost not ranked below the true boxes after soft-NMS";
    }
    if (problem.empty()) {
      ++ok;
    } else if (first_problem.empty()) {
      first_problem = "image " + std::to_string(s.image_id) + ": " + problem;
    }
  }
  Verdict v;
  v.pass = ok == static_cast<int>(scenes.size());
  v.detail = fmt("%d/%zu ghost-trap scenes: ghost present, halved, ranked below all three",
                 ok, scenes.size());
  if (!first_problem.empty()) v.detail += "; " + first_problem;
  return v;
}

// 4. A flat top edge that is only found with edge aggregation.
Verdict edge_aggregation() {
  Scene s;
  s.image_id = 1;
  s.width = s.height = 256;
  s.objects.push_back(make_scene_object(0, {Polygon{{{64, 80}, {192, 80}, {192, 176}, {64, 176}}}}));
  DetectionMaps maps = render_scene(s, 1, {});
  Heatmap& top = maps.heatmap(PointKind::kTop, 0);
  for (double& v : top.values()) v = 0.0;
  const int tx = static_cast<int>(s.objects[0].extremes.top.x / 4);
  const int ty = static_cast<int>(s.objects[0].extremes.top.y / 4);
  const double ridge[] = {0.04, 0.06, 0.07, 0.08, 0.07, 0.06, 0.04};
  for (int i = 0; i < 7; ++i) top(tx - 3 + i, ty) = ridge[i];
  maps = quantize_to_float(std::move(maps));
  double raw_max = 0.0;
  for (double v : maps.heatmap(PointKind::kTop, 0).values()) raw_max = std::max(raw_max, v);

  DecodeParams with;
  DecodeParams without;
  without.lambda_aggr = 0.0;
  auto found = [&](const DecodeParams& p, double* score) {
    for (const auto& d : to_input_coordinates(1, decode_image(maps, p), 4).detections) {
      if (box_iou(d.box, s.objects[0].box) >= 0.5) {
        *score = d.score;
        return true;
      }
    }
    return false;
  };
  double score_with = 0.0, score_without = 0.0;
  const bool hit_with = found(with, &score_with);
  const bool hit_without = found(without, &score_without);
  const auto peaks = extract_aggregated_peaks(maps.heatmap(PointKind::kTop, 0), PointKind::kTop,
                                              with.peaks, with.lambda_aggr);
  const double aggregated = peaks.empty() ? 0.0 : peaks[0].score;
  Verdict v;
  v.pass = raw_max < with.peaks.tau_p && aggregated > with.peaks.tau_p && hit_with && !hit_without;
  v.detail = fmt("raw top peak %.3f, aggregated %.4f (tau_p 0.1); detected with lambda 0.1: %s "
                 "(score %.4f), with lambda 0: %s",
                 raw_max, aggregated, hit_with ? "yes" : "no", score_with,
                 hit_without ? "yes" : "no");
  return v;
}

double rel_err(double a, double b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

// 5. Loss gradients, perfect-prediction limit, and smooth L1 continuity.
Verdict losses() {
  Rng rng(5);
  const FocalParams fp;
  const double step = 1e-5;

  // Focal loss: 100 random pixels of a 32x32 map with rendered targets.
  std::vector<GaussianKeypoint> kps;
  for (int i = 0; i < 6; ++i) kps.push_back({{rng.uniform(0, 32), rng.uniform(0, 32)}, rng.uniform(1, 3)});
  const auto target = render_keypoints(kps, 32, 32);
  Heatmap pred(32, 32);
  for (double& v : pred.values()) v = rng.uniform(0.01, 0.99);
  const int n_obj = 6;
  const auto full = focal_loss(pred, target.heatmap, target.positives, n_obj, fp, true);
  double focal_worst = 0.0;
  bool layout_ok = true;
  for (int k = 0; k < 100; ++k) {
    // Every pixel contributes an independent term, so the derivative with
    // respect to one pixel is the derivative of its own term.
    const std::size_t i = static_cast<std::size_t>(rng.uniform_int(0, 32 * 32 - 1));
    const bool positive = std::binary_search(target.positives.begin(), target.positives.end(), i);
    const std::vector<std::size_t> pos = positive ? std::vector<std::size_t>{0} : std::vector<std::size_t>{};
    const Heatmap t1(1, 1, {target.heatmap.values()[i]});
    auto loss_at = [&](double x, bool grad) {
      return focal_loss(Heatmap(1, 1, {x}), t1, pos, n_obj, fp, grad);
    };
    const double x = pred.values()[i];
    const auto one = loss_at(x, true);
    const double fd = (loss_at(x + step, false).value - loss_at(x - step, false).value) / (2 * step);
    focal_worst = std::max(focal_worst, rel_err((*one.gradient)[0], fd));
    layout_ok = layout_ok && (*one.gradient)[0] == (*full.gradient)[i];
  }

  // Offset loss: 100 keypoints on a 32x32 grid, stride 4.
  OffsetMaps off = OffsetMaps::zeros(32, 32);
  std::vector<OffsetKeypoint> keypoints;
  for (int k = 0; k < 100; ++k) {
    keypoints.push_back({static_cast<PointKind>(rng.uniform_int(0, 3)),
                         {rng.uniform(0, 128), rng.uniform(0, 128)}});
  }
  for (int k = 0; k < 4; ++k) {
    for (double& v : off.dx[k].values()) v = rng.uniform(-1.5, 2.5);
    for (double& v : off.dy[k].values()) v = rng.uniform(-1.5, 2.5);
  }
  // Keep every residual away from the kink at |d| = 1.
  for (const auto& kp : keypoints) {
    const int k = static_cast<int>(kp.kind);
    const int cx = static_cast<int>(std::floor(kp.point.x / 4));
    const int cy = static_cast<int>(std::floor(kp.point.y / 4));
    for (Heatmap* m : {&off.dx[k], &off.dy[k]}) {
      const double tgt = m == &off.dx[k] ? kp.point.x / 4 - cx : kp.point.y / 4 - cy;
      double& v = (*m)(cx, cy);
      if (std::abs(std::abs(v - tgt) - 1.0) < 1e-3) v += 0.01;
    }
  }
  const auto off_full = offset_loss(off, keypoints, 4, true);
  double offset_worst = 0.0;
  const std::size_t plane = 32 * 32;
  for (const auto& kp : keypoints) {
    const int k = static_cast<int>(kp.kind);
    const std::size_t cell =
        static_cast<std::size_t>(std::floor(kp.point.y / 4)) * 32 + static_cast<std::size_t>(std::floor(kp.point.x / 4));
    for (int axis = 0; axis < 2; ++axis) {
      OffsetMaps up = off, down = off;
      Heatmap& mu = axis == 0 ? up.dx[k] : up.dy[k];
      Heatmap& md = axis == 0 ? down.dx[k] : down.dy[k];
      mu.values()[cell] += step;
      md.values()[cell] -= step;
      const double fd =
          (offset_loss(up, keypoints, 4).value - offset_loss(down, keypoints, 4).value) / (2 * step);
      offset_worst = std::max(offset_worst, rel_err((*off_full.gradient)[(2 * k + axis) * plane + cell], fd));
    }
  }

  // Perfect-prediction limit on a binary target.
  Heatmap binary(16, 16);
  const std::vector<std::size_t> binary_pos{17, 100, 230};
  for (std::size_t i : binary_pos) binary.values()[i] = 1.0;
  double last = INFINITY;
  bool decreasing = true;
  for (double delta : {1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6}) {
    Heatmap p(16, 16);
    for (double& v : p.values()) v = delta;
    for (std::size_t i : binary_pos) p.values()[i] = 1.0 - delta;
    const double value = focal_loss(p, binary, binary_pos, 3, fp).value;
    decreasing = decreasing && value < last && value >= 0.0;
    last = value;
  }

  double sl1_jump = 0.0;
  for (double s : {1.0, -1.0}) {
    const double h = 1e-8;
    sl1_jump = std::max(sl1_jump, std::abs(smooth_l1_grad(s * (1 - h)) - smooth_l1_grad(s * (1 + h))));
    sl1_jump = std::max(sl1_jump, std::abs(smooth_l1(s * (1 - h)) - smooth_l1(s * (1 + h))));
  }

  Verdict v;
  v.pass = focal_worst < 1e-4 && layout_ok && offset_worst < 1e-4 && decreasing && last < 1e-10 &&
           sl1_jump < 1e-6;
  v.detail = fmt("focal max rel err %.2e, offset max rel err %.2e (< 1e-4); focal at 1e-6 gap "
                 "%.2e, decreasing %s; SL1 jump at |d|=1 %.1e (< 1e-6)",
                 focal_worst, offset_worst, last, decreasing ? "yes" : "no", sl1_jump);
  if (!layout_ok) v.detail += "; gradient layout mismatch";
  return v;
}

// 6. Octagon geometry.
Verdict octagon() {
  const Polygon oct = build_octagon({4, 0}, {0, 4}, {4, 8}, {8, 4});
  const double ratio = polygon_area(oct) / 64.0;
  const bool area_ok = std::abs(ratio - 46.0 / 64.0) <= 1e-9;

  Rng rng(6);
  int bad = 0;
  for (int iter = 0; iter < 10000; ++iter) {
    const double l = rng.uniform(-100, 100), t = rng.uniform(-100, 100);
    const double r = l + rng.uniform(1e-3, 200), b = t + rng.uniform(1e-3, 200);
    const Point top{rng.uniform(l, r), t}, bottom{rng.uniform(l, r), b};
    const Point left{l, rng.uniform(t, b)}, right{r, rng.uniform(t, b)};
    const auto& v = build_octagon(top, left, bottom, right).vertices;
    bool ok = v.size() == 8;
    bool pos = false, neg = false;
    for (std::size_t i = 0; i < v.size(); ++i) {
      ok = ok && v[i].x >= l && v[i].x <= r && v[i].y >= t && v[i].y <= b;
      const Point& a = v[i];
      const Point& m = v[(i + 1) % 8];
      const Point& c = v[(i + 2) % 8];
      const double cross = (m.x - a.x) * (c.y - m.y) - (m.y - a.y) * (c.x - m.x);
      const double scale = (r - l) * (b - t);
      if (cross > 1e-12 * scale) pos = true;
      if (cross < -1e-12 * scale) neg = true;
    }
    if (!ok || (pos && neg)) ++bad;
  }

  std::string raster;
  bool raster_ok = true;
  for (int n : {512, 1024}) {
    const double s = n / 8.0;
    const Polygon big = build_octagon({4 * s, 0}, {0, 4 * s}, {4 * s, 8 * s}, {8 * s, 4 * s});
    RasterMask box(n, n);
    for (int y = 0; y < n; ++y) box.set_span(y, 0, n);
    const double iou = mask_iou(rasterize(big, n, n), box);
    raster_ok = raster_ok && std::abs(iou / 0.71875 - 1.0) < 0.01;
    raster += fmt(" %d^2: %.6f", n, iou);
  }
  Verdict v;
  v.pass = area_ok && bad == 0 && raster_ok;
  v.detail = fmt("area ratio %.12f (46/64 = 0.71875), %d/10000 random octagons non-convex or "
                 "outside their box, raster IoU",
                 ratio, bad) + raster;
  return v;
}

// 7. Decoding budget on full-scale synthetic maps.
Verdict bench() {
  BenchMapConfig bc;
  std::vector<DetectionMaps> images;
  for (int i = 0; i < 3; ++i) images.push_back(make_bench_maps(7, i, bc));
  const BenchReport r = run_bench(images, {}, 3);

  BenchMapConfig dense = bc;
  dense.mode = BenchMapConfig::Mode::kDenseCenters;
  const std::vector<DetectionMaps> stress{make_bench_maps(7, 0, dense)};
  const BenchReport d = run_bench(stress, {}, 1);

  Verdict v;
  v.pass = r.within_ceiling();
  v.detail = fmt("C=80, 128x128, 40 peaks per extreme map: grouping+NMS %.1f ms/image (max %.1f), "
                 "budget 130 ms %s, ceiling 520 ms; peaks %.1f ms, aggregation %.1f ms. "
                 "Dense-center stress (not scored): grouping+NMS %.1f ms, %lld detections",
                 r.grouping_nms_ms, r.max_grouping_nms_ms, r.within_budget() ? "met" : "MISSED",
                 r.mean.peaks_ms, r.mean.aggregation_ms, d.grouping_nms_ms,
                 static_cast<long long>(d.detections));
  return v;
}

// 8. Evaluator against exhaustive enumeration, and rank-only dependence.
Verdict evaluator() {
  Rng rng(8);
  auto rect = [](const Box& b) {
    return Polygon{{{b.left, b.top}, {b.right, b.top}, {b.right, b.bottom}, {b.left, b.bottom}}};
  };
  double worst = 0.0;
  int nontrivial = 0;
  for (int iter = 0; iter < 20; ++iter) {
    oracle::TinyInstance in;
    Scene s;
    s.image_id = 1;
    s.width = s.height = 128;
    for (int g = 0, n = static_cast<int>(rng.uniform_int(1, 3)); g < n; ++g) {
      const double l = rng.uniform(0, 40), t = rng.uniform(0, 40);
      const Box b{l, t, l + rng.uniform(8, 40), t + rng.uniform(8, 40)};
      s.objects.push_back(make_scene_object(0, {rect(b)}));
      in.gts.push_back({b.left, b.top, b.right, b.bottom});
    }
    std::vector<ImageDetections> dets{{1, {}}};
    for (int k = 0, n = static_cast<int>(rng.uniform_int(1, 4)); k < n; ++k) {
      const auto& base = in.gts[rng.uniform_int(0, in.gts.size() - 1)];
      const double j = rng.uniform(0, 8);
      const Box b{base.l + rng.uniform(-j, j), base.t + rng.uniform(-j, j),
                  base.r + rng.uniform(-j, j), base.b + rng.uniform(-j, j)};
      const double score = rng.uniform(0.01, 1.0);
      dets[0].detections.push_back({0, b, score, {}, {}});
      in.dets.push_back({b.left, b.top, b.right, b.bottom});
      in.scores.push_back(score);
    }
    const EvalResult r = evaluate(std::span(&s, 1), dets, 1);
    double mean = 0.0;
    for (std::size_t t = 0; t < r.iou_thresholds.size(); ++t) {
      const double ref = oracle::exhaustive_ap(in, r.iou_thresholds[t]);
      worst = std::max(worst, std::abs(r.ap_per_threshold[t] - ref));
      if (ref > 0.0 && ref < 1.0) ++nontrivial;
      mean += ref;
    }
    worst = std::max(worst, std::abs(r.ap - mean / r.iou_thresholds.size()));
  }

  // Rescaling invariance on a multi-image, multi-class problem.
  SynthConfig sc;
  sc.num_images = 30;
  const auto scenes = synth_scenes(8, sc);
  std::vector<ImageDetections> dets;
  for (const auto& s : scenes) {
    ImageDetections id{s.image_id, {}};
    for (const auto& o : s.objects) {
      for (int k = 0, n = static_cast<int>(rng.uniform_int(0, 3)); k < n; ++k) {
        const double j = rng.uniform(0, 0.3) * o.box.width();
        const Box b{o.box.left + rng.uniform(-j, j), o.box.top + rng.uniform(-j, j),
                    o.box.right + rng.uniform(-j, j), o.box.bottom + rng.uniform(-j, j)};
        const int cls = rng.bernoulli(0.9) ? o.class_id : static_cast<int>(rng.uniform_int(0, 2));
        id.detections.push_back({cls, b, rng.uniform(0.01, 1.0), {}, {}});
      }
    }
    dets.push_back(id);
  }
  const auto cats = default_categories(3);
  const EvalResult base = evaluate(scenes, dets, 3);
  const std::string base_json = eval_result_to_json(base, cats).dump();
  int changed = 0;
  for (int iter = 0; iter < 100; ++iter) {
    std::function<double(double)> f;
    switch (iter % 4) {
      case 0: {
        const double p = rng.uniform(0.1, 10.0);
        f = [p](double s) { return std::pow(s, p); };
        break;
      }
      case 1: {
        const double a = rng.uniform(0.01, 1.0), b = rng.uniform(0.0, 1.0 - a);
        f = [a, b](double s) { return a * s + b; };
        break;
      }
      case 2: {
        const double k = rng.uniform(0.5, 20.0);
        f = [k](double s) { return std::expm1(k * s) / std::expm1(k); };
        break;
      }
      default: {
        const double k = rng.uniform(0.5, 20.0);
        f = [k](double s) { return std::log1p(k * s) / std::log1p(k); };
        break;
      }
    }
    auto scaled = dets;
    for (auto& id : scaled) {
      for (auto& d : id.detections) d.score = f(d.score);
    }
    if (eval_result_to_json(evaluate(scenes, scaled, 3), cats).dump() != base_json) ++changed;
  }
  Verdict v;
  v.pass = worst <= 1e-12 && changed == 0;
  v.detail = fmt("20 tiny instances: max |AP - exhaustive| = %.1e (<= 1e-12), %d threshold "
                 "results strictly between 0 and 1; %d/100 monotone rescalings changed any AP "
                 "(base AP %.4f)",
                 worst, nontrivial, changed, base.ap);
  return v;
}

struct PipelineOutput {
  std::string annotations;
  std::vector<std::string> tensors;
  std::string detections;
  std::string results;
  friend bool operator==(const PipelineOutput&, const PipelineOutput&) = default;
};

PipelineOutput run_pipeline(int threads) {
  SynthConfig sc;
  sc.num_images = 40;
  const auto cats = default_categories(sc.num_classes);
  PipelineOutput out;
  out.annotations = format_annotations({cats, synth_scenes(9, sc, threads)});
  const Dataset ds = parse_annotations(out.annotations);
  out.tensors.resize(ds.scenes.size());
  std::vector<ImageDetections> dets(ds.scenes.size());
  DecodeParams decode;
  decode.threads = threads;
  for (std::size_t i = 0; i < ds.scenes.size(); ++i) {
    out.tensors[i] = encode_tensor(render_scene(ds.scenes[i], ds.num_classes(), {}));
    const DetectionMaps maps = decode_tensor(out.tensors[i]);
    dets[i] = to_input_coordinates(ds.scenes[i].image_id, decode_image(maps, decode), 4);
  }
  out.detections = format_detections({{"seed", 9}}, dets, cats);
  const auto parsed = parse_detections(out.detections, cats);
  EvalConfig ec;
  out.results = eval_result_to_json(evaluate(ds.scenes, parsed, ds.num_classes(), ec, threads),
                                    cats, true)
                    .dump();
  return out;
}

// 9. Byte-identical outputs across runs and thread counts.
Verdict determinism() {
  const int max_threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  const PipelineOutput ref = run_pipeline(1);
  int runs = 0, differing = 0;
  for (int threads : {1, 4, max_threads}) {
    for (int rep = 0; rep < 3; ++rep) {
      ++runs;
      if (!(run_pipeline(threads) == ref)) ++differing;
    }
  }
  std::size_t tensor_bytes = 0;
  for (const auto& t : ref.tensors) tensor_bytes += t.size();
  Verdict v;
  v.pass = differing == 0;
  v.detail = fmt("%d runs over threads {1, 4, %d}: %d differ (annotations %zu B, tensors %zu B, "
                 "detections %zu B, results %zu B)",
                 runs, max_threads, differing, ref.annotations.size(), tensor_bytes,
                 ref.detections.size(), ref.results.size());
  return v;
}

}  // namespace
}  // namespace exdet

int main() {
  using namespace exdet;
  report(1, "oracle round trip", roundtrip());
  report(2, "grouping equivalence", grouping_equivalence());
  report(3, "ghost suppression", ghost_trap());
  report(4, "edge aggregation", edge_aggregation());
  report(5, "loss correctness", losses());
  report(6, "octagon geometry", octagon());
  report(7, "decoding budget", bench());
  report(8, "evaluator oracle", evaluator());
  report(9, "determinism", determinism());
  std::printf("%d of 9 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
