#include "exdet/evaluator.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "exdet/errors.h"
#include "exdet/octagon.h"
#include "exdet/parallel.h"

namespace exdet {

std::vector<double> EvalConfig::default_iou_thresholds() {
  // Same spacing rule as the reference COCO tooling: i * step + start.
  std::vector<double> t(10);
  for (int i = 0; i < 10; ++i) t[i] = i * (0.95 - 0.5) / 9.0 + 0.5;
  return t;
}

std::vector<AreaRange> EvalConfig::default_area_ranges() {
  constexpr double kHuge = 1e10;
  return {{"all", 0.0, kHuge},
          {"small", 0.0, 32.0 * 32.0},
          {"medium", 32.0 * 32.0, 96.0 * 96.0},
          {"large", 96.0 * 96.0, kHuge}};
}

void EvalConfig::validate() const {
  if (iou_thresholds.empty()) throw InputError("no IoU thresholds");
  for (std::size_t i = 0; i < iou_thresholds.size(); ++i) {
    const double t = iou_thresholds[i];
    if (!(t > 0.0 && t <= 1.0)) throw InputError("IoU threshold outside (0,1]");
    if (i > 0 && !(t > iou_thresholds[i - 1])) {
      throw InputError("IoU thresholds must be strictly increasing");
    }
  }
  if (area_ranges.empty()) throw InputError("no area ranges");
  if (max_dets < 1) throw InputError("max_dets must be >= 1");
}

MatchOutcome match_detections(const std::vector<std::vector<double>>& ious,
                              std::span<const char> gt_ignore,
                              double threshold) {
  const std::size_t num_dets = ious.size();
  const std::size_t num_gts = gt_ignore.size();
  MatchOutcome out;
  out.det_to_gt.assign(num_dets, -1);
  out.gt_to_det.assign(num_gts, -1);
  out.det_ignored.assign(num_dets, 0);

  // Non-ignored ground truths are tried first.
  std::vector<int> gt_order(num_gts);
  std::iota(gt_order.begin(), gt_order.end(), 0);
  std::stable_sort(gt_order.begin(), gt_order.end(),
                   [&](int a, int b) { return gt_ignore[a] < gt_ignore[b]; });

  for (std::size_t d = 0; d < num_dets; ++d) {
    double best_iou = std::min(threshold, 1.0 - 1e-10);
    int best = -1;
    for (int g : gt_order) {
      if (out.gt_to_det[g] >= 0) continue;
      if (best >= 0 && !gt_ignore[best] && gt_ignore[g]) break;
      if (ious[d][g] < best_iou) continue;
      best_iou = ious[d][g];
      best = g;
    }
    if (best < 0) continue;
    out.det_to_gt[d] = best;
    out.gt_to_det[best] = static_cast<int>(d);
    out.det_ignored[d] = gt_ignore[best];
  }
  return out;
}

double interpolated_ap(std::span<const ScoredMatch> records, int num_gt) {
  if (num_gt <= 0) return -1.0;
  std::vector<std::size_t> order(records.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return records[a].score > records[b].score;
  });

  std::vector<double> recall;
  std::vector<double> precision;
  double tp = 0.0;
  double fp = 0.0;
  for (std::size_t i : order) {
    const ScoredMatch& m = records[i];
    if (m.ignored) continue;
    if (m.true_positive) {
      tp += 1.0;
    } else {
      fp += 1.0;
    }
    recall.push_back(tp / num_gt);
    precision.push_back(tp / (tp + fp));
  }
  for (std::size_t i = precision.size(); i-- > 1;) {
    precision[i - 1] = std::max(precision[i - 1], precision[i]);
  }

  double sum = 0.0;
  constexpr int kRecallSteps = 101;
  for (int k = 0; k < kRecallSteps; ++k) {
    const double r = k * 1.0 / (kRecallSteps - 1);
    const auto it = std::lower_bound(recall.begin(), recall.end(), r);
    if (it != recall.end()) sum += precision[it - recall.begin()];
  }
  return sum / kRecallSteps;
}

namespace {

struct ImageClassResult {
  // [area][threshold] -> detection outcomes in per-image score order.
  std::vector<std::vector<std::vector<ScoredMatch>>> matches;
  std::vector<int> num_gt;  // per area, non-ignored
};

struct ImageResult {
  std::vector<ImageClassResult> per_class;
  std::vector<MatchRecord> audit;
};

bool in_range(double area, const AreaRange& range) {
  return area >= range.lo && area < range.hi;
}

Polygon box_polygon(const Box& b) {
  return Polygon{{{b.left, b.top}, {b.right, b.top}, {b.right, b.bottom},
                  {b.left, b.bottom}}};
}

ImageResult evaluate_image(const Scene& scene, const ImageDetections* dets,
                           int num_classes, const EvalConfig& config) {
  const std::size_t num_areas = config.area_ranges.size();
  const std::size_t num_thr = config.iou_thresholds.size();
  ImageResult result;
  result.per_class.resize(num_classes);

  const bool mask_mode = config.mode == EvalConfig::Mode::kMask;

  for (int k = 0; k < num_classes; ++k) {
    std::vector<int> gts;
    for (std::size_t g = 0; g < scene.objects.size(); ++g) {
      if (scene.objects[g].class_id == k) gts.push_back(static_cast<int>(g));
    }
    std::vector<int> det_idx;
    if (dets) {
      for (std::size_t d = 0; d < dets->detections.size(); ++d) {
        if (dets->detections[d].class_id == k) {
          det_idx.push_back(static_cast<int>(d));
        }
      }
      std::stable_sort(det_idx.begin(), det_idx.end(), [&](int a, int b) {
        return detection_before(dets->detections[a], dets->detections[b]);
      });
      if (det_idx.size() > static_cast<std::size_t>(config.max_dets)) {
        det_idx.resize(config.max_dets);
      }
    }

    std::vector<std::vector<double>> ious(
        det_idx.size(), std::vector<double>(gts.size(), 0.0));
    std::vector<double> det_area(det_idx.size(), 0.0);
    if (mask_mode) {
      std::vector<RasterMask> gt_masks;
      for (int g : gts) {
        gt_masks.push_back(
            rasterize(scene.objects[g].parts, scene.width, scene.height));
      }
      for (std::size_t d = 0; d < det_idx.size(); ++d) {
        const Detection& det = dets->detections[det_idx[d]];
        const Polygon shape = det.octagon ? *det.octagon : box_polygon(det.box);
        const RasterMask mask = rasterize(shape, scene.width, scene.height);
        det_area[d] = static_cast<double>(mask.count());
        for (std::size_t g = 0; g < gts.size(); ++g) {
          ious[d][g] = mask_iou(mask, gt_masks[g]);
        }
      }
    } else {
      for (std::size_t d = 0; d < det_idx.size(); ++d) {
        const Detection& det = dets->detections[det_idx[d]];
        det_area[d] = det.box.area();
        for (std::size_t g = 0; g < gts.size(); ++g) {
          ious[d][g] = box_iou(det.box, scene.objects[gts[g]].box);
        }
      }
    }

    ImageClassResult& icr = result.per_class[k];
    icr.matches.assign(num_areas,
                       std::vector<std::vector<ScoredMatch>>(num_thr));
    icr.num_gt.assign(num_areas, 0);
    for (std::size_t a = 0; a < num_areas; ++a) {
      const AreaRange& range = config.area_ranges[a];
      std::vector<char> gt_ignore(gts.size());
      for (std::size_t g = 0; g < gts.size(); ++g) {
        gt_ignore[g] = !in_range(scene.objects[gts[g]].area, range);
        if (!gt_ignore[g]) ++icr.num_gt[a];
      }
      for (std::size_t t = 0; t < num_thr; ++t) {
        const MatchOutcome m =
            match_detections(ious, gt_ignore, config.iou_thresholds[t]);
        auto& out = icr.matches[a][t];
        out.reserve(det_idx.size());
        for (std::size_t d = 0; d < det_idx.size(); ++d) {
          const bool matched = m.det_to_gt[d] >= 0;
          const bool ignored = matched ? static_cast<bool>(m.det_ignored[d])
                                       : !in_range(det_area[d], range);
          out.push_back({dets->detections[det_idx[d]].score, matched, ignored});
          if (range.name == "all") {
            MatchRecord rec;
            rec.image_id = scene.image_id;
            rec.class_id = k;
            rec.threshold_index = static_cast<int>(t);
            rec.det_index = det_idx[d];
            rec.score = dets->detections[det_idx[d]].score;
            if (matched) {
              rec.gt_index = gts[m.det_to_gt[d]];
              rec.iou = ious[d][m.det_to_gt[d]];
            }
            result.audit.push_back(rec);
          }
        }
      }
    }
  }
  return result;
}

double mean_valid(const std::vector<double>& v) {
  double sum = 0.0;
  int n = 0;
  for (double x : v) {
    if (x > -1.0) {
      sum += x;
      ++n;
    }
  }
  return n ? sum / n : -1.0;
}

int find_threshold(const std::vector<double>& thresholds, double value) {
  for (std::size_t i = 0; i < thresholds.size(); ++i) {
    if (std::abs(thresholds[i] - value) < 1e-9) return static_cast<int>(i);
  }
  return -1;
}

int find_area(const std::vector<AreaRange>& ranges, const std::string& name) {
  for (std::size_t i = 0; i < ranges.size(); ++i) {
    if (ranges[i].name == name) return static_cast<int>(i);
  }
  return -1;
}

}  // namespace

EvalResult evaluate(std::span<const Scene> scenes,
                    std::span<const ImageDetections> detections,
                    int num_classes, const EvalConfig& config, int threads) {
  config.validate();
  if (num_classes < 1) throw InputError("need at least one class");

  std::map<std::int64_t, std::size_t> scene_index;
  for (std::size_t i = 0; i < scenes.size(); ++i) {
    if (!scene_index.emplace(scenes[i].image_id, i).second) {
      throw InputError("duplicate image id in ground truth");
    }
  }
  std::vector<const ImageDetections*> dets_for(scenes.size(), nullptr);
  for (const auto& d : detections) {
    auto it = scene_index.find(d.image_id);
    if (it == scene_index.end()) {
      throw InputError("detections reference unknown image id " +
                       std::to_string(d.image_id));
    }
    if (dets_for[it->second]) {
      throw InputError("duplicate detection block for image id " +
                       std::to_string(d.image_id));
    }
    for (const auto& det : d.detections) {
      if (det.class_id < 0 || det.class_id >= num_classes) {
        throw InputError("detection class outside [0, num_classes)");
      }
    }
    dets_for[it->second] = &d;
  }

  std::vector<ImageResult> per_image(scenes.size());
  parallel_for(scenes.size(), threads, [&](std::size_t i) {
    per_image[i] = evaluate_image(scenes[i], dets_for[i], num_classes, config);
  });

  const std::size_t num_areas = config.area_ranges.size();
  const std::size_t num_thr = config.iou_thresholds.size();
  // ap[k][a][t]
  std::vector<std::vector<std::vector<double>>> ap(
      num_classes, std::vector<std::vector<double>>(
                       num_areas, std::vector<double>(num_thr, -1.0)));
  std::vector<ScoredMatch> pooled;
  for (int k = 0; k < num_classes; ++k) {
    for (std::size_t a = 0; a < num_areas; ++a) {
      int num_gt = 0;
      for (const auto& img : per_image) num_gt += img.per_class[k].num_gt[a];
      for (std::size_t t = 0; t < num_thr; ++t) {
        pooled.clear();
        for (const auto& img : per_image) {
          const auto& m = img.per_class[k].matches[a][t];
          pooled.insert(pooled.end(), m.begin(), m.end());
        }
        ap[k][a][t] = interpolated_ap(pooled, num_gt);
      }
    }
  }

  EvalResult result;
  result.iou_thresholds = config.iou_thresholds;
  auto summarize = [&](int area, int thr) {
    std::vector<double> vals;
    if (area < 0) return -1.0;
    for (int k = 0; k < num_classes; ++k) {
      for (std::size_t t = 0; t < num_thr; ++t) {
        if (thr >= 0 && static_cast<int>(t) != thr) continue;
        vals.push_back(ap[k][area][t]);
      }
    }
    return mean_valid(vals);
  };
  const int all = std::max(find_area(config.area_ranges, "all"), 0);
  const int t50 = find_threshold(config.iou_thresholds, 0.5);
  const int t75 = find_threshold(config.iou_thresholds, 0.75);
  result.ap = summarize(all, -1);
  result.ap50 = t50 >= 0 ? summarize(all, t50) : -1.0;
  result.ap75 = t75 >= 0 ? summarize(all, t75) : -1.0;
  result.ap_small = summarize(find_area(config.area_ranges, "small"), -1);
  result.ap_medium = summarize(find_area(config.area_ranges, "medium"), -1);
  result.ap_large = summarize(find_area(config.area_ranges, "large"), -1);
  for (std::size_t t = 0; t < num_thr; ++t) {
    result.ap_per_threshold.push_back(summarize(all, static_cast<int>(t)));
  }
  for (int k = 0; k < num_classes; ++k) {
    ClassResult cr;
    cr.class_id = k;
    for (const auto& img : per_image) cr.num_gt += img.per_class[k].num_gt[all];
    cr.ap = mean_valid(ap[k][all]);
    cr.ap50 = t50 >= 0 ? ap[k][all][t50] : -1.0;
    cr.ap75 = t75 >= 0 ? ap[k][all][t75] : -1.0;
    result.per_class.push_back(cr);
  }
  for (auto& img : per_image) {
    result.matches.insert(result.matches.end(), img.audit.begin(),
                          img.audit.end());
  }
  return result;
}

}  // namespace exdet
