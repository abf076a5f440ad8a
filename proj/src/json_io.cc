#include "exdet/json_io.h"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "exdet/errors.h"

namespace exdet {

using nlohmann::json;

namespace {

json parse_json(const std::string& text, std::int64_t base_offset = 0) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("invalid JSON: ") + e.what(),
                      base_offset + static_cast<std::int64_t>(e.byte) - 1);
  }
}

template <typename T>
T field(const json& obj, const char* key, const char* where) {
  if (!obj.is_object() || !obj.contains(key)) {
    throw FormatError(std::string(where) + " is missing \"" + key + "\"");
  }
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw FormatError(std::string(where) + " has a malformed \"" + key + "\"");
  }
}

Polygon ring_from_flat(const json& flat) {
  if (!flat.is_array() || flat.size() % 2 != 0) {
    throw FormatError("polygon must be a flat [x1, y1, x2, y2, ...] array");
  }
  Polygon p;
  for (std::size_t i = 0; i < flat.size(); i += 2) {
    if (!flat[i].is_number() || !flat[i + 1].is_number()) {
      throw FormatError("polygon coordinates must be numbers");
    }
    p.vertices.push_back({flat[i].get<double>(), flat[i + 1].get<double>()});
  }
  if (p.vertices.size() < 3) {
    throw FormatError("polygon needs at least three vertices");
  }
  return p;
}

json ring_to_flat(const Polygon& p) {
  json flat = json::array();
  for (const auto& v : p.vertices) {
    flat.push_back(v.x);
    flat.push_back(v.y);
  }
  return flat;
}

json point_json(const Point& p) { return json::array({p.x, p.y}); }

Point point_from(const json& j) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() ||
      !j[1].is_number()) {
    throw FormatError("point must be [x, y]");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

double round_ap(double v) { return v; }

}  // namespace

int Dataset::class_of(int category_id) const {
  auto it = std::lower_bound(
      categories.begin(), categories.end(), category_id,
      [](const Category& c, int id) { return c.id < id; });
  if (it == categories.end() || it->id != category_id) {
    throw InputError("unknown category id " + std::to_string(category_id));
  }
  return static_cast<int>(it - categories.begin());
}

std::vector<Category> default_categories(int num_classes) {
  std::vector<Category> cats;
  for (int i = 0; i < num_classes; ++i) {
    cats.push_back({i + 1, "class_" + std::to_string(i)});
  }
  return cats;
}

Dataset parse_annotations(const std::string& text) {
  const json root = parse_json(text);
  if (!root.is_object()) throw FormatError("annotations root must be an object");
  Dataset ds;

  for (const auto& c : field<json>(root, "categories", "annotations file")) {
    ds.categories.push_back({field<int>(c, "id", "category"),
                             c.value("name", std::string())});
  }
  std::sort(ds.categories.begin(), ds.categories.end(),
            [](const Category& a, const Category& b) { return a.id < b.id; });
  for (std::size_t i = 1; i < ds.categories.size(); ++i) {
    if (ds.categories[i].id == ds.categories[i - 1].id) {
      throw FormatError("duplicate category id " +
                        std::to_string(ds.categories[i].id));
    }
  }

  std::map<std::int64_t, std::size_t> by_id;
  for (const auto& img : field<json>(root, "images", "annotations file")) {
    Scene s;
    s.image_id = field<std::int64_t>(img, "id", "image");
    s.width = field<int>(img, "width", "image");
    s.height = field<int>(img, "height", "image");
    if (s.width <= 0 || s.height <= 0) {
      throw FormatError("image " + std::to_string(s.image_id) +
                        " has non-positive size");
    }
    if (!by_id.emplace(s.image_id, ds.scenes.size()).second) {
      throw FormatError("duplicate image id " + std::to_string(s.image_id));
    }
    ds.scenes.push_back(std::move(s));
  }

  for (const auto& ann : field<json>(root, "annotations", "annotations file")) {
    const auto image_id = field<std::int64_t>(ann, "image_id", "annotation");
    const int category_id = field<int>(ann, "category_id", "annotation");
    auto it = by_id.find(image_id);
    if (it == by_id.end()) {
      throw FormatError("annotation references unknown image id " +
                        std::to_string(image_id));
    }
    int class_id = 0;
    try {
      class_id = ds.class_of(category_id);
    } catch (const InputError& e) {
      throw FormatError(std::string("annotation: ") + e.what());
    }
    const json poly = field<json>(ann, "polygon", "annotation");
    std::vector<Polygon> parts;
    if (poly.is_array() && !poly.empty() && poly[0].is_array()) {
      for (const auto& ring : poly) parts.push_back(ring_from_flat(ring));
    } else {
      parts.push_back(ring_from_flat(poly));
    }
    Scene& scene = ds.scenes[it->second];
    for (const auto& part : parts) {
      for (const auto& v : part.vertices) {
        if (v.x < 0 || v.y < 0 || v.x >= scene.width || v.y >= scene.height) {
          throw FormatError("polygon vertex outside image " +
                            std::to_string(image_id));
        }
      }
    }
    scene.objects.push_back(make_scene_object(class_id, std::move(parts)));
  }
  return ds;
}

Dataset read_annotations(const std::string& path) {
  return parse_annotations(read_file(path));
}

std::string format_annotations(const Dataset& dataset) {
  json images = json::array();
  json annotations = json::array();
  for (const auto& s : dataset.scenes) {
    images.push_back({{"id", s.image_id}, {"width", s.width}, {"height", s.height}});
    for (const auto& obj : s.objects) {
      json poly;
      if (obj.parts.size() == 1) {
        poly = ring_to_flat(obj.parts[0]);
      } else {
        poly = json::array();
        for (const auto& p : obj.parts) poly.push_back(ring_to_flat(p));
      }
      annotations.push_back({{"image_id", s.image_id},
                             {"category_id", dataset.categories.at(obj.class_id).id},
                             {"polygon", std::move(poly)}});
    }
  }
  json cats = json::array();
  for (const auto& c : dataset.categories) {
    cats.push_back({{"id", c.id}, {"name", c.name}});
  }
  json root = {{"images", std::move(images)},
               {"categories", std::move(cats)},
               {"annotations", std::move(annotations)}};
  return root.dump(1) + "\n";
}

std::string format_detections(const json& header,
                              const std::vector<ImageDetections>& images,
                              const std::vector<Category>& categories) {
  std::string out;
  if (!header.is_null()) out += json{{"header", header}}.dump() + "\n";
  for (const auto& img : images) {
    for (const auto& d : img.detections) {
      json line = {{"image_id", img.image_id},
                   {"category_id", categories.at(d.class_id).id},
                   {"bbox", json::array({d.box.left, d.box.top, d.box.width(),
                                         d.box.height()})},
                   {"score", d.score}};
      if (d.extremes) {
        line["extreme_points"] = json::array(
            {point_json(d.extremes->top.point), point_json(d.extremes->left.point),
             point_json(d.extremes->bottom.point),
             point_json(d.extremes->right.point)});
      }
      if (d.octagon) {
        json oct = json::array();
        for (const auto& v : d.octagon->vertices) oct.push_back(point_json(v));
        line["octagon"] = std::move(oct);
      }
      out += line.dump() + "\n";
    }
  }
  return out;
}

std::vector<ImageDetections> parse_detections(
    const std::string& text, const std::vector<Category>& categories,
    json* header) {
  std::vector<ImageDetections> images;
  std::map<std::int64_t, std::size_t> by_id;
  std::map<int, int> class_of;
  for (std::size_t i = 0; i < categories.size(); ++i) {
    class_of[categories[i].id] = static_cast<int>(i);
  }

  std::size_t pos = 0;
  bool first = true;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    const std::string line = text.substr(pos, end - pos);
    const auto line_offset = static_cast<std::int64_t>(pos);
    pos = end + 1;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;

    const json j = parse_json(line, line_offset);
    if (first && j.is_object() && j.contains("header")) {
      if (header) *header = j["header"];
      first = false;
      continue;
    }
    first = false;

    Detection d;
    const auto image_id = field<std::int64_t>(j, "image_id", "detection");
    const int category_id = field<int>(j, "category_id", "detection");
    auto cit = class_of.find(category_id);
    if (cit == class_of.end()) {
      throw FormatError("detection has unknown category id " +
                        std::to_string(category_id), line_offset);
    }
    d.class_id = cit->second;
    const auto bbox = field<std::vector<double>>(j, "bbox", "detection");
    if (bbox.size() != 4 || bbox[2] < 0 || bbox[3] < 0) {
      throw FormatError("bbox must be [left, top, width >= 0, height >= 0]",
                        line_offset);
    }
    d.box = {bbox[0], bbox[1], bbox[0] + bbox[2], bbox[1] + bbox[3]};
    d.score = field<double>(j, "score", "detection");
    if (!(d.score > 0.0 && d.score <= 1.0)) {
      throw FormatError("detection score outside (0, 1]", line_offset);
    }
    if (j.contains("extreme_points")) {
      const json& e = j["extreme_points"];
      if (!e.is_array() || e.size() != 4) {
        throw FormatError("extreme_points must hold four points", line_offset);
      }
      ExtremeSet set;
      set.top.point = point_from(e[0]);
      set.left.point = point_from(e[1]);
      set.bottom.point = point_from(e[2]);
      set.right.point = point_from(e[3]);
      set.center.point = center_of(set.top.point, set.left.point,
                                   set.bottom.point, set.right.point);
      d.extremes = set;
    }
    if (j.contains("octagon")) {
      Polygon oct;
      for (const auto& v : j["octagon"]) oct.vertices.push_back(point_from(v));
      if (oct.vertices.size() < 3) {
        throw FormatError("octagon needs at least three vertices", line_offset);
      }
      d.octagon = std::move(oct);
    }

    auto [it, inserted] = by_id.emplace(image_id, images.size());
    if (inserted) images.push_back({image_id, {}});
    images[it->second].detections.push_back(std::move(d));
  }
  return images;
}

std::vector<ImageDetections> read_detections(
    const std::string& path, const std::vector<Category>& categories,
    json* header) {
  return parse_detections(read_file(path), categories, header);
}

json eval_result_to_json(const EvalResult& r,
                         const std::vector<Category>& categories,
                         bool include_matches) {
  json per_threshold = json::array();
  for (std::size_t t = 0; t < r.iou_thresholds.size(); ++t) {
    per_threshold.push_back(
        {{"iou", r.iou_thresholds[t]}, {"ap", round_ap(r.ap_per_threshold[t])}});
  }
  json per_class = json::array();
  for (const auto& c : r.per_class) {
    per_class.push_back({{"category_id", categories.at(c.class_id).id},
                         {"name", categories.at(c.class_id).name},
                         {"num_gt", c.num_gt},
                         {"ap", c.ap},
                         {"ap50", c.ap50},
                         {"ap75", c.ap75}});
  }
  json out = {{"ap", r.ap},
              {"ap50", r.ap50},
              {"ap75", r.ap75},
              {"ap_small", r.ap_small},
              {"ap_medium", r.ap_medium},
              {"ap_large", r.ap_large},
              {"ap_per_threshold", std::move(per_threshold)},
              {"per_class", std::move(per_class)}};
  if (include_matches) {
    json matches = json::array();
    for (const auto& m : r.matches) {
      matches.push_back({{"image_id", m.image_id},
                         {"category_id", categories.at(m.class_id).id},
                         {"iou_threshold", r.iou_thresholds.at(m.threshold_index)},
                         {"det_index", m.det_index},
                         {"gt_index", m.gt_index},
                         {"score", m.score},
                         {"iou", m.iou}});
    }
    out["matches"] = std::move(matches);
  }
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write " + path);
  out << contents;
  if (!out) throw InputError("failed writing " + path);
}

}  // namespace exdet
