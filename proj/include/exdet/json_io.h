#ifndef EXDET_JSON_IO_H_
#define EXDET_JSON_IO_H_

#include <cstdint>
#include <string>
#include <vector>

#include "exdet/annotation.h"
#include "exdet/evaluator.h"
#include "json.hpp"

namespace exdet {

struct Category {
  int id = 0;
  std::string name;
};

// Ground truth for a set of images. Scene class ids index `categories`,
// which is kept sorted by category id.
struct Dataset {
  std::vector<Category> categories;
  std::vector<Scene> scenes;

  int num_classes() const { return static_cast<int>(categories.size()); }
  // Throws InputError for an unknown category id.
  int class_of(int category_id) const;
};

// {"images": [{id, width, height}], "categories": [{id, name}],
//  "annotations": [{image_id, category_id, polygon: [x1, y1, ...]}]}
// A polygon may also be a list of such flat rings (multi-part object).
// Throws FormatError on malformed JSON or broken references, and
// InputError on degenerate polygons.
Dataset parse_annotations(const std::string& text);
Dataset read_annotations(const std::string& path);
std::string format_annotations(const Dataset& dataset);

// Categories named "class_<i>" with ids 1..n.
std::vector<Category> default_categories(int num_classes);

// One JSON object per line. The optional first line {"header": {...}} records
// the producing tool's settings. Detections are in input-image pixels:
//   {"image_id", "category_id", "bbox": [left, top, width, height], "score",
//    "extreme_points": [[x, y] x4] (top, left, bottom, right), "octagon": [[x, y] x8]}
std::string format_detections(const nlohmann::json& header,
                              const std::vector<ImageDetections>& images,
                              const std::vector<Category>& categories);
// Groups lines by image id in order of first appearance. Unknown categories
// raise FormatError.
std::vector<ImageDetections> parse_detections(
    const std::string& text, const std::vector<Category>& categories,
    nlohmann::json* header = nullptr);
std::vector<ImageDetections> read_detections(
    const std::string& path, const std::vector<Category>& categories,
    nlohmann::json* header = nullptr);

nlohmann::json eval_result_to_json(const EvalResult& result,
                                   const std::vector<Category>& categories,
                                   bool include_matches = false);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& contents);

}  // namespace exdet

#endif  // EXDET_JSON_IO_H_
