#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ttr/crf.hpp"
#include "ttr/text.hpp"

namespace ttr {

/// Axis-aligned box in pixels, origin top-left: (x, y, width, height).
struct BoundingBox {
  double x = 0.0;
  double y = 0.0;
  double w = 1.0;
  double h = 1.0;

  double area() const { return w * h; }
  bool valid() const { return w > 0.0 && h > 0.0; }
  bool operator==(const BoundingBox&) const = default;
};

/// Intersection over union; 0 for disjoint boxes.
double iou(const BoundingBox& a, const BoundingBox& b);
/// Smallest box containing both.
BoundingBox box_union(const BoundingBox& a, const BoundingBox& b);

/// One dense caption: its region, text, and semantic parse.
struct SceneCaption : LabeledPhrase {
  BoundingBox box;
  std::string caption;
  std::optional<double> relevance;
  std::optional<double> confidence;
  /// Gold semantic labels carried by the scene file, if annotated.
  std::optional<std::vector<SemanticClass>> annotated_labels;
  /// Position among the scene's accepted records.
  std::size_t scene_index = 0;
  bool parsed = false;
};

struct Scene {
  std::string source_id;
  std::vector<SceneCaption> captions;
  /// Records dropped on load because of a non-positive width or height.
  std::size_t rejected = 0;
};

/// Reads a JSON scene document: a top-level array of records
/// {"box": [x, y, w, h], "caption": "...", "confidence": c?, "labels": [...]?}.
Scene load_scene(const std::filesystem::path& path);
Scene parse_scene(std::istream& in, std::string source_id);
void write_scene(std::ostream& out, const Scene& scene, bool with_labels);

/// Fills semantic labels for every caption with the semantic tagger.
void parse_captions(Scene& scene, const crf::CrfModel& semantic);
/// Fills semantic labels from the scene file's annotations; throws
/// InputError if any caption lacks them.
void apply_annotated_labels(Scene& scene);

}  // namespace ttr
