#include "ttr/scene.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>

#include <json.hpp>

#include "ttr/error.hpp"
#include "ttr/instruction.hpp"

namespace ttr {

double iou(const BoundingBox& a, const BoundingBox& b) {
  const double ix = std::max(0.0, std::min(a.x + a.w, b.x + b.w) - std::max(a.x, b.x));
  const double iy = std::max(0.0, std::min(a.y + a.h, b.y + b.h) - std::max(a.y, b.y));
  const double inter = ix * iy;
  if (inter <= 0.0) return 0.0;
  const double uni = a.area() + b.area() - inter;
  return uni > 0.0 ? std::clamp(inter / uni, 0.0, 1.0) : 0.0;
}

BoundingBox box_union(const BoundingBox& a, const BoundingBox& b) {
  const double x0 = std::min(a.x, b.x);
  const double y0 = std::min(a.y, b.y);
  const double x1 = std::max(a.x + a.w, b.x + b.w);
  const double y1 = std::max(a.y + a.h, b.y + b.h);
  return BoundingBox{x0, y0, x1 - x0, y1 - y0};
}

Scene parse_scene(std::istream& in, std::string source_id) {
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(source_id + ": not a valid scene document: " + e.what());
  }
  if (!doc.is_array()) throw InputError(source_id + ": scene document must be a list of records");

  Scene scene;
  scene.source_id = std::move(source_id);
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const auto& rec = doc[i];
    auto bad = [&](const std::string& why) {
      return InputError(scene.source_id + ": record " + std::to_string(i) + ": " + why);
    };
    if (!rec.is_object()) throw bad("not an object");
    if (!rec.contains("box") || !rec["box"].is_array() || rec["box"].size() != 4) {
      throw bad("'box' must be a list of 4 numbers");
    }
    if (!rec.contains("caption") || !rec["caption"].is_string()) {
      throw bad("'caption' must be a string");
    }
    BoundingBox box;
    double* fields[] = {&box.x, &box.y, &box.w, &box.h};
    for (std::size_t k = 0; k < 4; ++k) {
      if (!rec["box"][k].is_number()) throw bad("'box' must be a list of 4 numbers");
      *fields[k] = rec["box"][k].get<double>();
    }
    if (!box.valid()) {
      std::cerr << "warning: " << scene.source_id << ": record " << i
                << " rejected (non-positive box size)\n";
      ++scene.rejected;
      continue;
    }
    SceneCaption c;
    c.scene_index = scene.captions.size();
    c.box = box;
    c.caption = rec["caption"].get<std::string>();
    c.tokens = tokenize(c.caption);
    if (rec.contains("confidence")) {
      if (!rec["confidence"].is_number()) throw bad("'confidence' must be a number");
      c.confidence = rec["confidence"].get<double>();
    }
    if (rec.contains("labels")) {
      if (!rec["labels"].is_array()) throw bad("'labels' must be a list");
      std::vector<SemanticClass> labels;
      for (const auto& l : rec["labels"]) {
        auto cls = l.is_string() ? semantic_class_from_string(l.get<std::string>()) : std::nullopt;
        if (!cls) throw bad("unknown semantic label in 'labels'");
        labels.push_back(*cls);
      }
      if (labels.size() != c.tokens.size()) {
        throw bad("'labels' has " + std::to_string(labels.size()) + " entries for " +
                  std::to_string(c.tokens.size()) + " tokens");
      }
      c.annotated_labels = std::move(labels);
    }
    scene.captions.push_back(std::move(c));
  }
  return scene;
}

Scene load_scene(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read scene file '" + path.string() + "'");
  return parse_scene(in, path.string());
}

void write_scene(std::ostream& out, const Scene& scene, bool with_labels) {
  nlohmann::json doc = nlohmann::json::array();
  for (const auto& c : scene.captions) {
    nlohmann::json rec;
    rec["box"] = {c.box.x, c.box.y, c.box.w, c.box.h};
    rec["caption"] = c.caption;
    if (c.confidence) rec["confidence"] = *c.confidence;
    if (with_labels) {
      const auto* labels = c.annotated_labels ? &*c.annotated_labels
                                              : (c.parsed ? &c.semantic_labels : nullptr);
      if (labels) {
        auto arr = nlohmann::json::array();
        for (auto l : *labels) arr.push_back(std::string(to_string(l)));
        rec["labels"] = std::move(arr);
      }
    }
    doc.push_back(std::move(rec));
  }
  out << doc.dump(1) << '\n';
}

void parse_captions(Scene& scene, const crf::CrfModel& semantic) {
  for (auto& c : scene.captions) {
    auto labeled = label_phrase(c.tokens, semantic);
    c.semantic_labels = std::move(labeled.semantic_labels);
    c.derive_entities();
    c.parsed = true;
  }
}

void apply_annotated_labels(Scene& scene) {
  for (std::size_t i = 0; i < scene.captions.size(); ++i) {
    auto& c = scene.captions[i];
    if (!c.annotated_labels) {
      throw InputError(scene.source_id + ": caption " + std::to_string(i) +
                       " has no annotated labels");
    }
    c.semantic_labels = *c.annotated_labels;
    c.derive_entities();
    c.parsed = true;
  }
}

}  // namespace ttr
