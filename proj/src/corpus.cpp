#include "ttr/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <random>
#include <set>
#include <sstream>
#include <tuple>

#include "ttr/error.hpp"
#include "ttr/instruction.hpp"

namespace ttr {

namespace {

using Rng = std::mt19937_64;
using Words = std::vector<std::string>;

const Words kColors = {"red",   "blue", "green",  "white",  "black", "yellow",
                       "orange", "pink", "purple", "brown", "grey"};
const Words kMaterials = {"wooden", "plastic", "metal", "glass", "ceramic", "leather", "cotton"};
const Words kSizes = {"small", "large", "big", "tiny"};
const Words kExtraAttributes = {"coffee", "striped"};
const Words kGraspables = {"cup",    "mug",   "bottle", "pillow", "book",   "bowl",
                           "plate",  "vase",  "remote", "phone",  "toilet paper",
                           "teddy bear", "apple", "box", "bag", "shoe", "towel", "clock",
                           "candle", "basket", "kettle", "jar", "container"};
const Words kDevices = {"lamp", "tv", "fan", "laptop", "radio", "heater"};
const Words kFurniture = {"table", "shelf", "counter", "desk", "sofa", "bed", "chair", "cabinet"};
const Words kSceneLandmarks = {"window", "floor", "wall", "sink", "door", "carpet"};
const Words kRooms = {"kitchen", "bedroom", "living room", "bathroom", "office", "dining room",
                      "hallway"};
const Words kPlacementSpots = {"table", "shelf", "counter", "desk"};
const Words kPrepositions = {"on", "near", "next to", "beside", "under", "by", "behind",
                             "in front of"};
const Words kCheckStates = {"on", "off", "open", "closed", "full"};
const Words kSwitchStates = {"on", "off"};

const std::map<TaskType, Words>& instruction_templates() {
  // "*w" evokes the task, "{role}" is an argument slot, other words are O.
  static const std::map<TaskType, Words> t = {
      {TaskType::Bringing,
       {"*bring {beneficiary} {object}", "*bring {object} to {beneficiary}",
        "*bring {beneficiary} {object} from {source}", "please *bring {object} to {beneficiary}",
        "*fetch {object} for {beneficiary}", "can you *bring {beneficiary} {object}",
        "*get {beneficiary} {object} from {source}",
        "*bring {object} from {source} to {beneficiary}"}},
      {TaskType::Taking,
       {"*take {object}", "*take {object} from {source}", "*pick *up {object}", "*grab {object}",
        "*pick *up {object} from {source}", "*take {object} to {destination}",
        "please *take {object}"}},
      {TaskType::Placing,
       {"*put {object} on {goal}", "*place {object} in {goal}", "*put {object} in {goal}",
        "*place {object} on {goal}", "please *put {object} on {goal}"}},
      {TaskType::Searching,
       {"*find {object}", "*look *for {object}", "*search *for {object} in {area}",
        "*find {object} in {area}", "*locate {object}", "can you *find {object}"}},
      {TaskType::CheckState,
       {"*check if {object} is {state}", "*see whether {object} is {state}",
        "*check whether {object} is {state}", "please *check if {object} is {state}"}},
      {TaskType::ChangeState,
       {"*turn {state} {device}", "*switch {state} {device}", "*turn {device} {state}",
        "please *turn {state} {device}", "*switch {device} {state}"}},
      {TaskType::Motion,
       {"*go to {goal}", "*move to {goal}", "*walk to {goal}", "please *go to {goal}"}},
  };
  return t;
}

template <class T>
const T& pick(const std::vector<T>& v, Rng& rng) {
  return v[std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(rng)];
}

double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

bool chance(Rng& rng, double p) { return uniform(rng, 0.0, 1.0) < p; }

bool starts_with_vowel(const std::string& w) {
  return !w.empty() && std::string_view("aeiou").find(w.front()) != std::string_view::npos;
}

// A token sequence under construction with parallel labels.
struct Builder {
  std::vector<TokenRow> rows;
  std::vector<std::string> labels;

  void add(const std::string& words, std::string_view label) {
    for (auto& w : split_whitespace(words)) {
      rows.emplace_back(std::move(w));
      labels.emplace_back(label);
    }
  }
  void add(const std::string& words, SemanticClass c) { add(words, to_string(c)); }
  std::string text() const { return join(surfaces(rows), " "); }
};

std::string article(const std::string& next, Rng& rng) {
  if (chance(rng, 0.3)) return "the";
  return starts_with_vowel(next) ? "an" : "a";
}

// Up to `count` distinct attributes, at most one per category.
Words random_attributes(Rng& rng, std::size_t count) {
  std::vector<const Words*> pools = {&kColors, &kMaterials, &kSizes, &kExtraAttributes};
  std::shuffle(pools.begin(), pools.end(), rng);
  // Colours dominate real descriptions; put them first most of the time.
  if (chance(rng, 0.7)) {
    auto it = std::find(pools.begin(), pools.end(), &kColors);
    std::rotate(pools.begin(), it, it + 1);
  }
  Words out;
  for (std::size_t i = 0; i < count && i < pools.size(); ++i) out.push_back(pick(*pools[i], rng));
  // Size words read first ("small red cup").
  std::stable_sort(out.begin(), out.end(), [](const std::string& a, const std::string& b) {
    auto is_size = [](const std::string& w) {
      return std::find(kSizes.begin(), kSizes.end(), w) != kSizes.end();
    };
    return is_size(a) && !is_size(b);
  });
  return out;
}

struct CaptionSpec {
  std::string object;
  Words attributes;
  std::string landmark;  // empty for none
};

Builder make_caption(const CaptionSpec& spec, Rng& rng) {
  const auto& attrs = spec.attributes;
  std::vector<int> forms = {0};
  if (!spec.landmark.empty()) forms.push_back(1);
  if (!attrs.empty() && attrs.size() <= 2) forms.push_back(2);
  if (!attrs.empty()) forms.push_back(3);
  if (attrs.size() == 2) forms.push_back(4);
  if (attrs.size() == 1 && !spec.landmark.empty()) forms.push_back(5);

  Builder b;
  auto add_attrs = [&] {
    for (const auto& a : attrs) b.add(a, SemanticClass::Attribute);
  };
  auto add_landmark = [&] {
    b.add(pick(kPrepositions, rng), SemanticClass::Other);
    b.add("the", SemanticClass::Other);
    b.add(spec.landmark, SemanticClass::SpatialLandmark);
  };
  switch (pick(forms, rng)) {
    case 0:
      b.add(article(attrs.empty() ? spec.object : attrs.front(), rng), SemanticClass::Other);
      add_attrs();
      b.add(spec.object, SemanticClass::Object);
      break;
    case 1:
      b.add(article(attrs.empty() ? spec.object : attrs.front(), rng), SemanticClass::Other);
      add_attrs();
      b.add(spec.object, SemanticClass::Object);
      add_landmark();
      break;
    case 2:
      b.add("the", SemanticClass::Other);
      b.add(spec.object, SemanticClass::Object);
      b.add("is", SemanticClass::Other);
      b.add(attrs[0], SemanticClass::Attribute);
      if (attrs.size() == 2) {
        b.add("and", SemanticClass::Other);
        b.add(attrs[1], SemanticClass::Attribute);
      }
      break;
    case 3:
      add_attrs();
      b.add(spec.object, SemanticClass::Object);
      break;
    case 4:
      b.add(attrs[0], SemanticClass::Attribute);
      b.add("and", SemanticClass::Other);
      b.add(attrs[1], SemanticClass::Attribute);
      b.add(spec.object, SemanticClass::Object);
      break;
    default:
      b.add("the", SemanticClass::Other);
      b.add(spec.object, SemanticClass::Object);
      add_landmark();
      b.add("is", SemanticClass::Other);
      b.add(attrs[0], SemanticClass::Attribute);
      break;
  }
  return b;
}

std::string random_landmark(Rng& rng) {
  return chance(rng, 0.6) ? pick(kFurniture, rng) : pick(kSceneLandmarks, rng);
}

Words all_objects() {
  Words out = kGraspables;
  out.insert(out.end(), kDevices.begin(), kDevices.end());
  out.insert(out.end(), kFurniture.begin(), kFurniture.end());
  return out;
}

crf::LabeledSequence to_sequence(Builder b) { return {std::move(b.rows), std::move(b.labels)}; }

// Argument phrase "the [attrs] object" with semantic labels.
Builder object_phrase(const std::string& object, const Words& attrs, Rng& rng) {
  Builder b;
  b.add(chance(rng, 0.85) ? "the" : "my", SemanticClass::Other);
  for (const auto& a : attrs) b.add(a, SemanticClass::Attribute);
  b.add(object, SemanticClass::Object);
  return b;
}

std::string location_for(std::string_view role, Rng& rng) {
  if (role == "source") return chance(rng, 0.5) ? pick(kRooms, rng) : pick(kPlacementSpots, rng);
  if (role == "goal") return chance(rng, 0.5) ? pick(kRooms, rng) : pick(kPlacementSpots, rng);
  return pick(kRooms, rng);
}

struct Instruction {
  Builder task;       // task labels
  Builder argument;   // role labels
  Builder grounding;  // semantic labels of the grounding argument
};

// Expands one template. `grounding` fills the object/device slot when
// given; otherwise a random phrase is drawn.
Instruction expand(TaskType type, const std::string& tmpl, Rng& rng,
                   const Builder* grounding) {
  Instruction out;
  const std::string task_label(to_string(type));
  for (const auto& part : split_whitespace(tmpl)) {
    if (part.front() == '*') {
      out.task.add(part.substr(1), task_label);
      out.argument.add(part.substr(1), kOutsideLabel);
      continue;
    }
    if (part.front() != '{') {
      out.task.add(part, kOutsideLabel);
      out.argument.add(part, kOutsideLabel);
      continue;
    }
    const std::string role = part.substr(1, part.size() - 2);
    std::string words;
    if (role == "object" || role == "device") {
      Builder phrase;
      if (grounding) {
        phrase = *grounding;
      } else {
        const std::string obj = role == "device" ? pick(kDevices, rng)
                                : chance(rng, 0.8) ? pick(kGraspables, rng)
                                                   : pick(kDevices, rng);
        phrase = object_phrase(obj, random_attributes(rng, chance(rng, 0.5) ? 0 : 1 + chance(rng, 0.3)),
                               rng);
      }
      out.grounding = phrase;
      words = phrase.text();
    } else if (role == "beneficiary") {
      words = chance(rng, 0.9) ? "me" : "us";
    } else if (role == "state") {
      words = type == TaskType::ChangeState ? pick(kSwitchStates, rng) : pick(kCheckStates, rng);
    } else {
      words = "the " + location_for(role, rng);
    }
    out.task.add(words, kOutsideLabel);
    out.argument.add(words, role);
  }
  return out;
}

// Layout: the image is a 4x3 grid of 160-pixel cells; every object
// instance or distractor gets its own cell, so they never overlap.
struct Layout {
  std::vector<std::pair<double, double>> cells;
  std::size_t next = 0;

  explicit Layout(Rng& rng) {
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 4; ++c) cells.emplace_back(c * 160.0, r * 160.0);
    }
    std::shuffle(cells.begin(), cells.end(), rng);
  }

  BoundingBox place(Rng& rng) {
    const auto [cx, cy] = cells.at(next++);
    const double w = std::round(uniform(rng, 60.0, 110.0));
    const double h = std::round(uniform(rng, 60.0, 110.0));
    return {std::round(cx + uniform(rng, 15.0, 145.0 - w)),
            std::round(cy + uniform(rng, 15.0, 145.0 - h)), w, h};
  }
};

// A box near `base` whose IoU with it falls in [lo, hi].
BoundingBox jitter(const BoundingBox& base, double lo, double hi, double shift, Rng& rng) {
  for (int attempt = 0; attempt < 200; ++attempt) {
    BoundingBox b{std::round(base.x + uniform(rng, -shift, shift) * base.w),
                  std::round(base.y + uniform(rng, -shift, shift) * base.h),
                  std::round(base.w * uniform(rng, 0.9, 1.1)),
                  std::round(base.h * uniform(rng, 0.9, 1.1))};
    const double v = iou(base, b);
    if (v >= lo && v <= hi) return b;
  }
  return base;
}

struct SceneBuilder {
  Scene scene;
  Rng& rng;

  void add(const Builder& caption, const BoundingBox& box) {
    SceneCaption c;
    c.scene_index = scene.captions.size();
    c.box = box;
    c.tokens = caption.rows;
    c.caption = caption.text();
    c.confidence = std::round(uniform(rng, 0.5, 1.0) * 1000.0) / 1000.0;
    std::vector<SemanticClass> labels;
    for (const auto& l : caption.labels) labels.push_back(*semantic_class_from_string(l));
    c.annotated_labels = labels;
    scene.captions.push_back(std::move(c));
  }

  // One physical object: a full caption and redundant partial ones.
  BoundingBox add_instance(const std::string& object, const Words& attrs, const BoundingBox& box) {
    add(make_caption({object, attrs, chance(rng, 0.5) ? random_landmark(rng) : ""}, rng), box);
    const int redundant = std::uniform_int_distribution<int>(0, 2)(rng);
    for (int r = 0; r < redundant; ++r) {
      Words subset;
      for (const auto& a : attrs) {
        if (chance(rng, 0.5)) subset.push_back(a);
      }
      add(make_caption({object, subset, chance(rng, 0.5) ? random_landmark(rng) : ""}, rng),
          jitter(box, 0.65, 0.95, 0.06, rng));
    }
    return box;
  }
};

std::string other_than(const Words& pool, const Words& exclude, Rng& rng) {
  Words options;
  for (const auto& w : pool) {
    if (std::find(exclude.begin(), exclude.end(), w) == exclude.end()) options.push_back(w);
  }
  return pick(options, rng);
}

}  // namespace

std::vector<crf::LabeledSequence> generate_semantic_corpus(std::uint64_t seed, std::size_t size) {
  Rng rng(seed * 0x9E3779B97F4A7C15ULL + 11);
  const Words objects = all_objects();
  std::vector<crf::LabeledSequence> out;
  while (out.size() < size) {
    const double r = uniform(rng, 0.0, 1.0);
    Builder b;
    if (r < 0.6) {
      const std::size_t n_attr = std::uniform_int_distribution<std::size_t>(0, 2)(rng);
      b = make_caption({pick(objects, rng), random_attributes(rng, n_attr),
                        chance(rng, 0.5) ? random_landmark(rng) : ""},
                       rng);
    } else if (r < 0.8) {
      const std::size_t n_attr = std::uniform_int_distribution<std::size_t>(0, 2)(rng);
      b = object_phrase(pick(objects, rng), random_attributes(rng, n_attr), rng);
    } else if (r < 0.88) {
      b.add(chance(rng, 0.8) ? "the" : "my", SemanticClass::Other);
      b.add(chance(rng, 0.5) ? pick(kRooms, rng) : pick(kFurniture, rng),
            SemanticClass::SpatialLandmark);
    } else if (r < 0.92) {
      b.add(chance(rng, 0.6) ? pick(Words{"me", "us"}, rng) : pick(kCheckStates, rng),
            SemanticClass::Other);
    } else {
      // Rephrase-style answers: "the red one", "the one near the window".
      b.add("the", SemanticClass::Other);
      const bool with_attr = chance(rng, 0.7);
      if (with_attr) b.add(pick(kColors, rng), SemanticClass::Attribute);
      b.add("one", SemanticClass::Other);
      if (!with_attr || chance(rng, 0.3)) {
        b.add(pick(kPrepositions, rng), SemanticClass::Other);
        b.add("the", SemanticClass::Other);
        b.add(random_landmark(rng), SemanticClass::SpatialLandmark);
      }
    }
    out.push_back(to_sequence(std::move(b)));
  }
  return out;
}

InstructionCorpus generate_instruction_corpus(std::uint64_t seed, std::size_t size) {
  Rng rng(seed * 0x9E3779B97F4A7C15ULL + 23);
  InstructionCorpus out;
  const auto& templates = instruction_templates();
  for (std::size_t i = 0; i < size; ++i) {
    const auto type = static_cast<TaskType>(i % kNumTaskTypes);
    Instruction ins = expand(type, pick(templates.at(type), rng), rng, nullptr);
    out.task.push_back(to_sequence(std::move(ins.task)));
    out.argument.push_back(to_sequence(std::move(ins.argument)));
  }
  return out;
}

StateDataset generate_state_dataset(std::uint64_t seed, std::size_t size) {
  if (size == 0) throw UsageError("state dataset size must be positive");
  Rng rng(seed * 0x9E3779B97F4A7C15ULL + 37);
  const std::vector<TaskType> tasks = {TaskType::Bringing,   TaskType::Taking,
                                       TaskType::Placing,    TaskType::Searching,
                                       TaskType::CheckState, TaskType::ChangeState};
  const auto& templates = instruction_templates();
  const Words objects = all_objects();

  StateDataset ds;
  for (std::size_t i = 0; i < size; ++i) {
    const AmbiguityState state = kAmbiguityStates[i % kAmbiguityStates.size()];
    const TaskType type = pick(tasks, rng);
    const std::string object =
        type == TaskType::ChangeState ? pick(kDevices, rng) : pick(kGraspables, rng);

    // Argument attribute (if any) and the attribute sets of the instances
    // of `object` in the scene, chosen so the state follows by definition.
    Words arg_attrs;
    std::vector<Words> instances;
    const std::string a = pick(kColors, rng);
    auto other_color = [&](const Words& not_these) { return other_than(kColors, not_these, rng); };
    auto maybe_material = [&](Words w) {
      if (chance(rng, 0.3)) w.push_back(pick(kMaterials, rng));
      return w;
    };
    switch (state) {
      case AmbiguityState::NQ: {
        const double r = uniform(rng, 0.0, 1.0);
        if (r < 0.4) {
          arg_attrs = {a};
          instances = {maybe_material({a})};
        } else if (r < 0.7) {
          instances = {{}};
        } else {
          arg_attrs = {a};
          instances = {{a}, {other_color({a})}};
        }
        break;
      }
      case AmbiguityState::IMA:
        instances = {maybe_material({a})};
        break;
      case AmbiguityState::AM:
        arg_attrs = {a};
        instances = {maybe_material({other_color({a})})};
        break;
      case AmbiguityState::ANF:
        arg_attrs = {a};
        instances = {{}};
        break;
      case AmbiguityState::AA: {
        const std::size_t n = chance(rng, 0.7) ? 2 : 3;
        Words used;
        if (chance(rng, 0.6)) {
          for (std::size_t k = 0; k < n; ++k) {
            used.push_back(other_color(used));
            instances.push_back({used.back()});
          }
        } else {
          arg_attrs = {a};
          used = {a};
          for (std::size_t k = 0; k < 2; ++k) {
            used.push_back(other_color(used));
            instances.push_back({used.back()});
          }
        }
        break;
      }
      case AmbiguityState::AOA: {
        const std::size_t n = chance(rng, 0.6) ? 2 : 3;
        const double r = uniform(rng, 0.0, 1.0);
        Words shared;
        if (r < 0.4) {
          shared = {a};
        } else if (r < 0.7) {
          arg_attrs = {a};
          shared = {a};
        }
        instances.assign(n, shared);
        break;
      }
      case AmbiguityState::NF:
        if (chance(rng, 0.5)) arg_attrs = {a};
        break;
    }

    // Instruction around the argument phrase.
    const Builder phrase = object_phrase(object, arg_attrs, rng);
    const std::string slot = type == TaskType::ChangeState ? "{device}" : "{object}";
    Words usable;
    for (const auto& t : templates.at(type)) {
      if (t.find(slot) != std::string::npos) usable.push_back(t);
    }
    Instruction ins = expand(type, pick(usable, rng), rng, &phrase);

    // Scene: instances, distractors, and maybe one overlapping distractor.
    SceneBuilder sb{Scene{}, rng};
    sb.scene.source_id = "scene-" + std::to_string(i);
    Layout layout(rng);
    std::vector<BoundingBox> instance_boxes;
    for (const auto& attrs : instances) {
      instance_boxes.push_back(sb.add_instance(object, attrs, layout.place(rng)));
    }
    const int distractors = std::uniform_int_distribution<int>(2, 4)(rng);
    for (int d = 0; d < distractors; ++d) {
      const std::string other = other_than(objects, {object}, rng);
      Words attrs = random_attributes(rng, std::uniform_int_distribution<std::size_t>(0, 2)(rng));
      if (!arg_attrs.empty() && chance(rng, 0.4)) attrs = {arg_attrs.front()};
      sb.add_instance(other, attrs, layout.place(rng));
    }
    if (!instance_boxes.empty() && chance(rng, 0.7)) {
      Words bulky = kFurniture;
      bulky.insert(bulky.end(), kDevices.begin(), kDevices.end());
      const std::string other = other_than(bulky, {object}, rng);
      Words attrs = {arg_attrs.empty() ? pick(kColors, rng) : arg_attrs.front()};
      sb.add(make_caption({other, attrs, ""}, rng),
             jitter(pick(instance_boxes, rng), 0.65, 0.9, 0.1, rng));
    }
    std::shuffle(sb.scene.captions.begin(), sb.scene.captions.end(), rng);
    for (std::size_t k = 0; k < sb.scene.captions.size(); ++k) sb.scene.captions[k].scene_index = k;

    StateExample ex;
    ex.instruction = ins.task.text();
    ex.gold = state;
    ex.annotated_argument = make_labeled_phrase(
        phrase.rows, [&] {
          std::vector<SemanticClass> labels;
          for (const auto& l : phrase.labels) labels.push_back(*semantic_class_from_string(l));
          return labels;
        }());
    ex.scene = std::move(sb.scene);
    ds.examples.push_back(std::move(ex));
  }
  return ds;
}

SyntheticCorpus generate_synthetic_corpus(std::uint64_t seed, std::size_t size) {
  return {generate_semantic_corpus(seed, kDefaultSemanticSequences),
          generate_instruction_corpus(seed, kDefaultInstructionSequences),
          generate_state_dataset(seed, size)};
}

namespace {

const Words kFunctionWords = {"a",    "an",   "the",  "is",     "and",  "of",     "with",
                              "to",   "from", "for",  "in",     "on",   "near",   "next",
                              "beside", "under", "by", "behind", "front", "me",   "us",
                              "my",   "it",   "one",  "ones",   "that", "this",   "please",
                              "can",  "you",  "if",   "whether", "now",  "up",    "thing"};
const Words kVerbs = {"bring", "take", "pick", "grab",   "fetch", "get",   "put",
                      "place", "find", "look", "search", "locate", "check", "see",
                      "turn",  "switch", "go", "move",   "walk"};
const Words kStateWords = {"off", "open", "closed", "full"};
const Words kAnswerWords = {"yes",  "yeah",  "ok",    "okay",  "sure",  "continue", "right",
                            "no",   "nope",  "don't", "stop",  "abort", "cancel",   "never",
                            "mind", "nevermind"};

Words expand_tokens(const Words& phrases) {
  Words out;
  for (const auto& p : phrases) {
    for (auto& w : split_whitespace(p)) out.push_back(std::move(w));
  }
  return out;
}

}  // namespace

std::vector<std::string> synthetic_vocabulary() {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const Words* group :
       {&kFunctionWords, &kColors, &kMaterials, &kSizes, &kExtraAttributes, &kGraspables,
        &kDevices, &kFurniture, &kSceneLandmarks, &kRooms, &kPrepositions, &kVerbs, &kStateWords,
        &kAnswerWords}) {
    for (const auto& w : expand_tokens(*group)) {
      if (seen.insert(w).second) out.push_back(w);
    }
  }
  return out;
}

WordVectors synthetic_word_vectors(std::uint64_t seed, std::size_t dimension) {
  if (dimension == 0) throw UsageError("embedding dimension must be positive");
  Rng rng(seed * 0x9E3779B97F4A7C15ULL + 51);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto random_unit = [&] {
    std::vector<double> v(dimension);
    double n = 0.0;
    for (auto& x : v) {
      x = normal(rng);
      n += x * x;
    }
    for (auto& x : v) x /= std::sqrt(n);
    return v;
  };
  std::map<std::string, std::vector<double>> centroids;
  for (const char* name : {"func", "attr", "color", "material", "size", "obj", "device",
                           "furniture", "place", "verb", "state", "answer"}) {
    centroids[name] = random_unit();
  }

  using Mix = std::vector<std::pair<std::string, double>>;
  std::map<std::string, std::pair<Mix, double>> recipe;  // token -> (centroids, own weight)
  auto assign = [&](const Words& group, const Mix& mix, double own) {
    for (const auto& w : expand_tokens(group)) {
      if (!recipe.contains(w)) recipe[w] = {mix, own};
    }
  };
  assign(kFunctionWords, {{"func", 0.6}}, 0.8);
  assign(kPrepositions, {{"func", 0.6}}, 0.8);
  assign(kColors, {{"attr", 0.3}, {"color", 0.7}}, 0.65);
  assign(kMaterials, {{"attr", 0.3}, {"material", 0.6}}, 0.75);
  assign(kSizes, {{"attr", 0.3}, {"size", 0.7}}, 0.65);
  assign(kExtraAttributes, {{"attr", 0.3}}, 0.95);
  assign(kGraspables, {{"obj", 0.45}}, 0.9);
  assign(kDevices, {{"obj", 0.35}, {"device", 0.5}}, 0.8);
  assign(kFurniture, {{"obj", 0.3}, {"furniture", 0.6}}, 0.75);
  assign(kSceneLandmarks, {{"place", 0.4}, {"furniture", 0.3}}, 0.85);
  assign(kRooms, {{"place", 0.7}}, 0.7);
  assign(kVerbs, {{"verb", 0.6}}, 0.8);
  assign(kStateWords, {{"state", 0.6}}, 0.8);
  assign(kAnswerWords, {{"answer", 0.5}}, 0.85);

  // Near-synonyms lean on their partner's vector.
  const std::vector<std::tuple<std::string, std::string, double>> related = {
      {"mug", "cup", 0.85}, {"basket", "bag", 0.5}, {"remote", "phone", 0.4},
      {"jar", "bottle", 0.4},  {"big", "large", 0.8},  {"tiny", "small", 0.8}};

  std::map<std::string, std::vector<double>> vectors;
  for (const auto& token : synthetic_vocabulary()) {
    const auto& [mix, own] = recipe.at(token);
    std::vector<double> v = random_unit();
    for (auto& x : v) x *= own;
    for (const auto& [name, weight] : mix) {
      for (std::size_t k = 0; k < dimension; ++k) v[k] += weight * centroids[name][k];
    }
    vectors[token] = std::move(v);
  }
  for (const auto& [token, partner, weight] : related) {
    auto& v = vectors[token];
    const auto& p = vectors[partner];
    const double rest = std::sqrt(1.0 - weight * weight);
    for (std::size_t k = 0; k < dimension; ++k) v[k] = weight * p[k] + rest * v[k];
  }

  WordVectors out;
  for (const auto& token : synthetic_vocabulary()) {
    auto& v = vectors[token];
    double n = 0.0;
    for (double x : v) n += x * x;
    const double scale = uniform(rng, 0.9, 1.1) / std::sqrt(n);
    std::vector<float> f(dimension);
    for (std::size_t k = 0; k < dimension; ++k) {
      f[k] = static_cast<float>(std::round(v[k] * scale * 1e6) / 1e6);
    }
    out.emplace_back(token, std::move(f));
  }
  return out;
}

EmbeddingTable make_table(const WordVectors& vectors, std::size_t dimension) {
  EmbeddingTable table(dimension);
  for (const auto& [token, v] : vectors) table.insert(token, v);
  return table;
}

void write_word_vectors(std::ostream& out, const WordVectors& vectors) {
  out << std::setprecision(6);
  for (const auto& [token, v] : vectors) {
    out << token;
    for (float x : v) out << ' ' << x;
    out << '\n';
  }
}

void write_corpus(const std::filesystem::path& dir, SyntheticCorpus& corpus) {
  std::filesystem::create_directories(dir / "scenes");
  auto write_seqs = [&](const std::string& name, const std::vector<crf::LabeledSequence>& seqs) {
    std::ofstream out(dir / name);
    if (!out) throw InputError("cannot write " + (dir / name).string());
    crf::write_sequences(out, seqs);
  };
  write_seqs("semantic.tsv", corpus.semantic);
  write_seqs("task.tsv", corpus.instructions.task);
  write_seqs("argument.tsv", corpus.instructions.argument);

  for (std::size_t i = 0; i < corpus.states.examples.size(); ++i) {
    auto& ex = corpus.states.examples[i];
    std::ostringstream name;
    name << "scenes/scene-" << std::setw(4) << std::setfill('0') << i << ".json";
    if (ex.scene) {
      std::ofstream out(dir / name.str());
      if (!out) throw InputError("cannot write " + (dir / name.str()).string());
      write_scene(out, *ex.scene, true);
    }
    ex.scene_path = name.str();
  }
  std::ofstream out(dir / "states.tsv");
  if (!out) throw InputError("cannot write " + (dir / "states.tsv").string());
  write_state_dataset(out, corpus.states);
}

}  // namespace ttr
