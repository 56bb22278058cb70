#include <doctest.h>

#include <random>
#include <sstream>

#include "support.hpp"
#include "ttr/error.hpp"
#include "ttr/scene.hpp"

using namespace ttr;

TEST_CASE("iou of two offset squares is 25/175") {
  const BoundingBox a{0, 0, 10, 10}, b{5, 5, 10, 10};
  CHECK(iou(a, b) == doctest::Approx(25.0 / 175.0));
  CHECK(iou(a, a) == doctest::Approx(1.0));
  CHECK(iou(a, BoundingBox{20, 20, 5, 5}) == 0.0);
  CHECK(iou(a, BoundingBox{10, 0, 5, 5}) == 0.0);  // touching edges
  CHECK(iou(a, BoundingBox{2, 2, 4, 4}) == doctest::Approx(16.0 / 100.0));
}

TEST_CASE("box union is the tight enclosing box") {
  std::mt19937 rng(9);
  std::uniform_real_distribution<double> pos(-50, 50), len(0.5, 40);
  for (int i = 0; i < 500; ++i) {
    const BoundingBox a{pos(rng), pos(rng), len(rng), len(rng)};
    const BoundingBox b{pos(rng), pos(rng), len(rng), len(rng)};
    const BoundingBox u = box_union(a, b);
    const BoundingBox v = box_union(b, a);
    CHECK(u.x == v.x);
    CHECK(u.w == doctest::Approx(v.w));
    CHECK(u.x == std::min(a.x, b.x));
    CHECK(u.y == std::min(a.y, b.y));
    CHECK(u.x + u.w == doctest::Approx(std::max(a.x + a.w, b.x + b.w)));
    CHECK(u.y + u.h == doctest::Approx(std::max(a.y + a.h, b.y + b.h)));
    CHECK(u.area() >= std::max(a.area(), b.area()) - 1e-9);
    CHECK(iou(a, b) == doctest::Approx(iou(b, a)));
    CHECK(iou(a, b) >= 0.0);
    CHECK(iou(a, b) <= 1.0);
  }
}

TEST_CASE("scene documents: records, rejects and annotations") {
  std::istringstream in(R"([
    {"box": [0, 0, 10, 10], "caption": "a red cup", "confidence": 0.9,
     "labels": ["other", "attribute", "object"]},
    {"box": [5, 5, 0, 10], "caption": "degenerate"},
    {"box": [1, 2, 3, 4], "caption": "a lamp"}
  ])");
  Scene s = parse_scene(in, "mem");
  REQUIRE(s.captions.size() == 2);
  CHECK(s.rejected == 1);
  CHECK(s.captions[0].confidence == 0.9);
  CHECK(s.captions[1].scene_index == 1);
  CHECK(s.captions[1].box == BoundingBox{1, 2, 3, 4});
  CHECK(s.captions[0].annotated_labels.has_value());
  CHECK_THROWS_AS(apply_annotated_labels(s), InputError);  // second record has none

  std::stringstream out;
  s.captions.pop_back();
  write_scene(out, s, true);
  Scene back = parse_scene(out, "round-trip");
  apply_annotated_labels(back);
  CHECK(back.captions[0].caption == "a red cup");
  CHECK(back.captions[0].attribute_tokens == std::vector<std::string>{"red"});
  CHECK(back.captions[0].parsed);
}

TEST_CASE("malformed scene documents") {
  auto parse = [](const char* text) {
    std::istringstream in(text);
    return parse_scene(in, "bad");
  };
  CHECK_THROWS_AS(parse("{"), InputError);
  CHECK_THROWS_AS(parse("{}"), InputError);
  CHECK_THROWS_AS(parse(R"([{"box": [0, 0, 1], "caption": "x"}])"), InputError);
  CHECK_THROWS_AS(parse(R"([{"box": [0, 0, 1, 1]}])"), InputError);
  CHECK_THROWS_AS(parse(R"([{"box": [0, 0, 1, "a"], "caption": "x"}])"), InputError);
  CHECK_THROWS_AS(parse(R"([{"box": [0, 0, 1, 1], "caption": "a cup", "labels": ["object"]}])"),
                  InputError);
  CHECK(parse("[]").captions.empty());
  CHECK_THROWS_AS(load_scene("/nonexistent/scene.json"), InputError);
}

TEST_CASE("fixture scenes load and the tagger labels every caption") {
  Scene s = load_scene(ttr::testing::fixture("aa.json"));
  CHECK(s.captions.size() == 3);
  parse_captions(s, ttr::testing::world().models.semantic);
  for (const auto& c : s.captions) {
    CHECK(c.parsed);
    CHECK(c.semantic_labels.size() == c.tokens.size());
  }
  CHECK(s.captions[0].object_key() == "lamp");
  CHECK(s.captions[0].attribute_tokens == std::vector<std::string>{"red"});
}
