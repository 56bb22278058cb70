#include <doctest.h>

#include <random>
#include <set>

#include "random_scene.hpp"
#include "state_oracle.hpp"
#include "support.hpp"
#include "ttr/disambiguation.hpp"
#include "ttr/eval.hpp"
#include "ttr/similarity.hpp"

using namespace ttr;
using namespace ttr::testing;

namespace {

std::set<std::string> attrs_of(const LabeledPhrase& p) {
  return {p.attribute_tokens.begin(), p.attribute_tokens.end()};
}

std::size_t relevant_count(const RandomCase& rc, double alpha) {
  std::size_t n = 0;
  for (const auto& c : rc.ranked) n += *c.relevance > alpha ? 1 : 0;
  return n;
}

}  // namespace

TEST_CASE("state names") {
  for (auto s : kAmbiguityStates) CHECK(ambiguity_state_from_string(to_string(s)) == s);
  CHECK_FALSE(ambiguity_state_from_string("nq"));
}

TEST_CASE("decision procedure matches the hand-written rules on every toy configuration") {
  std::size_t checked = 0;
  for (const auto& cfg : toy_configurations()) {
    for (const auto& arg_attrs : toy_argument_attributes()) {
      CandidateSet set;
      set.argument = toy_argument("cup", arg_attrs);
      for (std::size_t i = 0; i < cfg.size(); ++i) set.candidates.push_back(toy_caption(cfg[i], i));
      const auto expected = oracle_state("cup", arg_attrs, cfg);
      const auto got = identify_state(set);
      CAPTURE(checked);
      REQUIRE(got.state == expected.state);
      REQUIRE(got.matched_candidates.size() == expected.matched.size());
      for (std::size_t k = 0; k < expected.matched.size(); ++k) {
        CHECK(got.matched_candidates[k].scene_index == expected.matched[k]);
      }
      // Outcome invariants.
      if (got.state == AmbiguityState::NQ || got.state == AmbiguityState::IMA) {
        CHECK(got.matched_candidates.size() == 1);
      }
      if (got.state == AmbiguityState::AA || got.state == AmbiguityState::AOA) {
        CHECK(got.matched_candidates.size() >= 2);
      }
      if (got.state == AmbiguityState::NF) CHECK(got.matched_candidates.empty());
      ++checked;
    }
  }
  CHECK(checked == 4 * 2 * (1 + 4 + 16 + 64));
}

TEST_CASE("documented decision examples") {
  auto run = [](std::set<std::string> arg, std::vector<ToyCandidate> cands, std::string object = "cup") {
    CandidateSet set;
    set.argument = toy_argument(object, arg);
    for (std::size_t i = 0; i < cands.size(); ++i) set.candidates.push_back(toy_caption(cands[i], i));
    return identify_state(set);
  };
  CHECK(run({"red"}, {}).state == AmbiguityState::NF);
  CHECK(run({}, {{"cup", {"red"}}}).state == AmbiguityState::IMA);
  CHECK(run({"red"}, {{"cup", {"blue"}}}).state == AmbiguityState::AM);
  CHECK(run({"red"}, {{"cup", {}}}).state == AmbiguityState::ANF);
  const auto aa = run({}, {{"lamp", {"red"}}, {"lamp", {"white"}}}, "lamp");
  CHECK(aa.state == AmbiguityState::AA);
  CHECK(aa.slot_values.at("attribute-1") == "red");
  CHECK(aa.slot_values.at("attribute-2") == "white");
  const auto aoa = run({"green"}, {{"bottle", {"green"}}, {"bottle", {"green"}}, {"bottle", {"green"}}},
                       "bottle");
  CHECK(aoa.state == AmbiguityState::AOA);
  CHECK(aoa.slot_values.at("#num") == "3");
  const auto nq = run({"blue"}, {{"pillow", {"blue"}}, {"pillow", {"yellow"}}}, "pillow");
  CHECK(nq.state == AmbiguityState::NQ);
  REQUIRE(nq.matched_candidates.size() == 1);
  CHECK(nq.matched_candidates[0].attribute_tokens == std::vector<std::string>{"blue"});
}

TEST_CASE("bitmask decision agrees with identify_state") {
  const std::vector<std::string> alphabet = {"red", "blue"};
  auto mask = [&](const std::set<std::string>& s) {
    std::uint64_t m = 0;
    for (std::size_t i = 0; i < alphabet.size(); ++i) m |= s.contains(alphabet[i]) ? (1u << i) : 0u;
    return m;
  };
  for (const auto& cfg : toy_configurations()) {
    for (const auto& arg_attrs : toy_argument_attributes()) {
      CandidateSet set;
      set.argument = toy_argument("cup", arg_attrs);
      std::vector<detail::CandidateBits> bits;
      for (std::size_t i = 0; i < cfg.size(); ++i) {
        set.candidates.push_back(toy_caption(cfg[i], i));
        bits.push_back({cfg[i].object == "cup", mask(cfg[i].attributes)});
      }
      CHECK(detail::decide_state(bits, true, mask(arg_attrs)) == identify_state(set).state);
    }
  }
  CHECK(detail::decide_state({}, false, 0) == AmbiguityState::NF);
}

TEST_CASE("overlapping same-object captions merge attributes and union boxes") {
  EmbeddingTable t(3);
  t.insert("cup", std::vector<float>{1, 0, 0});
  t.insert("red", std::vector<float>{0, 1, 0});
  t.insert("table", std::vector<float>{0, 0, 1});
  Scene s;
  SceneCaption a, b;
  static_cast<LabeledPhrase&>(a) = phrase("a/other red/attribute cup/object");
  static_cast<LabeledPhrase&>(b) = phrase("a/other cup/object on/other the/other table/spatial_landmark");
  a.box = BoundingBox{0, 0, 100, 100};
  b.box = BoundingBox{5, 5, 100, 100};
  b.scene_index = 1;
  s.captions = {a, b};
  const auto arg = phrase("the/other red/attribute cup/object");
  const PipelineConfig cfg;
  const auto ranked = rank_captions(arg, s, t, cfg.weights);
  REQUIRE(ranked[0].scene_index == 0);
  const auto set = suppress_redundancy(ranked, arg, cfg.cutoffs, t, cfg.weights);
  REQUIRE(set.candidates.size() == 1);
  const auto& c = set.candidates[0];
  CHECK(c.object_key() == "cup");
  CHECK(c.attribute_tokens == std::vector<std::string>{"red"});
  CHECK(c.landmark_tokens.empty());
  CHECK(c.box == box_union(a.box, b.box));
  CHECK(identify_state(set).state == AmbiguityState::NQ);

  // Disjoint instances stay separate.
  s.captions[1].box = BoundingBox{300, 0, 50, 50};
  const auto apart = suppress_redundancy(rank_captions(arg, s, t, cfg.weights), arg, cfg.cutoffs, t, cfg.weights);
  CHECK(apart.candidates.size() == 2);

  // Only captions above the relevance cutoff survive.
  SceneCaption low;
  static_cast<LabeledPhrase&>(low) = phrase("a/other table/object");
  low.scene_index = 2;
  low.box = BoundingBox{600, 0, 10, 10};
  s.captions.push_back(low);
  const auto pruned = suppress_redundancy(rank_captions(arg, s, t, cfg.weights), arg, cfg.cutoffs, t, cfg.weights);
  CHECK(pruned.candidates.size() == 2);
}

TEST_CASE("overlapping different-object captions are dropped") {
  std::vector<SceneCaption> owned(2);
  static_cast<LabeledPhrase&>(owned[0]) = phrase("a/other cup/object");
  static_cast<LabeledPhrase&>(owned[1]) = phrase("a/other mug/object");
  owned[0].box = BoundingBox{0, 0, 10, 10};
  owned[1].box = BoundingBox{1, 1, 10, 10};
  const std::vector<const SceneCaption*> ranked = {&owned[0], &owned[1]};
  const std::vector<double> rel = {0.9, 0.8};
  const auto groups = suppress_groups(ranked, rel, Cutoffs{0.5, 0.5}, [](std::size_t, std::size_t) { return 0.9; });
  REQUIRE(groups.size() == 1);
  CHECK(groups[0].dropped == std::vector<std::size_t>{1});
  CHECK(groups[0].merged.empty());
  CHECK(groups[0].box == owned[0].box);
}

TEST_CASE("redundancy invariants on random scenes") {
  const auto& table = world().table;
  std::mt19937 rng(2024);
  for (int trial = 0; trial < 1000; ++trial) {
    CAPTURE(trial);
    const RandomCase rc = random_case(rng, table);
    const auto set = suppress_redundancy(rc.ranked, rc.argument, rc.cutoffs, table, rc.weights);

    // Idempotence.
    const auto again = suppress_redundancy(set.candidates, rc.argument, rc.cutoffs, table, rc.weights);
    REQUIRE(again.candidates.size() == set.candidates.size());
    for (std::size_t i = 0; i < set.candidates.size(); ++i) {
      CHECK(again.candidates[i].scene_index == set.candidates[i].scene_index);
      CHECK(again.candidates[i].box == set.candidates[i].box);
      CHECK(again.candidates[i].attribute_tokens == set.candidates[i].attribute_tokens);
    }

    // Merging only adds attributes; every candidate cleared the cutoff.
    for (const auto& c : set.candidates) {
      const auto& original = *std::find_if(rc.ranked.begin(), rc.ranked.end(),
                                           [&](const SceneCaption& r) { return r.scene_index == c.scene_index; });
      const auto before = attrs_of(original), after = attrs_of(c);
      CHECK(std::includes(after.begin(), after.end(), before.begin(), before.end()));
      CHECK(*c.relevance > rc.cutoffs.alpha);
    }

    // Fixpoint: no two candidates meet both cutoffs.
    for (std::size_t i = 0; i < set.candidates.size(); ++i) {
      for (std::size_t j = i + 1; j < set.candidates.size(); ++j) {
        const double f = cosine(encode_phrase(set.candidates[i], table, rc.weights),
                                encode_phrase(set.candidates[j], table, rc.weights));
        CHECK_FALSE((iou(set.candidates[i].box, set.candidates[j].box) > rc.cutoffs.beta &&
                     f > rc.cutoffs.alpha));
      }
    }

    // Raising alpha never grows the relevant set.
    std::size_t prev = relevant_count(rc, 0.0);
    for (double a = 0.05; a < 1.0; a += 0.05) {
      const std::size_t cur = relevant_count(rc, a);
      CHECK(cur <= prev);
      prev = cur;
    }
  }
}

TEST_CASE("raising beta can merge a chain that a lower beta split") {
  // Unit-height strips: A is a cup, B a bottle, C a plate, D a second cup
  // caption that widens A's box after B has already been judged.
  std::vector<SceneCaption> owned(4);
  const char* texts[] = {"cup/object", "bottle/object", "plate/object", "cup/object"};
  const BoundingBox boxes[] = {{0, 0, 10, 10}, {8, 0, 10, 10}, {15, 0, 10, 10}, {2, 0, 12, 10}};
  std::vector<const SceneCaption*> ranked;
  for (std::size_t i = 0; i < 4; ++i) {
    static_cast<LabeledPhrase&>(owned[i]) = phrase(texts[i]);
    owned[i].box = boxes[i];
    ranked.push_back(&owned[i]);
  }
  const std::vector<double> rel = {0.9, 0.8, 0.7, 0.6};
  const PairSimilarity same = [](std::size_t, std::size_t) { return 0.9; };
  CHECK(iou(boxes[0], boxes[1]) == doctest::Approx(2.0 / 18.0));
  CHECK(iou(boxes[1], boxes[2]) == doctest::Approx(3.0 / 17.0));

  // beta 0.10: A drops B at once; C never overlaps A's grown box.
  const auto low = suppress_groups(ranked, rel, Cutoffs{0.5, 0.10}, same);
  REQUIRE(low.size() == 2);
  CHECK(low[0].dropped == std::vector<std::size_t>{1});
  CHECK(low[0].merged == std::vector<std::size_t>{3});
  CHECK(low[1].kept == 2);

  // beta 0.15: B survives, drops C, and then overlaps A's grown box.
  const auto high = suppress_groups(ranked, rel, Cutoffs{0.5, 0.15}, same);
  REQUIRE(high.size() == 1);
  CHECK(high[0].merged == std::vector<std::size_t>{3});
  CHECK(high[0].dropped == std::vector<std::size_t>{1, 2});
}
