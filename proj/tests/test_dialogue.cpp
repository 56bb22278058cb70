#include <doctest.h>

#include <random>
#include <regex>
#include <sstream>

#include "fixture_cases.hpp"
#include "ttr/error.hpp"

using namespace ttr;
using namespace ttr::testing;

namespace {

AmbiguityOutcome outcome(AmbiguityState s, std::map<std::string, std::string> slots) {
  AmbiguityOutcome o;
  o.state = s;
  o.slot_values = std::move(slots);
  return o;
}

bool in_candidates(const Session& s, const SceneCaption& c) {
  for (const auto& k : s.grounding.candidates.candidates) {
    if (k.scene_index == c.scene_index && k.box == c.box) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("question templates fill exactly") {
  CHECK(generate_question(outcome(AmbiguityState::AA, {{"attribute-1", "red"}, {"attribute-2", "white"},
                                                       {"object", "lamp"}})) ==
        "I see a red lamp and a white lamp. Which one did you mean?");
  CHECK(generate_question(outcome(AmbiguityState::AOA, {{"#num", "3"}, {"attribute", "green"}, {"object", "bottle"}})) ==
        "I see 3 green bottles. Which one did you mean?");
  CHECK(generate_question(outcome(AmbiguityState::AOA, {{"#num", "2"}, {"attribute", ""}, {"object", "cup"}})) ==
        "I see 2 cups. Which one did you mean?");
  CHECK(generate_question(outcome(AmbiguityState::NF, {{"attribute", "red"}, {"object", "cup"}})) ==
        "I can't find any red cup. What should I do?");
  CHECK(generate_question(outcome(AmbiguityState::NF, {{"attribute", ""}, {"object", "cup"}})) ==
        "I can't find any cup. What should I do?");
  CHECK(generate_question(outcome(AmbiguityState::IMA, {{"attribute", "red"}, {"object", "cup"}})) ==
        "I see a red cup. Should I continue?");
  CHECK(generate_question(outcome(AmbiguityState::AM, {{"attribute", "blue"}, {"object", "cup"}})) ==
        "I see a cup, but its blue. Should I continue?");
  CHECK(generate_question(outcome(AmbiguityState::ANF, {{"attribute", "red"}, {"object", "cup"}})) ==
        "I see a cup, but not sure if it’s red. Should I continue?");
}

TEST_CASE("every question state has a template and NQ has none") {
  for (auto s : kAmbiguityStates) {
    if (s == AmbiguityState::NQ) {
      CHECK_THROWS_AS(question_template(s), UsageError);
    } else {
      CHECK(question_template(s).state == s);
    }
  }
  try {
    generate_question(outcome(AmbiguityState::AA, {{"attribute-1", "red"}, {"object", "lamp"}}));
    FAIL("expected InputError");
  } catch (const InputError& e) {
    CHECK(std::string(e.what()).find("attribute-2") != std::string::npos);
    CHECK(std::string(e.what()).find("AA") != std::string::npos);
  }
  CHECK_THROWS_AS(generate_question(outcome(AmbiguityState::IMA, {{"attribute", ""}, {"object", "cup"}})),
                  InputError);
}

TEST_CASE("answers: lexicons, choices and rephrases") {
  Session aa = fixture_session(kFixtureCases[1]);
  REQUIRE(aa.pending.state == AmbiguityState::AA);
  const auto& o = aa.pending;
  CHECK(parse_answer("yes", o).kind == Answer::Kind::Affirm);
  CHECK(parse_answer("Sure, go ahead", o).kind == Answer::Kind::Affirm);
  CHECK(parse_answer("no", o).kind == Answer::Kind::Deny);
  CHECK(parse_answer("Don't", o).kind == Answer::Kind::Deny);
  CHECK(parse_answer("   ", o).kind == Answer::Kind::Deny);
  CHECK(parse_answer("never mind", o).kind == Answer::Kind::Abort);
  CHECK(parse_answer("cancel that", o).kind == Answer::Kind::Abort);
  const Answer red = parse_answer("the red one", o);
  CHECK(red.kind == Answer::Kind::Choice);
  REQUIRE(red.choice);
  CHECK(o.matched_candidates[*red.choice].attribute_tokens == std::vector<std::string>{"red"});
  const Answer white = parse_answer("The WHITE lamp", o);
  CHECK(white.kind == Answer::Kind::Choice);
  CHECK(white.choice != red.choice);
  // Both discriminators named: no unique pick.
  CHECK(parse_answer("red or white", o).kind == Answer::Kind::Rephrase);
  const Answer r = parse_answer("  bring the one near the window ", o);
  CHECK(r.kind == Answer::Kind::Rephrase);
  CHECK(r.payload == "bring the one near the window");
  CHECK(to_string(Answer::Kind::Choice) == "choice");
}

TEST_CASE("fixture sessions open with the expected utterance") {
  for (const auto& c : kFixtureCases) {
    CAPTURE(c.scene);
    const Session s = fixture_session(c);
    CHECK(s.grounding.outcome.state == c.state);
    CHECK(s.message == c.question);
    CHECK(s.status == (c.state == AmbiguityState::NQ ? SessionStatus::Grounded : SessionStatus::Asking));
  }
}

TEST_CASE("affirming a single-candidate question grounds and resumes the plan") {
  const DialogueContext ctx = dialogue_context();
  for (std::size_t i : {2u, 3u, 4u}) {  // IMA, AM, ANF
    Session s = fixture_session(kFixtureCases[i]);
    s = dialogue_step(std::move(s), Answer{Answer::Kind::Affirm, {}, {}}, ctx);
    CHECK(s.status == SessionStatus::Grounded);
    REQUIRE(s.grounded);
    CHECK(in_candidates(s, *s.grounded));
    CHECK(s.message == "Ok");
    CHECK_FALSE(s.plan.grounding_barrier());
    CHECK(s.plan.steps[1].args[0] == "cup#" + std::to_string(s.grounded->scene_index));
    CHECK_THROWS_AS(dialogue_step(s, Answer{Answer::Kind::Affirm, {}, {}}, ctx), UsageError);
  }
}

TEST_CASE("denial leads to the not-found question and then to an abort") {
  const DialogueContext ctx = dialogue_context();
  Session s = fixture_session(kFixtureCases[2]);  // IMA "cup"
  s = dialogue_step(std::move(s), Answer{Answer::Kind::Deny, {}, {}}, ctx);
  CHECK(s.status == SessionStatus::Asking);
  CHECK(s.message == "I can't find any cup. What should I do?");
  s = dialogue_step(std::move(s), Answer{Answer::Kind::Deny, {}, {}}, ctx);
  CHECK(s.status == SessionStatus::Aborted);
  CHECK(s.plan.aborted);
  CHECK(s.plan.steps.size() == 1);
}

TEST_CASE("abort truncates the plan at the grounding step") {
  Session s = fixture_session(kFixtureCases[6]);  // NF
  s = dialogue_step(std::move(s), parse_answer("abort", s.pending), dialogue_context());
  CHECK(s.status == SessionStatus::Aborted);
  CHECK(s.message == "Ok, aborting.");
  CHECK(s.plan.aborted);
  CHECK_FALSE(s.grounded);
}

TEST_CASE("ambiguous attribute resolved by choice or by rephrase") {
  const DialogueContext ctx = dialogue_context();
  Session s = fixture_session(kFixtureCases[1]);
  Session chosen = dialogue_step(s, parse_answer("the red one", s.pending), ctx);
  CHECK(chosen.status == SessionStatus::Grounded);
  REQUIRE(chosen.grounded);
  CHECK(chosen.grounded->caption == "a red lamp");
  CHECK(chosen.pending.state == AmbiguityState::NQ);

  Session rephrased = dialogue_step(s, Answer{Answer::Kind::Rephrase, "the red one", {}}, ctx);
  CHECK(rephrased.status == SessionStatus::Grounded);
  CHECK(rephrased.grounding.outcome.state == AmbiguityState::NQ);
  CHECK(rephrased.argument.object_key() == "lamp");
  CHECK(rephrased.argument.attribute_tokens == std::vector<std::string>{"red"});
  REQUIRE(rephrased.grounded);
  CHECK(rephrased.grounded->caption == "a red lamp");
}

TEST_CASE("identical objects: no discriminator picks the largest box") {
  const DialogueContext ctx = dialogue_context();
  Session s = fixture_session(kFixtureCases[5]);
  REQUIRE(s.pending.state == AmbiguityState::AOA);
  double best = 0.0;
  for (const auto& c : s.pending.matched_candidates) best = std::max(best, c.box.area());
  Session a = dialogue_step(s, Answer{Answer::Kind::Affirm, {}, {}}, ctx);
  REQUIRE(a.grounded);
  CHECK(a.grounded->box.area() == best);
  Session r = dialogue_step(s, Answer{Answer::Kind::Rephrase, "that one", {}}, ctx);
  REQUIRE(r.grounded);
  CHECK(r.grounded->box.area() == best);
}

TEST_CASE("adversarial answers never keep a session open past the re-prompt limit") {
  const DialogueContext ctx = dialogue_context();
  const std::vector<std::string> answers = {"hmm", "the blue one", "what", "the purple lamp", "",
                                            "maybe", "the wooden one", "yes", "no", "the mug"};
  std::mt19937 rng(8);
  for (int trial = 0; trial < 200; ++trial) {
    const auto& c = kFixtureCases[1 + trial % 7];
    Session s = fixture_session(c);
    std::size_t steps = 0;
    while (s.status == SessionStatus::Asking) {
      const auto& text = answers[std::uniform_int_distribution<std::size_t>(0, answers.size() - 1)(rng)];
      s = dialogue_step(std::move(s), parse_answer(text, s.pending), ctx);
      ++steps;
      REQUIRE(steps <= kMaxReprompts + 1);
    }
    CHECK(s.reprompts <= kMaxReprompts);
    if (s.status == SessionStatus::Grounded) {
      REQUIRE(s.grounded);
      CHECK(in_candidates(s, *s.grounded));
    }
  }

  // Always re-asking the same impossible thing forces an abort.
  Session s = fixture_session(kFixtureCases[1]);
  std::size_t steps = 0;
  while (s.status == SessionStatus::Asking) {
    s = dialogue_step(std::move(s), Answer{Answer::Kind::Rephrase, "the blue one", {}}, ctx);
    ++steps;
  }
  CHECK(s.status == SessionStatus::Aborted);
  CHECK(steps == kMaxReprompts + 1);
}

TEST_CASE("transcripts are timestamped and tab separated") {
  Transcript t;
  t.add("user", "take the cup");
  t.add("robot", "I see a red cup. Should I continue?");
  CHECK(t.entries().size() == 2);
  std::ostringstream out;
  t.write(out);
  const std::regex line(R"(\d{4}-\d{2}-\d{2}T\d{2}:\d{2}:\d{2}\.\d{3}Z\t(user|robot)\t.+)");
  std::istringstream in(out.str());
  std::string l;
  int n = 0;
  while (std::getline(in, l)) {
    CHECK(std::regex_match(l, line));
    ++n;
  }
  CHECK(n == 2);
}
