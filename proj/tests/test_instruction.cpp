#include <doctest.h>

#include "lexicon_model.hpp"
#include "support.hpp"
#include "ttr/error.hpp"
#include "ttr/instruction.hpp"

using namespace ttr;
using ttr::testing::lexicon_model;

namespace {

struct HandModels {
  crf::CrfModel task = lexicon_model(task_label_alphabet(),
                                     {{"take", "Taking"}, {"bring", "Bringing"}, {"put", "Placing"}});
  crf::CrfModel argument = lexicon_model(role_label_alphabet(),
                                         {{"red", "object"}, {"cup", "object"}, {"the", "object"},
                                          {"kitchen", "source"}, {"me", "beneficiary"},
                                          {"shelf", "goal"}});
  crf::CrfModel semantic = lexicon_model(semantic_label_alphabet(),
                                         {{"the", "other"}, {"red", "attribute"}, {"cup", "object"},
                                          {"kitchen", "spatial_landmark"}, {"shelf", "spatial_landmark"},
                                          {"me", "other"}});
  InstructionModels view() const { return {task, argument, semantic}; }
};

}  // namespace

TEST_CASE("task and role vocabularies") {
  CHECK(to_string(TaskType::ChangeState) == "Change_state");
  CHECK(task_type_from_string("Taking") == TaskType::Taking);
  CHECK_FALSE(task_type_from_string("taking"));
  CHECK(task_label_alphabet().size() == kNumTaskTypes + 1);
  CHECK(task_label_alphabet().front() == kOutsideLabel);
  CHECK(role_label_alphabet().front() == kOutsideLabel);
  CHECK(is_argument_role("beneficiary"));
  CHECK_FALSE(is_argument_role("O"));
  CHECK(mandatory_roles(TaskType::Placing) == std::vector<std::string>{"object", "goal"});
  CHECK(mandatory_roles(TaskType::ChangeState) == std::vector<std::string>{"device"});
}

TEST_CASE("parsing groups contiguous role spans and parses them semantically") {
  HandModels h;
  // "from" is O in both taggers, so it separates object and source.
  const TaskFrame f = parse_instruction("Take the red cup from the kitchen", h.view());
  CHECK(f.task_type == TaskType::Taking);
  REQUIRE(f.task_tokens.size() == 1);
  CHECK(f.task_tokens[0].surface == "Take");
  const auto* obj = f.argument("object");
  REQUIRE(obj);
  CHECK(obj->text() == "the red cup");
  CHECK(obj->object_tokens == std::vector<std::string>{"cup"});
  CHECK(obj->attribute_tokens == std::vector<std::string>{"red"});
  // "the kitchen": "the" is tagged object, so the first object span wins
  // and the source span is "kitchen" alone.
  const auto* src = f.argument("source");
  REQUIRE(src);
  CHECK(src->text() == "kitchen");
  CHECK(f.grounding_argument() == obj);
}

TEST_CASE("parse failures") {
  HandModels h;
  CHECK_THROWS_AS(parse_instruction("", h.view()), ParseError);
  CHECK_THROWS_AS(parse_instruction("hello there", h.view()), ParseError);
  // Placing needs a goal.
  CHECK_THROWS_AS(parse_instruction("put the cup", h.view()), ParseError);
  CHECK_NOTHROW(parse_instruction("put the cup on shelf", h.view()));
}

TEST_CASE("trained taggers parse typical instructions") {
  const auto& w = ttr::testing::world();
  const auto models = w.models.view();
  struct Case {
    const char* text;
    TaskType task;
    const char* role;
    const char* object;
  };
  const Case cases[] = {
      {"bring me the red cup", TaskType::Bringing, "object", "cup"},
      {"take the green bottle", TaskType::Taking, "object", "bottle"},
      {"find the blue towel", TaskType::Searching, "object", "towel"},
      {"turn on the lamp", TaskType::ChangeState, "device", "lamp"},
      {"put the white plate on the table", TaskType::Placing, "object", "plate"},
  };
  for (const auto& c : cases) {
    CAPTURE(c.text);
    const TaskFrame f = parse_instruction(c.text, models);
    CHECK(f.task_type == c.task);
    const auto* a = f.argument(c.role);
    REQUIRE(a);
    CHECK(a->object_key() == c.object);
  }
}
