#include <doctest.h>

#include <functional>
#include <sstream>

#include "lexicon_model.hpp"
#include "support.hpp"
#include "ttr/error.hpp"
#include "ttr/planner.hpp"

using namespace ttr;
using namespace ttr::planner;

namespace {

Knowledge knowledge() { return load_knowledge(std::filesystem::path(TTR_DATA_DIR) / "knowledge.txt"); }

ArgumentPhrase arg(std::string_view annotated) { return ttr::testing::phrase(annotated); }

TaskFrame taking_frame() {
  TaskFrame f;
  f.task_type = TaskType::Taking;
  f.arguments.emplace("object", arg("the/other red/attribute cup/object"));
  f.arguments.emplace("source", arg("the/other kitchen/spatial_landmark"));
  return f;
}

std::vector<std::string> rendered(const Plan& p) {
  std::vector<std::string> out;
  for (const auto& s : p.steps) out.push_back(s.action + "(" + join(s.args, ",") + ")");
  return out;
}

// Independent oracle: iterative deepening over every applicable action.
bool reachable_within(const WorldState& s, const std::vector<Fact>& goal,
                      const std::vector<ActionTemplate>& actions, std::size_t depth) {
  if (s.satisfies(goal)) return true;
  if (depth == 0) return false;
  for (const auto& step : applicable_actions(s, actions)) {
    if (reachable_within(apply(s, step, actions), goal, actions, depth - 1)) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("knowledge file resolves multi-word places and the agent locations") {
  const Knowledge k = knowledge();
  CHECK(k.robot_location == "L0");
  CHECK(k.user_location == "L0");
  CHECK(k.resolve(tokenize("the living room")) == "L3");
  CHECK(k.resolve(tokenize("the Kitchen")) == "L1");
  CHECK_FALSE(k.resolve(tokenize("the garage")));
  CHECK(k.display_name("L3") == "living room");

  std::istringstream bad("kitchen L1\n");
  CHECK_THROWS_AS(load_knowledge(bad), InputError);
  std::istringstream unknown_robot("kitchen = L1\n@robot = garage\n");
  CHECK_THROWS_AS(load_knowledge(unknown_robot), InputError);
}

TEST_CASE("domain file declares every task") {
  const Domain d = default_domain();
  CHECK(d.tasks.size() == kNumTaskTypes);
  REQUIRE(d.action("LOCALIZE"));
  CHECK(d.action("LOCALIZE")->preconditions.size() == 2);
  CHECK_FALSE(d.action("FLY"));
  std::istringstream bad("action X\n  params ?a:object\n  pre at ?b\nend\n");
  CHECK_THROWS_AS(load_domain(bad), InputError);
}

TEST_CASE("taking from the kitchen: move, localize, pick up, return") {
  const Domain d = default_domain();
  const Problem p = encode_problem(taking_frame(), knowledge(), d);
  CHECK(p.grounding_symbol == "cup");
  const Plan plan = forward_search(p.initial, p.goal, d.actions, 8);
  CHECK(rendered(plan) == std::vector<std::string>{"MOVE_TO(L0,L1)", "LOCALIZE(cup,L1)",
                                                   "PICK_UP(cup,L1)", "MOVE_TO(L1,L0)"});
  CHECK_FALSE(validate_plan(p.initial, p.goal, plan, d.actions));
  CHECK_FALSE(reachable_within(p.initial, p.goal, d.actions, plan.steps.size() - 1));
  CHECK(plan.grounding_barrier() == 1);
  CHECK(plan.pending_symbol == "cup");
  CHECK(plan.steps[0].grounded);
  CHECK_FALSE(plan.steps[1].grounded);
  CHECK_FALSE(plan.steps[2].grounded);
  CHECK(plan.steps[0].args == std::vector<std::string>{"L0", "L1"});
  const Knowledge k = knowledge();
  CHECK(format_step(plan.steps[0], &k) == "MOVE_TO kitchen");
  CHECK(format_step(plan.steps[2]) == "PICK_UP cup");
}

TEST_CASE("every task type yields a valid minimal plan") {
  const Domain d = default_domain();
  const Knowledge k = knowledge();
  auto frame = [](TaskType t, std::vector<std::pair<std::string, std::string>> args) {
    TaskFrame f;
    f.task_type = t;
    for (auto& [role, text] : args) f.arguments.emplace(role, arg(text));
    return f;
  };
  const std::vector<TaskFrame> frames = {
      frame(TaskType::Bringing, {{"object", "the/other cup/object"}, {"beneficiary", "me/other"}}),
      frame(TaskType::ChangeState, {{"device", "the/other lamp/object"}, {"state", "on/other"}}),
      frame(TaskType::CheckState, {{"object", "the/other oven/object"}, {"state", "off/other"}}),
      frame(TaskType::Motion, {{"goal", "the/other bedroom/spatial_landmark"}}),
      frame(TaskType::Placing, {{"object", "the/other cup/object"}, {"goal", "the/other shelf/spatial_landmark"}}),
      frame(TaskType::Searching, {{"object", "the/other keys/object"}, {"area", "the/other office/spatial_landmark"}}),
      frame(TaskType::Taking, {{"object", "the/other cup/object"}}),
  };
  for (const auto& f : frames) {
    CAPTURE(to_string(f.task_type));
    const Problem p = encode_problem(f, k, d);
    const Plan plan = forward_search(p.initial, p.goal, d.actions, 8);
    CHECK_FALSE(validate_plan(p.initial, p.goal, plan, d.actions));
    if (!plan.steps.empty()) {
      CHECK_FALSE(reachable_within(p.initial, p.goal, d.actions, plan.steps.size() - 1));
    }
    CHECK(p.grounding_symbol.has_value() == (f.task_type != TaskType::Motion));
  }
}

TEST_CASE("encoding errors name the problem") {
  const Domain d = default_domain();
  TaskFrame f;
  f.task_type = TaskType::Motion;
  f.arguments.emplace("goal", arg("the/other garage/spatial_landmark"));
  try {
    encode_problem(f, knowledge(), d);
    FAIL("expected PlanError");
  } catch (const PlanError& e) {
    CHECK(std::string(e.what()).find("garage") != std::string::npos);
    CHECK(std::string(e.what()).find("kitchen") != std::string::npos);
  }
  TaskFrame missing;
  missing.task_type = TaskType::Placing;
  missing.arguments.emplace("object", arg("cup/object"));
  CHECK_THROWS_AS(encode_problem(missing, knowledge(), d), PlanError);
}

TEST_CASE("replanning binds the grounded symbol or truncates on abort") {
  const Domain d = default_domain();
  const Problem p = encode_problem(taking_frame(), knowledge(), d);
  const Plan plan = forward_search(p.initial, p.goal, d.actions, 8);

  const Plan bound = replan_after_grounding(plan, 1, std::string("cup#2"));
  CHECK(rendered(bound) == std::vector<std::string>{"MOVE_TO(L0,L1)", "LOCALIZE(cup#2,L1)",
                                                    "PICK_UP(cup#2,L1)", "MOVE_TO(L1,L0)"});
  CHECK_FALSE(bound.grounding_barrier());
  CHECK_FALSE(bound.aborted);
  CHECK_THROWS_AS(replan_after_grounding(bound, 1, std::string("x")), UsageError);
  CHECK_THROWS_AS(replan_after_grounding(plan, 9, std::string("x")), UsageError);

  const Plan aborted = replan_after_grounding(plan, 1, Abort{});
  CHECK(aborted.aborted);
  CHECK(rendered(aborted) == std::vector<std::string>{"MOVE_TO(L0,L1)"});
  CHECK_FALSE(validate_plan(p.initial, p.goal, aborted, d.actions));
}

TEST_CASE("unsatisfiable goals fail within the depth bound") {
  const Domain d = default_domain();
  const Problem p = encode_problem(taking_frame(), knowledge(), d);
  CHECK_THROWS_AS(forward_search(p.initial, p.goal, d.actions, 2), PlanError);
  Plan broken;
  broken.steps.push_back(PlanStep{"PICK_UP", {"cup", "L1"}, {0}, true});
  CHECK(validate_plan(p.initial, p.goal, broken, d.actions).has_value());
}
