#pragma once

// STRIPS-style task planning. Per-task problem templates and action
// templates are read from a plain-text domain file; a task frame is encoded
// into an initial state and goal, and breadth-first forward search returns
// the shortest action sequence.

#include <compare>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "ttr/instruction.hpp"

namespace ttr::planner {

struct Fact {
  std::string predicate;
  std::vector<std::string> args;

  auto operator<=>(const Fact&) const = default;
  bool operator==(const Fact&) const = default;
};

std::string to_string(const Fact& fact);

/// Ground facts plus the typed symbols available for action parameters.
struct WorldState {
  std::set<Fact> facts;
  std::map<std::string, std::string> symbol_types;
  /// Object symbols that still need visual grounding.
  std::set<std::string> unresolved;

  std::optional<std::string> robot_at() const;
  std::optional<std::string> holding() const;
  bool satisfies(const std::vector<Fact>& goal) const;
};

/// A predicate whose terms are either `?variables` or constants.
struct Pattern {
  std::string predicate;
  std::vector<std::string> terms;
};

struct Parameter {
  std::string name;  // includes the leading '?'
  std::string type;  // empty matches any symbol
};

struct ActionTemplate {
  std::string name;
  std::vector<Parameter> parameters;
  /// Indices of the parameters shown when printing a step.
  std::vector<std::size_t> shown;
  std::vector<Pattern> preconditions;
  std::vector<Pattern> add_effects;
  std::vector<Pattern> del_effects;
};

struct TaskTemplate {
  TaskType task = TaskType::Taking;
  std::vector<std::string> required;
  std::map<std::string, std::string> defaults;  // role -> @robot / @user / location name
  std::vector<Pattern> init;
  std::vector<Pattern> goal;
};

struct Domain {
  std::vector<ActionTemplate> actions;
  std::map<TaskType, TaskTemplate> tasks;

  const ActionTemplate* action(std::string_view name) const;
};

Domain load_domain(std::istream& in, std::string_view source = "domain");
Domain load_domain(const std::filesystem::path& path);
/// The domain shipped in data/domain.txt.
Domain default_domain();

/// Static map of named places to location symbols.
struct Knowledge {
  std::map<std::string, std::string> locations;  // lowercase name -> symbol
  std::string robot_location;                    // symbol
  std::string user_location;                     // symbol

  /// Longest run of phrase tokens naming a known place.
  std::optional<std::string> resolve(const std::vector<TokenRow>& tokens) const;
  std::string display_name(const std::string& symbol) const;
};

Knowledge load_knowledge(std::istream& in, std::string_view source = "knowledge");
Knowledge load_knowledge(const std::filesystem::path& path);

struct Problem {
  WorldState initial;
  std::vector<Fact> goal;
  /// Object symbol deferred to visual grounding, if the task has one.
  std::optional<std::string> grounding_symbol;
};

/// Populates the task's templates from the frame's arguments. Throws
/// PlanError for an unknown location (listing the known ones) or a role
/// the templates need but the frame lacks.
Problem encode_problem(const TaskFrame& frame, const Knowledge& knowledge, const Domain& domain);

struct PlanStep {
  std::string action;
  std::vector<std::string> args;
  std::vector<std::size_t> shown;
  bool grounded = true;
};

struct Plan {
  std::vector<PlanStep> steps;
  bool aborted = false;
  /// Object symbol the ungrounded steps refer to.
  std::optional<std::string> pending_symbol;

  /// Index of the first LOCALIZE step still awaiting grounding.
  std::optional<std::size_t> grounding_barrier() const;
};

/// Shortest plan by breadth-first search with duplicate-state elimination.
/// Actions are tried in template order, bindings in symbol order.
Plan forward_search(const WorldState& initial, const std::vector<Fact>& goal,
                    const std::vector<ActionTemplate>& templates, std::size_t max_depth);

/// Replays the plan from `initial`; returns a description of the first
/// violated precondition or unmet goal, or nullopt if the plan is sound.
std::optional<std::string> validate_plan(const WorldState& initial, const std::vector<Fact>& goal,
                                         const Plan& plan,
                                         const std::vector<ActionTemplate>& templates);

/// Applicable ground actions in search order (exposed for exhaustive checks).
std::vector<PlanStep> applicable_actions(const WorldState& state,
                                         const std::vector<ActionTemplate>& templates);
WorldState apply(const WorldState& state, const PlanStep& step,
                 const std::vector<ActionTemplate>& templates);

struct Abort {};
using Resolution = std::variant<std::string, Abort>;

/// Binds the pending object symbol at `step_index` to a grounded symbol in
/// every remaining step, or truncates the plan there on Abort.
Plan replan_after_grounding(Plan plan, std::size_t step_index, const Resolution& resolution);

std::string format_step(const PlanStep& step, const Knowledge* knowledge = nullptr);

}  // namespace ttr::planner
