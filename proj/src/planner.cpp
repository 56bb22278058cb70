#include "ttr/planner.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <functional>
#include <istream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "ttr/error.hpp"

namespace ttr::planner {

namespace {

const std::set<std::string>& known_action_names() {
  static const std::set<std::string> names = {"MOVE_TO", "LOCALIZE",     "PICK_UP", "PLACE",
                                              "OPERATE", "ASSERT_STATE", "SEARCH"};
  return names;
}

const std::set<std::string>& function_words() {
  static const std::set<std::string> words = {"a",    "an", "the", "to",   "from", "on", "in",
                                              "into", "at", "is",  "for",  "of",   "my", "that",
                                              "this", "it", "be",  "with", "onto"};
  return words;
}

bool is_variable(const std::string& term) { return !term.empty() && term.front() == '?'; }

std::string role_type(const std::string& role) {
  if (role == "object" || role == "device") return "object";
  if (role == "state") return "state";
  return "location";
}

std::string symbol_from_phrase(const ArgumentPhrase& phrase) {
  if (!phrase.object_tokens.empty()) return join(phrase.object_tokens, "_");
  std::vector<std::string> content;
  for (const auto& t : phrase.tokens) {
    auto w = to_lower(t.surface);
    if (!function_words().contains(w)) content.push_back(std::move(w));
  }
  if (content.empty()) return "object";
  return join(content, "_");
}

std::string state_symbol(const ArgumentPhrase& phrase) {
  std::vector<std::string> content;
  for (const auto& t : phrase.tokens) {
    auto w = to_lower(t.surface);
    if (!function_words().contains(w)) content.push_back(std::move(w));
  }
  if (content.empty()) content = surfaces(phrase.tokens);
  return join(content, "_");
}

std::vector<std::string> split_line(const std::string& line) {
  auto hash = line.find('#');
  return split_whitespace(hash == std::string::npos ? line : line.substr(0, hash));
}

Pattern parse_pattern(const std::vector<std::string>& fields, std::size_t from,
                      const std::string& where) {
  if (fields.size() <= from) throw InputError(where + ": predicate expected");
  Pattern p;
  p.predicate = fields[from];
  p.terms.assign(fields.begin() + static_cast<std::ptrdiff_t>(from) + 1, fields.end());
  return p;
}

std::string bind(const std::string& term, const std::map<std::string, std::string>& binding) {
  if (!is_variable(term)) return term;
  auto it = binding.find(term);
  return it == binding.end() ? term : it->second;
}

Fact ground(const Pattern& p, const std::map<std::string, std::string>& binding) {
  Fact f;
  f.predicate = p.predicate;
  for (const auto& t : p.terms) f.args.push_back(bind(t, binding));
  return f;
}

std::map<std::string, std::string> binding_for(const ActionTemplate& a, const PlanStep& step) {
  std::map<std::string, std::string> b;
  for (std::size_t i = 0; i < a.parameters.size() && i < step.args.size(); ++i) {
    b[a.parameters[i].name] = step.args[i];
  }
  return b;
}

const ActionTemplate& find_template(const std::vector<ActionTemplate>& templates,
                                    const std::string& name) {
  for (const auto& t : templates) {
    if (t.name == name) return t;
  }
  throw UsageError("no action template named " + name);
}

std::string state_key(const WorldState& s) {
  std::string key;
  for (const auto& f : s.facts) {
    key += f.predicate;
    for (const auto& a : f.args) {
      key += ' ';
      key += a;
    }
    key += ';';
  }
  return key;
}

bool mentions(const PlanStep& step, const std::string& symbol) {
  return std::find(step.args.begin(), step.args.end(), symbol) != step.args.end();
}

}  // namespace

std::string to_string(const Fact& fact) {
  std::string out = fact.predicate + "(";
  for (std::size_t i = 0; i < fact.args.size(); ++i) {
    if (i) out += ", ";
    out += fact.args[i];
  }
  return out + ")";
}

std::optional<std::string> WorldState::robot_at() const {
  for (const auto& f : facts) {
    if (f.predicate == "robot_at" && f.args.size() == 1) return f.args[0];
  }
  return std::nullopt;
}

std::optional<std::string> WorldState::holding() const {
  for (const auto& f : facts) {
    if (f.predicate == "holding" && f.args.size() == 1) return f.args[0];
  }
  return std::nullopt;
}

bool WorldState::satisfies(const std::vector<Fact>& goal) const {
  return std::all_of(goal.begin(), goal.end(), [&](const Fact& f) { return facts.contains(f); });
}

const ActionTemplate* Domain::action(std::string_view name) const {
  for (const auto& a : actions) {
    if (a.name == name) return &a;
  }
  return nullptr;
}

Domain load_domain(std::istream& in, std::string_view source) {
  Domain domain;
  std::string line;
  std::size_t line_no = 0;
  ActionTemplate* action = nullptr;
  TaskTemplate* task = nullptr;
  auto where = [&] { return std::string(source) + ":" + std::to_string(line_no); };

  while (std::getline(in, line)) {
    ++line_no;
    auto fields = split_line(line);
    if (fields.empty()) continue;
    const std::string& key = fields[0];
    if (key == "action") {
      if (action || task) throw InputError(where() + ": nested block");
      if (fields.size() != 2 || !known_action_names().contains(fields[1])) {
        throw InputError(where() + ": unknown action name");
      }
      domain.actions.push_back(ActionTemplate{});
      action = &domain.actions.back();
      action->name = fields[1];
    } else if (key == "task") {
      if (action || task) throw InputError(where() + ": nested block");
      auto t = fields.size() == 2 ? task_type_from_string(fields[1]) : std::nullopt;
      if (!t) throw InputError(where() + ": unknown task type");
      task = &domain.tasks[*t];
      *task = TaskTemplate{};
      task->task = *t;
    } else if (key == "end") {
      if (action) {
        if (action->shown.empty()) {
          for (std::size_t i = 0; i < action->parameters.size(); ++i) action->shown.push_back(i);
        }
        std::set<std::string> params;
        for (const auto& p : action->parameters) params.insert(p.name);
        for (const auto* list : {&action->add_effects, &action->del_effects}) {
          for (const auto& e : *list) {
            for (const auto& term : e.terms) {
              if (is_variable(term) && !params.contains(term)) {
                throw InputError(where() + ": effect variable " + term + " of " + action->name +
                                 " is not a parameter");
              }
            }
          }
        }
      }
      if (!action && !task) throw InputError(where() + ": 'end' outside a block");
      action = nullptr;
      task = nullptr;
    } else if (action) {
      if (key == "params") {
        for (std::size_t i = 1; i < fields.size(); ++i) {
          const auto& f = fields[i];
          auto colon = f.find(':');
          Parameter p{f.substr(0, colon), colon == std::string::npos ? "" : f.substr(colon + 1)};
          if (!is_variable(p.name)) throw InputError(where() + ": parameter must start with '?'");
          action->parameters.push_back(std::move(p));
        }
      } else if (key == "show") {
        for (std::size_t i = 1; i < fields.size(); ++i) {
          auto it = std::find_if(action->parameters.begin(), action->parameters.end(),
                                 [&](const Parameter& p) { return p.name == fields[i]; });
          if (it == action->parameters.end()) throw InputError(where() + ": unknown parameter");
          action->shown.push_back(static_cast<std::size_t>(it - action->parameters.begin()));
        }
      } else if (key == "pre") {
        action->preconditions.push_back(parse_pattern(fields, 1, where()));
      } else if (key == "add") {
        action->add_effects.push_back(parse_pattern(fields, 1, where()));
      } else if (key == "del") {
        action->del_effects.push_back(parse_pattern(fields, 1, where()));
      } else {
        throw InputError(where() + ": unknown action field '" + key + "'");
      }
    } else if (task) {
      if (key == "require") {
        task->required.insert(task->required.end(), fields.begin() + 1, fields.end());
      } else if (key == "default") {
        if (fields.size() < 3) throw InputError(where() + ": default needs role and value");
        std::vector<std::string> rest(fields.begin() + 2, fields.end());
        task->defaults["?" + fields[1]] = join(rest, " ");
      } else if (key == "init") {
        task->init.push_back(parse_pattern(fields, 1, where()));
      } else if (key == "goal") {
        task->goal.push_back(parse_pattern(fields, 1, where()));
      } else {
        throw InputError(where() + ": unknown task field '" + key + "'");
      }
    } else {
      throw InputError(where() + ": unexpected '" + key + "' outside a block");
    }
  }
  if (action || task) throw InputError(std::string(source) + ": unterminated block");
  return domain;
}

Domain load_domain(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read domain file '" + path.string() + "'");
  return load_domain(in, path.string());
}

Domain default_domain() { return load_domain(std::filesystem::path(TTR_DATA_DIR) / "domain.txt"); }

std::optional<std::string> Knowledge::resolve(const std::vector<TokenRow>& tokens) const {
  std::vector<std::string> words;
  for (const auto& t : tokens) words.push_back(to_lower(t.surface));
  for (std::size_t len = words.size(); len > 0; --len) {
    for (std::size_t start = 0; start + len <= words.size(); ++start) {
      std::vector<std::string> run(words.begin() + static_cast<std::ptrdiff_t>(start),
                                   words.begin() + static_cast<std::ptrdiff_t>(start + len));
      auto it = locations.find(join(run, " "));
      if (it != locations.end()) return it->second;
    }
  }
  return std::nullopt;
}

std::string Knowledge::display_name(const std::string& symbol) const {
  for (const auto& [name, sym] : locations) {
    if (sym == symbol) return name;
  }
  return symbol;
}

Knowledge load_knowledge(std::istream& in, std::string_view source) {
  Knowledge k;
  std::string robot_name;
  std::string user_name;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto hash = line.find('#');
    std::string body = hash == std::string::npos ? line : line.substr(0, hash);
    if (trim(body).empty()) continue;
    auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw InputError(std::string(source) + ":" + std::to_string(line_no) +
                       ": expected 'name = value'");
    }
    auto name = to_lower(trim(std::string_view(body).substr(0, eq)));
    auto value = std::string(trim(std::string_view(body).substr(eq + 1)));
    name = join(split_whitespace(name), " ");
    if (name.empty() || value.empty()) {
      throw InputError(std::string(source) + ":" + std::to_string(line_no) + ": empty field");
    }
    if (name == "@robot") {
      robot_name = to_lower(value);
    } else if (name == "@user") {
      user_name = to_lower(value);
    } else {
      k.locations.emplace(name, value);
    }
  }
  auto lookup = [&](const std::string& name, std::string_view what) -> std::string {
    auto it = k.locations.find(name);
    if (it == k.locations.end()) {
      throw InputError(std::string(source) + ": " + std::string(what) + " location '" + name +
                       "' is not a known place");
    }
    return it->second;
  };
  if (robot_name.empty() && !k.locations.empty()) robot_name = k.locations.begin()->first;
  if (!robot_name.empty()) k.robot_location = lookup(robot_name, "@robot");
  k.user_location = user_name.empty() ? k.robot_location : lookup(user_name, "@user");
  return k;
}

Knowledge load_knowledge(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read knowledge file '" + path.string() + "'");
  return load_knowledge(in, path.string());
}

Problem encode_problem(const TaskFrame& frame, const Knowledge& knowledge, const Domain& domain) {
  auto it = domain.tasks.find(frame.task_type);
  if (it == domain.tasks.end()) {
    throw PlanError("no templates for task " + std::string(to_string(frame.task_type)));
  }
  const TaskTemplate& tmpl = it->second;
  if (knowledge.robot_location.empty()) throw PlanError("knowledge base has no robot location");

  auto known_names = [&] {
    std::vector<std::string> names;
    for (const auto& [name, sym] : knowledge.locations) names.push_back(name);
    return join(names, ", ");
  };
  auto resolve_named = [&](const std::string& value) -> std::string {
    if (value == "@robot") return knowledge.robot_location;
    if (value == "@user") return knowledge.user_location;
    auto loc = knowledge.resolve(tokenize(value));
    if (!loc) throw PlanError("unknown location '" + value + "' (known: " + known_names() + ")");
    return *loc;
  };

  Problem problem;
  WorldState& state = problem.initial;
  std::map<std::string, std::string> binding;

  auto bind_role = [&](const std::string& var) {
    if (binding.contains(var)) return;
    const std::string role = var.substr(1);
    const std::string type = role_type(role);
    const ArgumentPhrase* phrase = frame.argument(role);
    std::string symbol;
    if (phrase) {
      if (type == "object") {
        symbol = symbol_from_phrase(*phrase);
        if (!problem.grounding_symbol) problem.grounding_symbol = symbol;
        state.unresolved.insert(symbol);
      } else if (type == "state") {
        symbol = state_symbol(*phrase);
      } else {
        auto words = surfaces(phrase->tokens);
        bool self = false;
        for (const auto& w : words) {
          auto lw = to_lower(w);
          self |= lw == "me" || lw == "us" || lw == "i";
        }
        if (role == "beneficiary" && self) {
          symbol = knowledge.user_location;
        } else if (auto loc = knowledge.resolve(phrase->tokens)) {
          symbol = *loc;
        } else {
          throw PlanError("unknown location '" + phrase->text() + "' for " + role +
                          " (known: " + known_names() + ")");
        }
      }
    } else if (auto d = tmpl.defaults.find(var); d != tmpl.defaults.end()) {
      symbol = resolve_named(d->second);
    } else {
      throw PlanError("task " + std::string(to_string(frame.task_type)) + " needs a '" + role +
                      "' argument");
    }
    binding[var] = symbol;
    state.symbol_types[symbol] = type;
  };

  for (const auto& role : tmpl.required) {
    if (!frame.argument(role)) {
      throw PlanError("task " + std::string(to_string(frame.task_type)) + " needs a '" + role +
                      "' argument");
    }
  }
  for (const auto* list : {&tmpl.init, &tmpl.goal}) {
    for (const auto& p : *list) {
      for (const auto& term : p.terms) {
        if (is_variable(term)) bind_role(term);
      }
    }
  }

  for (const auto& [name, sym] : knowledge.locations) state.symbol_types[sym] = "location";
  state.facts.insert(Fact{"robot_at", {knowledge.robot_location}});
  state.facts.insert(Fact{"handempty", {}});
  for (const auto& p : tmpl.init) state.facts.insert(ground(p, binding));
  for (const auto& p : tmpl.goal) problem.goal.push_back(ground(p, binding));
  return problem;
}

std::optional<std::size_t> Plan::grounding_barrier() const {
  for (std::size_t i = 0; i < steps.size(); ++i) {
    if (steps[i].action == "LOCALIZE" && !steps[i].grounded) return i;
  }
  return std::nullopt;
}

std::vector<PlanStep> applicable_actions(const WorldState& state,
                                         const std::vector<ActionTemplate>& templates) {
  std::vector<PlanStep> out;
  std::vector<std::string> symbols;
  for (const auto& [sym, type] : state.symbol_types) symbols.push_back(sym);

  for (const auto& a : templates) {
    std::map<std::string, std::string> binding;
    std::vector<std::string> args(a.parameters.size());
    std::function<void(std::size_t)> rec = [&](std::size_t k) {
      if (k == a.parameters.size()) {
        for (const auto& pre : a.preconditions) {
          if (!state.facts.contains(ground(pre, binding))) return;
        }
        out.push_back(PlanStep{a.name, args, a.shown, true});
        return;
      }
      const auto& param = a.parameters[k];
      for (const auto& sym : symbols) {
        if (!param.type.empty() && state.symbol_types.at(sym) != param.type) continue;
        binding[param.name] = sym;
        args[k] = sym;
        // Prune as soon as a precondition is fully bound and false.
        bool ok = true;
        for (const auto& pre : a.preconditions) {
          bool bound = std::all_of(pre.terms.begin(), pre.terms.end(), [&](const std::string& t) {
            return !is_variable(t) || binding.contains(t);
          });
          if (bound && !state.facts.contains(ground(pre, binding))) {
            ok = false;
            break;
          }
        }
        if (ok) rec(k + 1);
        binding.erase(param.name);
      }
    };
    rec(0);
  }
  return out;
}

WorldState apply(const WorldState& state, const PlanStep& step,
                 const std::vector<ActionTemplate>& templates) {
  const auto& a = find_template(templates, step.action);
  auto binding = binding_for(a, step);
  WorldState next = state;
  for (const auto& d : a.del_effects) next.facts.erase(ground(d, binding));
  for (const auto& e : a.add_effects) next.facts.insert(ground(e, binding));
  return next;
}

Plan forward_search(const WorldState& initial, const std::vector<Fact>& goal,
                    const std::vector<ActionTemplate>& templates, std::size_t max_depth) {
  if (max_depth == 0) throw UsageError("max_depth must be at least 1");

  struct Node {
    WorldState state;
    std::size_t parent;
    PlanStep step;
    std::size_t depth;
  };
  std::vector<Node> nodes;
  nodes.push_back(Node{initial, 0, {}, 0});
  std::unordered_set<std::string> seen{state_key(initial)};
  std::deque<std::size_t> frontier{0};

  auto finish = [&](std::size_t idx) {
    Plan plan;
    while (idx != 0) {
      plan.steps.push_back(nodes[idx].step);
      idx = nodes[idx].parent;
    }
    std::reverse(plan.steps.begin(), plan.steps.end());
    if (initial.unresolved.size() == 1) plan.pending_symbol = *initial.unresolved.begin();
    for (auto& s : plan.steps) {
      s.grounded = std::none_of(initial.unresolved.begin(), initial.unresolved.end(),
                                [&](const std::string& sym) { return mentions(s, sym); });
    }
    return plan;
  };

  if (initial.satisfies(goal)) return finish(0);
  while (!frontier.empty()) {
    const std::size_t cur = frontier.front();
    frontier.pop_front();
    if (nodes[cur].depth >= max_depth) continue;
    for (auto& step : applicable_actions(nodes[cur].state, templates)) {
      WorldState next = apply(nodes[cur].state, step, templates);
      if (!seen.insert(state_key(next)).second) continue;
      const bool done = next.satisfies(goal);
      nodes.push_back(Node{std::move(next), cur, std::move(step), nodes[cur].depth + 1});
      if (done) return finish(nodes.size() - 1);
      frontier.push_back(nodes.size() - 1);
    }
  }
  throw PlanError("unsatisfiable within depth " + std::to_string(max_depth));
}

std::optional<std::string> validate_plan(const WorldState& initial, const std::vector<Fact>& goal,
                                         const Plan& plan,
                                         const std::vector<ActionTemplate>& templates) {
  WorldState state = initial;
  for (std::size_t i = 0; i < plan.steps.size(); ++i) {
    const auto& step = plan.steps[i];
    const ActionTemplate* a = nullptr;
    for (const auto& t : templates) {
      if (t.name == step.action) a = &t;
    }
    if (!a) return "step " + std::to_string(i) + ": unknown action " + step.action;
    if (step.args.size() != a->parameters.size()) {
      return "step " + std::to_string(i) + ": wrong arity for " + step.action;
    }
    auto binding = binding_for(*a, step);
    for (const auto& pre : a->preconditions) {
      auto f = ground(pre, binding);
      if (!state.facts.contains(f)) {
        return "step " + std::to_string(i) + " (" + step.action + "): precondition " +
               to_string(f) + " does not hold";
      }
    }
    state = apply(state, step, templates);
  }
  if (plan.aborted) return std::nullopt;
  for (const auto& g : goal) {
    if (!state.facts.contains(g)) return "goal " + to_string(g) + " not reached";
  }
  return std::nullopt;
}

Plan replan_after_grounding(Plan plan, std::size_t step_index, const Resolution& resolution) {
  if (step_index >= plan.steps.size()) {
    throw UsageError("step index " + std::to_string(step_index) + " outside plan of " +
                     std::to_string(plan.steps.size()) + " steps");
  }
  if (plan.steps[step_index].grounded) {
    throw UsageError("step " + std::to_string(step_index) + " is already grounded");
  }
  if (std::holds_alternative<Abort>(resolution)) {
    plan.steps.resize(step_index);
    plan.aborted = true;
    return plan;
  }
  const std::string& symbol = std::get<std::string>(resolution);
  const std::optional<std::string> pending = plan.pending_symbol;
  for (std::size_t i = step_index; i < plan.steps.size(); ++i) {
    auto& s = plan.steps[i];
    if (s.grounded) continue;
    if (pending) std::replace(s.args.begin(), s.args.end(), *pending, symbol);
    s.grounded = true;
  }
  plan.pending_symbol.reset();
  return plan;
}

std::string format_step(const PlanStep& step, const Knowledge* knowledge) {
  std::string out = step.action;
  for (std::size_t idx : step.shown) {
    if (idx >= step.args.size()) continue;
    out += ' ';
    out += knowledge ? knowledge->display_name(step.args[idx]) : step.args[idx];
  }
  return out;
}

}  // namespace ttr::planner
