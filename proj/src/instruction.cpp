#include "ttr/instruction.hpp"

#include <algorithm>

#include "ttr/error.hpp"

namespace ttr {

namespace {

constexpr std::array<std::string_view, kNumTaskTypes> kTaskNames = {
    "Bringing", "Change_state", "Check_state", "Motion", "Placing", "Searching", "Taking"};

}  // namespace

std::string_view to_string(TaskType t) { return kTaskNames[static_cast<std::size_t>(t)]; }

std::optional<TaskType> task_type_from_string(std::string_view s) {
  for (std::size_t i = 0; i < kTaskNames.size(); ++i) {
    if (kTaskNames[i] == s) return static_cast<TaskType>(i);
  }
  return std::nullopt;
}

const std::vector<std::string>& argument_roles() {
  static const std::vector<std::string> roles = {"object", "beneficiary", "source", "device",
                                                 "state",  "goal",        "area",   "destination"};
  return roles;
}

bool is_argument_role(std::string_view role) {
  const auto& r = argument_roles();
  return std::find(r.begin(), r.end(), role) != r.end();
}

std::vector<std::string> mandatory_roles(TaskType t) {
  switch (t) {
    case TaskType::Bringing:
    case TaskType::CheckState:
    case TaskType::Searching:
    case TaskType::Taking:
      return {"object"};
    case TaskType::ChangeState:
      return {"device"};
    case TaskType::Motion:
      return {"goal"};
    case TaskType::Placing:
      return {"object", "goal"};
  }
  return {};
}

const ArgumentPhrase* TaskFrame::argument(std::string_view role) const {
  auto it = arguments.find(std::string(role));
  return it == arguments.end() ? nullptr : &it->second;
}

const ArgumentPhrase* TaskFrame::grounding_argument() const {
  if (auto* a = argument("object")) return a;
  return argument("device");
}

std::vector<std::string> task_label_alphabet() {
  std::vector<std::string> labels = {std::string(kOutsideLabel)};
  for (std::size_t t = 0; t < kNumTaskTypes; ++t) {
    labels.emplace_back(to_string(static_cast<TaskType>(t)));
  }
  return labels;
}

std::vector<std::string> role_label_alphabet() {
  std::vector<std::string> labels = {std::string(kOutsideLabel)};
  for (const auto& r : argument_roles()) labels.push_back(r);
  return labels;
}

ArgumentPhrase label_phrase(std::vector<TokenRow> tokens, const crf::CrfModel& semantic) {
  std::vector<SemanticClass> classes;
  if (!tokens.empty()) {
    for (const auto& label : crf::viterbi(semantic, tokens)) {
      auto c = semantic_class_from_string(label);
      if (!c) throw UsageError("semantic model emitted non-class label '" + label + "'");
      classes.push_back(*c);
    }
  }
  return make_labeled_phrase(std::move(tokens), std::move(classes));
}

TaskFrame parse_instruction(std::string_view text, const InstructionModels& models) {
  auto tokens = tokenize(text);
  if (tokens.empty()) throw ParseError("no task recognized");

  const auto task_labels = crf::viterbi(models.task, tokens);
  const auto role_labels = crf::viterbi(models.argument, tokens);

  TaskFrame frame;
  std::optional<TaskType> task;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (task_labels[i] == kOutsideLabel) continue;
    auto t = task_type_from_string(task_labels[i]);
    if (!t) continue;
    if (!task) task = t;
    if (*t == *task) frame.task_tokens.push_back(tokens[i]);
  }
  if (!task) throw ParseError("no task recognized");
  frame.task_type = *task;

  // Contiguous runs of the same role form one span; the first span of a
  // role wins if the tagger emits the role twice.
  std::size_t i = 0;
  while (i < tokens.size()) {
    const std::string& role = role_labels[i];
    std::size_t j = i + 1;
    while (j < tokens.size() && role_labels[j] == role) ++j;
    const bool task_token = task_labels[i] != kOutsideLabel;
    if (role != kOutsideLabel && is_argument_role(role) && !task_token &&
        !frame.arguments.contains(role)) {
      std::vector<TokenRow> span(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                                 tokens.begin() + static_cast<std::ptrdiff_t>(j));
      frame.arguments.emplace(role, label_phrase(std::move(span), models.semantic));
    }
    i = j;
  }

  for (const auto& role : mandatory_roles(frame.task_type)) {
    if (!frame.arguments.contains(role)) {
      throw ParseError("task " + std::string(to_string(frame.task_type)) +
                       " is missing its mandatory '" + role + "' argument");
    }
  }
  return frame;
}

}  // namespace ttr
