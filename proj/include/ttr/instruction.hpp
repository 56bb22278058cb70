#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ttr/crf.hpp"
#include "ttr/text.hpp"

namespace ttr {

enum class TaskType { Bringing, ChangeState, CheckState, Motion, Placing, Searching, Taking };

inline constexpr std::size_t kNumTaskTypes = 7;
std::string_view to_string(TaskType t);
std::optional<TaskType> task_type_from_string(std::string_view s);
const std::vector<std::string>& argument_roles();
bool is_argument_role(std::string_view role);
/// Roles that must be present for the task to be executable.
std::vector<std::string> mandatory_roles(TaskType t);

/// Label used by the task and argument taggers for tokens outside any span.
inline constexpr std::string_view kOutsideLabel = "O";

/// Tagger alphabets: the outside label first, then task types or roles.
std::vector<std::string> task_label_alphabet();
std::vector<std::string> role_label_alphabet();

/// An argument span with its semantic-class parse.
using ArgumentPhrase = LabeledPhrase;

struct TaskFrame {
  TaskType task_type = TaskType::Taking;
  std::vector<TokenRow> task_tokens;
  std::map<std::string, ArgumentPhrase> arguments;

  const ArgumentPhrase* argument(std::string_view role) const;
  /// The argument that needs visual grounding: `object`, else `device`.
  const ArgumentPhrase* grounding_argument() const;
};

/// The three taggers the instruction parser runs.
struct InstructionModels {
  const crf::CrfModel& task;
  const crf::CrfModel& argument;
  const crf::CrfModel& semantic;
};

/// Labels every token of `tokens` with a semantic class.
ArgumentPhrase label_phrase(std::vector<TokenRow> tokens, const crf::CrfModel& semantic);

/// Tokenizes, tags task-evoking tokens and argument spans, groups contiguous
/// same-role tokens, and semantically parses each span. Throws ParseError
/// when no task is recognized or a mandatory argument is missing.
TaskFrame parse_instruction(std::string_view text, const InstructionModels& models);

}  // namespace ttr
