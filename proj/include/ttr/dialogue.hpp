#pragma once

// Clarification questions, answer interpretation, and the
// ground -> ask -> answer -> re-ground loop.

#include <chrono>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ttr/config.hpp"
#include "ttr/disambiguation.hpp"
#include "ttr/embeddings.hpp"
#include "ttr/instruction.hpp"
#include "ttr/pipeline.hpp"
#include "ttr/planner.hpp"
#include "ttr/scene.hpp"

namespace ttr {

struct QuestionTemplate {
  AmbiguityState state;
  std::string_view pattern;
  /// Slots that may be empty (the surrounding space collapses).
  std::vector<std::string_view> optional_slots;
};

/// Throws UsageError for NQ, which has no question.
const QuestionTemplate& question_template(AmbiguityState state);

/// Fills the state's template from the outcome's slot values. Throws
/// UsageError for NQ and InputError naming the slot when one is missing.
std::string generate_question(const AmbiguityOutcome& outcome);

/// Acknowledgment printed when no clarification is needed.
inline constexpr std::string_view kAcknowledgment = "Ok";

struct Answer {
  enum class Kind { Affirm, Deny, Choice, Rephrase, Abort };
  Kind kind = Kind::Rephrase;
  std::string payload;
  /// For Choice: index into the outcome's matched candidates.
  std::optional<std::size_t> choice;
};

std::string_view to_string(Answer::Kind kind);

/// Lexicon match (abort, deny, affirm), then a unique attribute or landmark
/// discriminator among the matched candidates, else a rephrase of the whole
/// text. A blank answer counts as a denial.
Answer parse_answer(std::string_view text, const AmbiguityOutcome& outcome);

enum class SessionStatus { Asking, Grounded, Aborted };
std::string_view to_string(SessionStatus status);

inline constexpr std::size_t kMaxReprompts = 3;

/// What a rephrase needs to re-enter the pipeline.
struct DialogueContext {
  const crf::CrfModel& semantic;
  const EmbeddingTable& table;
  PipelineConfig config;
};

struct Session {
  TaskFrame frame;
  planner::Plan plan;
  Scene scene;
  /// Argument currently being grounded (updated by rephrases).
  ArgumentPhrase argument;
  GroundingResult grounding;
  /// Outcome the current question is about.
  AmbiguityOutcome pending;
  SessionStatus status = SessionStatus::Asking;
  std::optional<SceneCaption> grounded;
  std::size_t reprompts = 0;
  /// Last system utterance: a question, "Ok", or an abort notice.
  std::string message;
};

/// Grounds the frame's grounding argument over a parsed scene. Sessions
/// whose task has nothing to ground, or that resolve to NQ, start grounded.
Session start_session(TaskFrame frame, planner::Plan plan, Scene scene,
                      const DialogueContext& context);

/// Advances the session by one user answer. Throws UsageError unless the
/// session is asking.
Session dialogue_step(Session session, const Answer& answer, const DialogueContext& context);

/// Timestamped record of every turn.
class Transcript {
 public:
  struct Entry {
    std::chrono::system_clock::time_point time;
    std::string speaker;
    std::string text;
  };

  void add(std::string speaker, std::string text);
  const std::vector<Entry>& entries() const { return entries_; }
  /// One line per turn: ISO-8601 UTC time, speaker, text.
  void write(std::ostream& out) const;

 private:
  std::vector<Entry> entries_;
};

}  // namespace ttr
