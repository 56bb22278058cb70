#include "ttr/dialogue.hpp"

#include <algorithm>
#include <array>
#include <ctime>
#include <iomanip>
#include <ostream>
#include <set>
#include <sstream>

#include "ttr/error.hpp"

namespace ttr {

namespace {

const std::array<QuestionTemplate, 6>& templates() {
  static const std::array<QuestionTemplate, 6> table = {{
      {AmbiguityState::AA,
       "I see a {attribute-1} {object} and a {attribute-2} {object}. Which one did you mean?",
       {}},
      {AmbiguityState::IMA, "I see a {attribute} {object}. Should I continue?", {}},
      {AmbiguityState::AM, "I see a {object}, but its {attribute}. Should I continue?", {}},
      {AmbiguityState::ANF,
       "I see a {object}, but not sure if it’s {attribute}. Should I continue?", {}},
      {AmbiguityState::AOA, "I see {#num} {attribute} {object}s. Which one did you mean?",
       {"attribute"}},
      {AmbiguityState::NF, "I can't find any {attribute} {object}. What should I do?",
       {"attribute"}},
  }};
  return table;
}

std::string collapse_spaces(const std::string& s) {
  std::string out;
  for (char ch : s) {
    if (ch == ' ' && !out.empty() && out.back() == ' ') continue;
    out.push_back(ch);
  }
  return out;
}

bool starts_with_words(const std::vector<std::string>& words,
                       const std::vector<std::string>& phrase) {
  if (phrase.size() > words.size()) return false;
  return std::equal(phrase.begin(), phrase.end(), words.begin());
}

bool matches_lexicon(const std::vector<std::string>& words,
                     std::initializer_list<std::string_view> lexicon) {
  for (auto entry : lexicon) {
    if (starts_with_words(words, split_whitespace(entry))) return true;
  }
  return false;
}

bool confirmable(AmbiguityState s) {
  return s == AmbiguityState::IMA || s == AmbiguityState::AM || s == AmbiguityState::ANF;
}

std::set<std::size_t> scene_indices(const std::vector<SceneCaption>& captions) {
  std::set<std::size_t> out;
  for (const auto& c : captions) out.insert(c.scene_index);
  return out;
}

const SceneCaption& largest(const std::vector<SceneCaption>& captions) {
  const SceneCaption* best = &captions.front();
  for (const auto& c : captions) {
    if (c.box.area() > best->box.area()) best = &c;
  }
  return *best;
}

bool is_placeholder(const std::string& token) {
  static const std::set<std::string> words = {"one", "ones", "it", "that", "this", "thing"};
  return words.count(token) > 0;
}

// Parses a rephrase as a description of the same argument. Placeholder
// objects ("the red one") inherit the current object, and a rephrase with
// neither object nor attribute keeps the current attributes too.
ArgumentPhrase rephrased_argument(const std::string& text, const ArgumentPhrase& current,
                                  const crf::CrfModel& semantic) {
  ArgumentPhrase p = label_phrase(tokenize(text), semantic);
  for (std::size_t i = 0; i < p.tokens.size(); ++i) {
    if (p.semantic_labels[i] == SemanticClass::Object &&
        is_placeholder(to_lower(p.tokens[i].surface))) {
      p.semantic_labels[i] = SemanticClass::Other;
    }
  }
  p.derive_entities();
  if (p.object_tokens.empty()) {
    if (p.attribute_tokens.empty()) {
      for (const auto& a : current.attribute_tokens) {
        p.tokens.emplace_back(a);
        p.semantic_labels.push_back(SemanticClass::Attribute);
      }
    }
    for (const auto& o : current.object_tokens) {
      p.tokens.emplace_back(o);
      p.semantic_labels.push_back(SemanticClass::Object);
    }
    p.derive_entities();
  }
  return p;
}

void ground_to(Session& s, const SceneCaption& caption) {
  s.grounded = caption;
  s.status = SessionStatus::Grounded;
  s.pending.state = AmbiguityState::NQ;
  s.pending.matched_candidates = {caption};
  s.message = std::string(kAcknowledgment);
  if (auto barrier = s.plan.grounding_barrier(); barrier && s.plan.pending_symbol) {
    std::string symbol = *s.plan.pending_symbol + "#" + std::to_string(caption.scene_index);
    s.plan = planner::replan_after_grounding(std::move(s.plan), *barrier, symbol);
  }
}

void abort_session(Session& s) {
  s.status = SessionStatus::Aborted;
  s.message = "Ok, aborting.";
  if (auto barrier = s.plan.grounding_barrier()) {
    s.plan = planner::replan_after_grounding(std::move(s.plan), *barrier, planner::Abort{});
  } else {
    s.plan.aborted = true;
  }
}

void ask(Session& s, AmbiguityOutcome outcome) {
  if (s.reprompts >= kMaxReprompts) {
    abort_session(s);
    return;
  }
  ++s.reprompts;
  s.pending = std::move(outcome);
  s.message = generate_question(s.pending);
}

void settle(Session& s) {
  if (s.grounding.outcome.state == AmbiguityState::NQ) {
    ground_to(s, s.grounding.outcome.matched_candidates.front());
  } else {
    s.pending = s.grounding.outcome;
    s.message = generate_question(s.pending);
  }
}

AmbiguityOutcome not_found(const ArgumentPhrase& argument) {
  AmbiguityOutcome out;
  out.state = AmbiguityState::NF;
  out.slot_values["object"] = argument.object_key();
  out.slot_values["attribute"] = join(argument.attribute_tokens, " ");
  return out;
}

}  // namespace

const QuestionTemplate& question_template(AmbiguityState state) {
  for (const auto& t : templates()) {
    if (t.state == state) return t;
  }
  throw UsageError("no question template for state " + std::string(to_string(state)));
}

std::string generate_question(const AmbiguityOutcome& outcome) {
  const QuestionTemplate& t = question_template(outcome.state);
  std::string out;
  std::string_view rest = t.pattern;
  while (!rest.empty()) {
    auto open = rest.find('{');
    if (open == std::string_view::npos) {
      out += rest;
      break;
    }
    auto close = rest.find('}', open);
    out += rest.substr(0, open);
    std::string slot(rest.substr(open + 1, close - open - 1));
    auto it = outcome.slot_values.find(slot);
    const bool optional = std::find(t.optional_slots.begin(), t.optional_slots.end(), slot) !=
                          t.optional_slots.end();
    if (it == outcome.slot_values.end() || (it->second.empty() && !optional)) {
      throw InputError("missing slot '" + slot + "' for state " +
                       std::string(to_string(outcome.state)));
    }
    out += it->second;
    rest.remove_prefix(close + 1);
  }
  return collapse_spaces(out);
}

std::string_view to_string(Answer::Kind kind) {
  switch (kind) {
    case Answer::Kind::Affirm: return "affirm";
    case Answer::Kind::Deny: return "deny";
    case Answer::Kind::Choice: return "choice";
    case Answer::Kind::Rephrase: return "rephrase";
    case Answer::Kind::Abort: return "abort";
  }
  return "?";
}

std::string_view to_string(SessionStatus status) {
  switch (status) {
    case SessionStatus::Asking: return "asking";
    case SessionStatus::Grounded: return "grounded";
    case SessionStatus::Aborted: return "aborted";
  }
  return "?";
}

Answer parse_answer(std::string_view text, const AmbiguityOutcome& outcome) {
  std::vector<std::string> words;
  for (const auto& row : tokenize(to_lower(text))) words.push_back(row.surface);
  if (words.empty()) return {Answer::Kind::Deny, {}, std::nullopt};
  if (matches_lexicon(words, {"abort", "cancel", "never mind", "nevermind"})) {
    return {Answer::Kind::Abort, {}, std::nullopt};
  }
  if (matches_lexicon(words, {"no", "nope", "don't", "stop"})) {
    return {Answer::Kind::Deny, {}, std::nullopt};
  }
  if (matches_lexicon(words, {"yes", "yeah", "ok", "okay", "sure", "continue", "right"})) {
    return {Answer::Kind::Affirm, {}, std::nullopt};
  }

  // A word picks a candidate when it is an attribute or landmark of exactly
  // one of them; the answer is a choice only if all such words agree.
  const auto& cands = outcome.matched_candidates;
  std::set<std::size_t> picked;
  for (const auto& w : words) {
    std::vector<std::size_t> holders;
    for (std::size_t i = 0; i < cands.size(); ++i) {
      const auto& c = cands[i];
      if (std::find(c.attribute_tokens.begin(), c.attribute_tokens.end(), w) !=
              c.attribute_tokens.end() ||
          std::find(c.landmark_tokens.begin(), c.landmark_tokens.end(), w) !=
              c.landmark_tokens.end()) {
        holders.push_back(i);
      }
    }
    if (holders.size() == 1) picked.insert(holders.front());
  }
  const std::string full(trim(text));
  if (picked.size() == 1) return {Answer::Kind::Choice, full, *picked.begin()};
  return {Answer::Kind::Rephrase, full, std::nullopt};
}

Session start_session(TaskFrame frame, planner::Plan plan, Scene scene,
                      const DialogueContext& context) {
  Session s;
  s.frame = std::move(frame);
  s.plan = std::move(plan);
  s.scene = std::move(scene);
  const ArgumentPhrase* arg = s.frame.grounding_argument();
  if (!arg) {
    s.status = SessionStatus::Grounded;
    s.pending.state = AmbiguityState::NQ;
    s.message = std::string(kAcknowledgment);
    return s;
  }
  s.argument = *arg;
  s.grounding = ground_argument(s.argument, s.scene, context.table, context.config);
  settle(s);
  return s;
}

Session dialogue_step(Session s, const Answer& answer, const DialogueContext& context) {
  if (s.status != SessionStatus::Asking) {
    throw UsageError("dialogue_step on a session that is " + std::string(to_string(s.status)));
  }
  const AmbiguityState state = s.pending.state;
  const auto& matched = s.pending.matched_candidates;
  switch (answer.kind) {
    case Answer::Kind::Abort:
      abort_session(s);
      break;
    case Answer::Kind::Affirm:
      if (confirmable(state)) {
        ground_to(s, matched.front());
      } else if (state == AmbiguityState::AOA) {
        ground_to(s, largest(matched));
      } else {
        ask(s, s.pending);
      }
      break;
    case Answer::Kind::Deny:
      if (confirmable(state)) {
        ask(s, not_found(s.argument));
      } else if (state == AmbiguityState::NF) {
        abort_session(s);
      } else {
        ask(s, s.pending);
      }
      break;
    case Answer::Kind::Choice:
      if (answer.choice && *answer.choice < matched.size()) {
        ground_to(s, matched[*answer.choice]);
      } else {
        ask(s, s.pending);
      }
      break;
    case Answer::Kind::Rephrase: {
      if (trim(answer.payload).empty()) {
        ask(s, s.pending);
        break;
      }
      ArgumentPhrase next = rephrased_argument(answer.payload, s.argument, context.semantic);
      GroundingResult result = ground_argument(next, s.scene, context.table, context.config);
      const auto& out = result.outcome;
      if (out.state == AmbiguityState::NQ) {
        s.argument = std::move(next);
        s.grounding = std::move(result);
        ground_to(s, s.grounding.outcome.matched_candidates.front());
      } else if (state == AmbiguityState::AOA && out.state == AmbiguityState::AOA &&
                 scene_indices(out.matched_candidates) == scene_indices(matched)) {
        // No discriminator among identical-looking objects: take the closest.
        ground_to(s, largest(matched));
      } else {
        s.argument = std::move(next);
        s.grounding = std::move(result);
        ask(s, s.grounding.outcome);
      }
      break;
    }
  }
  return s;
}

void Transcript::add(std::string speaker, std::string text) {
  entries_.push_back({std::chrono::system_clock::now(), std::move(speaker), std::move(text)});
}

void Transcript::write(std::ostream& out) const {
  for (const auto& e : entries_) {
    const std::time_t t = std::chrono::system_clock::to_time_t(e.time);
    std::tm tm{};
    gmtime_r(&t, &tm);
    const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                        e.time.time_since_epoch()).count() % 1000;
    out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%S") << '.' << std::setw(3) << std::setfill('0')
        << ms << std::setfill(' ') << "Z\t" << e.speaker << '\t' << e.text << '\n';
  }
}

}  // namespace ttr
