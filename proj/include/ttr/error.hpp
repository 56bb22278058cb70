#pragma once

#include <stdexcept>
#include <string>

namespace ttr {

/// Bad or unreadable input: missing files, malformed records, bad flags.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The instruction could not be parsed into a task frame.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Problem encoding or search failure in the planner.
class PlanError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller violated an operation's contract (bad index, wrong state).
class UsageError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace ttr
