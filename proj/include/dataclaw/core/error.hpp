#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dataclaw {

enum class ErrorCode {
  CapacityExceeded,
  PathEscape,
  BackendUnreachable,
  ScriptExhausted,
  BudgetExceeded,
  Precondition,
  UnparsableAction,
  CompactionInsufficient,
  IoFailure,
  DuplicateName,
  ParseError,
  NotFound,
  UnknownHandle,
  BadQuery,
  BadOp,
  BadSpec,
  UnknownReference,
  MissingField,
  MalformedSkill,
  SeqViolation,
  UnknownSession,
  SessionClosed,
  TurnInFlight,
  DeliveryFailed,
  InvalidConfig,
  LimitExceeded,
};

std::string_view to_string(ErrorCode code);

/// Every failure the runtime reports carries one of the codes above; callers
/// that need to branch on the kind of failure inspect code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace dataclaw
