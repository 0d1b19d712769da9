#include "dataclaw/core/error.hpp"

namespace dataclaw {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::CapacityExceeded: return "CapacityExceeded";
    case ErrorCode::PathEscape: return "PathEscape";
    case ErrorCode::BackendUnreachable: return "BackendUnreachable";
    case ErrorCode::ScriptExhausted: return "ScriptExhausted";
    case ErrorCode::BudgetExceeded: return "BudgetExceeded";
    case ErrorCode::Precondition: return "Precondition";
    case ErrorCode::UnparsableAction: return "UnparsableAction";
    case ErrorCode::CompactionInsufficient: return "CompactionInsufficient";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::DuplicateName: return "DuplicateName";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::NotFound: return "NotFound";
    case ErrorCode::UnknownHandle: return "UnknownHandle";
    case ErrorCode::BadQuery: return "BadQuery";
    case ErrorCode::BadOp: return "BadOp";
    case ErrorCode::BadSpec: return "BadSpec";
    case ErrorCode::UnknownReference: return "UnknownReference";
    case ErrorCode::MissingField: return "MissingField";
    case ErrorCode::MalformedSkill: return "MalformedSkill";
    case ErrorCode::SeqViolation: return "SeqViolation";
    case ErrorCode::UnknownSession: return "UnknownSession";
    case ErrorCode::SessionClosed: return "SessionClosed";
    case ErrorCode::TurnInFlight: return "TurnInFlight";
    case ErrorCode::DeliveryFailed: return "DeliveryFailed";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::LimitExceeded: return "LimitExceeded";
  }
  return "Unknown";
}

}  // namespace dataclaw
