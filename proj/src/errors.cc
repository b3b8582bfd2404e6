#include "fedtx/errors.hpp"

namespace fedtx {

std::string_view toString(ErrorCode code) {
  switch (code) {
    case ErrorCode::kUnknownStorage: return "UnknownStorage";
    case ErrorCode::kAtomicityScopeViolation: return "AtomicityScopeViolation";
    case ErrorCode::kInjectedFault: return "InjectedFault";
    case ErrorCode::kCapabilityUnsupported: return "CapabilityUnsupported";
    case ErrorCode::kUnknownView: return "UnknownView";
    case ErrorCode::kJoinIntegrity: return "JoinIntegrityError";
    case ErrorCode::kRecoveryFailed: return "RecoveryFailed";
    case ErrorCode::kTypeMismatch: return "TypeMismatch";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kTransactionState: return "TransactionState";
    case ErrorCode::kSearchBoundExceeded: return "SearchBoundExceeded";
    case ErrorCode::kConfig: return "ConfigError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(toString(code)) + ": " + message), code_(code) {}

}  // namespace fedtx
