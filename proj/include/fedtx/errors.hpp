#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fedtx {

enum class ErrorCode {
  kUnknownStorage,
  kAtomicityScopeViolation,
  kInjectedFault,
  kCapabilityUnsupported,
  kUnknownView,
  kJoinIntegrity,
  kRecoveryFailed,
  kTypeMismatch,
  kInvalidArgument,
  kTransactionState,
  kSearchBoundExceeded,
  kConfig,
};

std::string_view toString(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace fedtx
