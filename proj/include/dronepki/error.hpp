#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dpki {

enum class Errc {
  DecodeError,
  DecryptionFailure,
  EmptyDroneName,
  MalformedTransaction,
  BrokenSerial,
  BrokenTimestamp,
  BrokenGlobalChain,
  BrokenServiceChain,
  InsufficientApprovals,
  UnknownValidatorSignature,
  BadApprovalSignature,
  DuplicateApproval,
  BadOperatorSignature,
  DuplicateActiveCertificate,
  RevokeWithoutBinding,
  OperatorKeyMismatch,
  NoPriorBinding,
  EmptyValidatorSet,
  ForeignVote,
  DoubleVote,
  StaleRound,
  BadVoteSignature,
  BadCredential,
  EmptyLedger,
  InvalidConfig,
  TickBudgetExhausted,
  HandshakeAbort,
};

/// Stable string code, used in JSON traces and CLI output.
std::string_view to_string(Errc code);

class Error : public std::runtime_error {
 public:
  explicit Error(Errc code, const std::string& detail = {});

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace dpki
