#include "dronepki/error.hpp"

namespace dpki {

std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::DecodeError: return "DecodeError";
    case Errc::DecryptionFailure: return "DecryptionFailure";
    case Errc::EmptyDroneName: return "EmptyDroneName";
    case Errc::MalformedTransaction: return "MalformedTransaction";
    case Errc::BrokenSerial: return "BrokenSerial";
    case Errc::BrokenTimestamp: return "BrokenTimestamp";
    case Errc::BrokenGlobalChain: return "BrokenGlobalChain";
    case Errc::BrokenServiceChain: return "BrokenServiceChain";
    case Errc::InsufficientApprovals: return "InsufficientApprovals";
    case Errc::UnknownValidatorSignature: return "UnknownValidatorSignature";
    case Errc::BadApprovalSignature: return "BadApprovalSignature";
    case Errc::DuplicateApproval: return "DuplicateApproval";
    case Errc::BadOperatorSignature: return "BadOperatorSignature";
    case Errc::DuplicateActiveCertificate: return "DuplicateActiveCertificate";
    case Errc::RevokeWithoutBinding: return "RevokeWithoutBinding";
    case Errc::OperatorKeyMismatch: return "OperatorKeyMismatch";
    case Errc::NoPriorBinding: return "NoPriorBinding";
    case Errc::EmptyValidatorSet: return "EmptyValidatorSet";
    case Errc::ForeignVote: return "ForeignVote";
    case Errc::DoubleVote: return "DoubleVote";
    case Errc::StaleRound: return "StaleRound";
    case Errc::BadVoteSignature: return "BadVoteSignature";
    case Errc::BadCredential: return "BadCredential";
    case Errc::EmptyLedger: return "EmptyLedger";
    case Errc::InvalidConfig: return "InvalidConfig";
    case Errc::TickBudgetExhausted: return "TickBudgetExhausted";
    case Errc::HandshakeAbort: return "HandshakeAbort";
  }
  return "Unknown";
}

namespace {
std::string format(Errc code, const std::string& detail) {
  std::string msg(to_string(code));
  if (!detail.empty()) {
    msg += ": ";
    msg += detail;
  }
  return msg;
}
}  // namespace

Error::Error(Errc code, const std::string& detail)
    : std::runtime_error(format(code, detail)), code_(code) {}

}  // namespace dpki
