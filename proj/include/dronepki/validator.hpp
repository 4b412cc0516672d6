#pragma once

#include <functional>
#include <optional>
#include <string_view>

#include "dronepki/crypto.hpp"
#include "dronepki/ledger.hpp"
#include "dronepki/model.hpp"
#include "dronepki/registry.hpp"

namespace dpki {

enum class Verdict : std::uint8_t { Approve, Reject };

std::string_view to_string(Verdict v);

enum class RejectReason {
  None,
  WrongCrtType,
  BadOperatorSignature,
  DomainAlreadyBound,
  TokenMissing,
  TokenMismatch,
  NoPriorBinding,
  OperatorKeyMismatch,
  HandshakeAbort,
};

/// Stable string codes for traces.
std::string_view reason_code(RejectReason reason);
RejectReason reason_from_code(std::string_view code);

struct ValidationOutcome {
  Verdict verdict = Verdict::Reject;
  RejectReason reason = RejectReason::None;
  ChallengeTranscript transcript;
  std::optional<Signature> validator_signature;  // present iff Approve
};

// -- Sanity checks ----------------------------------------------------------

/// Operator signature verifies over the transaction body.
bool check_key_possession(const Transaction& tx);

/// The drone has no active certificate (Unknown, Revoked or Expired).
bool check_domain_absent(const Ledger& ledger, const Transaction& tx, Tick now);

// -- Registration token -----------------------------------------------------

/// digest(canonical(tx) || sv_pk)
Digest registration_token_message(const Transaction& tx, const PublicKey& validator);
/// t0 = Sign_SV(hash(Tx + SV_pk))
Signature issue_registration_token(const KeyPair& validator, const Transaction& tx);
/// phi0 = Sign_DO(t0)
Signature operator_sign_token(const KeyPair& operator_key, const Signature& t0);

// -- Revocation token -------------------------------------------------------

struct RevocationToken {
  Digest t1;
  Signature phi1;
};

/// digest(canonical(prev body) || canonical(tx_cur) || do_pk)
Digest revocation_token_digest(const BlockBody& previous, const Transaction& current,
                               const PublicKey& operator_key);

/// Throws Error(NoPriorBinding) if the drone has no committed block.
RevocationToken issue_revocation_token(const KeyPair& operator_key, const Ledger& ledger,
                                       const Transaction& current);

/// Validator's endorsement of an approved transaction: Sign_SV(digest(tx)).
Signature endorse(const KeyPair& validator, const Transaction& tx);

// -- Step-wise validation (driven by the simulator) ---------------------------

RejectReason registration_precheck(const Transaction& tx, const Ledger& ledger, Tick now);
RejectReason revocation_precheck(const Transaction& tx, const Ledger& ledger);

/// Interprets a retrieved registry token as phi0 and completes the registration challenge.
ValidationOutcome finish_registration(const KeyPair& validator, const Transaction& tx,
                                      const Signature& t0, const std::optional<Bytes>& retrieved);

/// Interprets a retrieved registry token as phi1 and completes the revocation challenge.
ValidationOutcome finish_revocation(const KeyPair& validator, const Transaction& tx,
                                    const Ledger& ledger, const std::optional<Bytes>& retrieved);

/// Decodes a registry token as a signature claimed by `signer`.
std::optional<Signature> token_signature(const std::optional<Bytes>& token, const PublicKey& signer);

// -- One-shot validation ---------------------------------------------------

struct PollPolicy {
  int retries = 3;
  /// Invoked before each retrieval attempt (0-based); lets callers model
  /// time passing between polls.
  std::function<void(int attempt)> before_poll;
};

/// Delivers t0 to the operator, who is expected to place phi0 in the
/// registry before the validator polls.
using TokenDelivery = std::function<void(const Signature& t0)>;

ValidationOutcome validate_registration(const KeyPair& validator, const Transaction& tx,
                                        const Ledger& ledger, const Registry& registry, Tick now,
                                        const TokenDelivery& deliver, const PollPolicy& policy = {},
                                        std::size_t replica = 0);

ValidationOutcome validate_revocation(const KeyPair& validator, const Transaction& tx,
                                      const Ledger& ledger, const Registry& registry, Tick now,
                                      const PollPolicy& policy = {}, std::size_t replica = 0);

/// Re-checks a proposer's transcript against the ledger without repeating
/// token placement. Returns None when the transcript proves the claim.
RejectReason verify_transcript(const PublicKey& proposer, const Transaction& tx,
                               const ChallengeTranscript& transcript, const Ledger& ledger,
                               Tick now);

}  // namespace dpki
