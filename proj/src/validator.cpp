#include "dronepki/validator.hpp"

#include "dronepki/handshake.hpp"

namespace dpki {

std::string_view to_string(Verdict v) { return v == Verdict::Approve ? "approve" : "reject"; }

namespace {

constexpr std::pair<RejectReason, std::string_view> kReasonCodes[] = {
    {RejectReason::None, "none"},
    {RejectReason::WrongCrtType, "wrong_crt_type"},
    {RejectReason::BadOperatorSignature, "bad_operator_signature"},
    {RejectReason::DomainAlreadyBound, "domain_already_bound"},
    {RejectReason::TokenMissing, "token_missing"},
    {RejectReason::TokenMismatch, "token_mismatch"},
    {RejectReason::NoPriorBinding, "no_prior_binding"},
    {RejectReason::OperatorKeyMismatch, "operator_key_mismatch"},
    {RejectReason::HandshakeAbort, "handshake_abort"},
};

ValidationOutcome reject(RejectReason reason, ChallengeTranscript transcript = {}) {
  ValidationOutcome out;
  out.verdict = Verdict::Reject;
  out.reason = reason;
  out.transcript = std::move(transcript);
  return out;
}

ValidationOutcome approve(const KeyPair& validator, const Transaction& tx,
                          ChallengeTranscript transcript) {
  ValidationOutcome out;
  out.verdict = Verdict::Approve;
  out.transcript = std::move(transcript);
  out.validator_signature = endorse(validator, tx);
  return out;
}

}  // namespace

std::string_view reason_code(RejectReason reason) {
  for (auto [r, code] : kReasonCodes) {
    if (r == reason) return code;
  }
  return "none";
}

RejectReason reason_from_code(std::string_view code) {
  for (auto [r, c] : kReasonCodes) {
    if (c == code) return r;
  }
  throw Error(Errc::DecodeError, "unknown reject reason '" + std::string(code) + "'");
}

bool check_key_possession(const Transaction& tx) { return signature_valid(tx); }

bool check_domain_absent(const Ledger& ledger, const Transaction& tx, Tick now) {
  return ledger.certificate_status(tx.drone_name, now) != CertStatus::Active;
}

Digest registration_token_message(const Transaction& tx, const PublicKey& validator) {
  return digest(concat(canonical_bytes(tx), validator.view()));
}

Signature issue_registration_token(const KeyPair& validator, const Transaction& tx) {
  return validator.sign(registration_token_message(tx, validator.public_key()).view());
}

Signature operator_sign_token(const KeyPair& operator_key, const Signature& t0) {
  return operator_key.sign(t0.view());
}

Digest revocation_token_digest(const BlockBody& previous, const Transaction& current,
                               const PublicKey& operator_key) {
  CanonicalWriter w;
  w.field(canonical_bytes(previous));
  w.field(canonical_bytes(current));
  w.field(operator_key.view());
  return digest(w.bytes());
}

RevocationToken issue_revocation_token(const KeyPair& operator_key, const Ledger& ledger,
                                       const Transaction& current) {
  const Block* prev = ledger.latest_for(current.drone_name);
  if (!prev) {
    throw Error(Errc::NoPriorBinding, "no committed block for '" + current.drone_name + "'");
  }
  RevocationToken token;
  token.t1 = revocation_token_digest(prev->body, current, operator_key.public_key());
  token.phi1 = operator_key.sign(token.t1.view());
  return token;
}

Signature endorse(const KeyPair& validator, const Transaction& tx) {
  return validator.sign(digest(canonical_bytes(tx)).view());
}

RejectReason registration_precheck(const Transaction& tx, const Ledger& ledger, Tick now) {
  if (tx.crt_type != CrtType::Initial) return RejectReason::WrongCrtType;
  if (!check_key_possession(tx)) return RejectReason::BadOperatorSignature;
  if (!check_domain_absent(ledger, tx, now)) return RejectReason::DomainAlreadyBound;
  return RejectReason::None;
}

RejectReason revocation_precheck(const Transaction& tx, const Ledger& ledger) {
  if (tx.crt_type != CrtType::Revoke) return RejectReason::WrongCrtType;
  if (!check_key_possession(tx)) return RejectReason::BadOperatorSignature;
  const Block* prev = ledger.latest_for(tx.drone_name);
  if (!prev || prev->header.crt_type != CrtType::Initial) return RejectReason::NoPriorBinding;
  if (prev->body.operator_pubkey != tx.operator_pubkey) return RejectReason::OperatorKeyMismatch;
  return RejectReason::None;
}

std::optional<Signature> token_signature(const std::optional<Bytes>& token,
                                         const PublicKey& signer) {
  if (!token) return std::nullopt;
  return Signature{*token, signer};
}

ValidationOutcome finish_registration(const KeyPair& validator, const Transaction& tx,
                                      const Signature& t0, const std::optional<Bytes>& retrieved) {
  ChallengeTranscript transcript;
  transcript.kind = ChallengeKind::Registration;
  transcript.t0 = t0;
  transcript.phi0 = token_signature(retrieved, tx.operator_pubkey);
  if (!transcript.phi0) return reject(RejectReason::TokenMissing, std::move(transcript));
  if (!verify(tx.operator_pubkey, t0.view(), *transcript.phi0)) {
    return reject(RejectReason::TokenMismatch, std::move(transcript));
  }
  return approve(validator, tx, std::move(transcript));
}

ValidationOutcome finish_revocation(const KeyPair& validator, const Transaction& tx,
                                    const Ledger& ledger, const std::optional<Bytes>& retrieved) {
  ChallengeTranscript transcript;
  transcript.kind = ChallengeKind::Revocation;
  const Block* prev = ledger.latest_for(tx.drone_name);
  if (!prev) return reject(RejectReason::NoPriorBinding, std::move(transcript));
  transcript.t1 = revocation_token_digest(prev->body, tx, tx.operator_pubkey);
  transcript.phi1 = token_signature(retrieved, tx.operator_pubkey);
  if (!transcript.phi1) return reject(RejectReason::TokenMissing, std::move(transcript));
  if (!verify(tx.operator_pubkey, transcript.t1->view(), *transcript.phi1)) {
    return reject(RejectReason::TokenMismatch, std::move(transcript));
  }
  return approve(validator, tx, std::move(transcript));
}

namespace {

// Polls up to policy.retries times, stopping at the first token accepted by
// `accept`. Returns the last retrieved value.
template <typename Accept>
std::optional<Bytes> poll(const Registry& registry, std::string_view drone, std::size_t replica,
                          const PollPolicy& policy, Accept&& accept) {
  std::optional<Bytes> last;
  const int attempts = policy.retries < 1 ? 1 : policy.retries;
  for (int attempt = 0; attempt < attempts; ++attempt) {
    if (policy.before_poll) policy.before_poll(attempt);
    last = registry.retrieve_token(drone, replica).first;
    if (last && accept(*last)) break;
  }
  return last;
}

}  // namespace

ValidationOutcome validate_registration(const KeyPair& validator, const Transaction& tx,
                                        const Ledger& ledger, const Registry& registry, Tick now,
                                        const TokenDelivery& deliver, const PollPolicy& policy,
                                        std::size_t replica) {
  if (auto r = registration_precheck(tx, ledger, now); r != RejectReason::None) return reject(r);
  const Signature t0 = issue_registration_token(validator, tx);
  if (deliver) deliver(t0);
  auto retrieved = poll(registry, tx.drone_name, replica, policy, [&](const Bytes& token) {
    return verify(tx.operator_pubkey, t0.view(), Signature{token, tx.operator_pubkey});
  });
  return finish_registration(validator, tx, t0, retrieved);
}

ValidationOutcome validate_revocation(const KeyPair& validator, const Transaction& tx,
                                      const Ledger& ledger, const Registry& registry, Tick,
                                      const PollPolicy& policy, std::size_t replica) {
  if (auto r = revocation_precheck(tx, ledger); r != RejectReason::None) return reject(r);
  const Digest t1 = revocation_token_digest(ledger.latest_for(tx.drone_name)->body, tx,
                                            tx.operator_pubkey);
  auto retrieved = poll(registry, tx.drone_name, replica, policy, [&](const Bytes& token) {
    return verify(tx.operator_pubkey, t1.view(), Signature{token, tx.operator_pubkey});
  });
  return finish_revocation(validator, tx, ledger, retrieved);
}

RejectReason verify_transcript(const PublicKey& proposer, const Transaction& tx,
                               const ChallengeTranscript& transcript, const Ledger& ledger,
                               Tick now) {
  switch (transcript.kind) {
    case ChallengeKind::Registration: {
      if (auto r = registration_precheck(tx, ledger, now); r != RejectReason::None) return r;
      if (!transcript.t0 || !transcript.phi0) return RejectReason::TokenMissing;
      const Digest msg = registration_token_message(tx, proposer);
      if (transcript.t0->signer != proposer || !verify(proposer, msg.view(), *transcript.t0)) {
        return RejectReason::TokenMismatch;
      }
      if (!verify(tx.operator_pubkey, transcript.t0->view(), *transcript.phi0)) {
        return RejectReason::TokenMismatch;
      }
      return RejectReason::None;
    }
    case ChallengeKind::Revocation: {
      if (auto r = revocation_precheck(tx, ledger); r != RejectReason::None) return r;
      if (!transcript.t1 || !transcript.phi1) return RejectReason::TokenMissing;
      const Digest t1 = revocation_token_digest(ledger.latest_for(tx.drone_name)->body, tx,
                                                tx.operator_pubkey);
      if (t1 != *transcript.t1) return RejectReason::TokenMismatch;
      if (!verify(tx.operator_pubkey, t1.view(), *transcript.phi1)) {
        return RejectReason::TokenMismatch;
      }
      return RejectReason::None;
    }
    case ChallengeKind::Handshake: {
      if (auto r = registration_precheck(tx, ledger, now); r != RejectReason::None) return r;
      if (!transcript.handshake) return RejectReason::TokenMissing;
      const HandshakeRecord& h = *transcript.handshake;
      if (h.certreq != certificate_request(tx)) return RejectReason::TokenMismatch;
      if (!handshake_record_consistent(h, tx.operator_pubkey, proposer)) {
        return RejectReason::HandshakeAbort;
      }
      return RejectReason::None;
    }
  }
  return RejectReason::TokenMissing;
}

}  // namespace dpki
