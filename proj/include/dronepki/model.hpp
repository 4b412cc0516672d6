#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dronepki/bytes.hpp"
#include "dronepki/crypto.hpp"

namespace dpki {

/// Logical simulation time.
using Tick = std::uint64_t;

inline constexpr std::size_t kMaxDroneNameLength = 253;

enum class CrtType : std::uint8_t { Initial = 0, Revoke = 1 };

std::string_view to_string(CrtType type);
CrtType crt_type_from_string(std::string_view s);

/// A certificate request. `operator_pubkey` doubles as the operator's user id.
/// For revocations `csr_digest` carries the digest of the certificate body
/// being revoked and `expiry` is unused (zero).
struct Transaction {
  CrtType crt_type = CrtType::Initial;
  std::string drone_name;
  PublicKey operator_pubkey;
  Signature operator_signature;
  Tick expiry = 0;
  Digest csr_digest;

  bool operator==(const Transaction&) const = default;
};

/// Bytes covered by the operator signature: everything except the signature.
Bytes signing_bytes(const Transaction& tx);
Bytes canonical_bytes(const Transaction& tx);
Transaction decode_transaction(ByteView bytes);

bool signature_valid(const Transaction& tx);

/// Throws Error(EmptyDroneName) for an empty name and
/// Error(MalformedTransaction) for one longer than kMaxDroneNameLength.
Transaction make_transaction(CrtType type, std::string drone_name, const KeyPair& operator_key,
                             Tick expiry, const Digest& csr_digest);

struct BlockHeader {
  std::uint64_t serial_number = 0;
  CrtType crt_type = CrtType::Initial;
  Digest global_prev;                  // zero for the first block
  std::optional<Digest> service_prev;  // absent for a drone's first block
  Tick timestamp = 0;                  // commit tick

  bool operator==(const BlockHeader&) const = default;
};

struct BlockBody {
  std::string drone_name;
  PublicKey operator_pubkey;
  Signature operator_signature;
  Tick expiry = 0;
  Digest csr_digest;

  bool operator==(const BlockBody&) const = default;
};

struct Approval {
  PublicKey validator;
  Signature signature;  // over signing_digest(header, body)

  bool operator==(const Approval&) const = default;
};

struct BlockFooter {
  std::uint64_t validator_count = 0;  // permissioned set size at commit
  std::vector<Approval> approvals;

  bool operator==(const BlockFooter&) const = default;
};

struct Block {
  BlockHeader header;
  BlockBody body;
  BlockFooter footer;

  bool operator==(const Block&) const = default;
};

Bytes canonical_bytes(const BlockHeader& header);
Bytes canonical_bytes(const BlockBody& body);
Bytes canonical_bytes(const BlockFooter& footer);
Bytes canonical_bytes(const Block& block);

BlockHeader decode_header(ByteView bytes);
BlockBody decode_body(ByteView bytes);
BlockFooter decode_footer(ByteView bytes);
Block decode_block(ByteView bytes);

/// digest(header || body): what validators sign.
Digest signing_digest(const BlockHeader& header, const BlockBody& body);
/// Digest of the complete block; the value hash pointers refer to.
Digest block_digest(const Block& block);

BlockBody body_from(const Transaction& tx);
Transaction transaction_from(CrtType type, const BlockBody& body);

enum class ChallengeKind : std::uint8_t { Registration, Revocation, Handshake };

std::string_view to_string(ChallengeKind kind);

// Full record of the encrypt-then-sign issuance handshake, as seen by the
// service validator once it completes.
struct HandshakeRecord {
  Bytes certreq;
  SealedEnvelope encreq;
  Signature signature;
  Bytes tokentx;
  Bytes token;
  SealedEnvelope enctoken;
  Signature tokensig;
  SealedEnvelope enctokendo;
  Signature sigtokendo;
  Bytes initialtoken;

  bool operator==(const HandshakeRecord&) const = default;
};

struct ChallengeTranscript {
  ChallengeKind kind = ChallengeKind::Registration;
  std::optional<Signature> t0;
  std::optional<Signature> phi0;
  std::optional<Digest> t1;
  std::optional<Signature> phi1;
  std::optional<HandshakeRecord> handshake;

  bool operator==(const ChallengeTranscript&) const = default;

  /// Registration carries t0/phi0, revocation t1/phi1, handshake a record.
  bool well_formed() const;
};

}  // namespace dpki
