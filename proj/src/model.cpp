#include "dronepki/model.hpp"

#include "dronepki/error.hpp"

namespace dpki {

std::string_view to_string(CrtType type) {
  return type == CrtType::Initial ? "initial" : "revoke";
}

CrtType crt_type_from_string(std::string_view s) {
  if (s == "initial") return CrtType::Initial;
  if (s == "revoke") return CrtType::Revoke;
  throw Error(Errc::DecodeError, "unknown crt type '" + std::string(s) + "'");
}

std::string_view to_string(ChallengeKind kind) {
  switch (kind) {
    case ChallengeKind::Registration: return "registration";
    case ChallengeKind::Revocation: return "revocation";
    case ChallengeKind::Handshake: return "handshake";
  }
  return "unknown";
}

namespace {

CrtType decode_crt_type(std::uint8_t raw) {
  if (raw > 1) throw Error(Errc::DecodeError, "crt type out of range");
  return static_cast<CrtType>(raw);
}

Signature read_signature(CanonicalReader& r, const PublicKey& signer) {
  auto f = r.field();
  return Signature{Bytes(f.begin(), f.end()), signer};
}

}  // namespace

Bytes signing_bytes(const Transaction& tx) {
  CanonicalWriter w;
  w.u8(static_cast<std::uint8_t>(tx.crt_type))
      .field(tx.drone_name)
      .field(tx.operator_pubkey.view())
      .u64(tx.expiry)
      .field(tx.csr_digest.view());
  return std::move(w).bytes();
}

Bytes canonical_bytes(const Transaction& tx) {
  CanonicalWriter w;
  w.u8(static_cast<std::uint8_t>(tx.crt_type))
      .field(tx.drone_name)
      .field(tx.operator_pubkey.view())
      .field(tx.operator_signature.view())
      .u64(tx.expiry)
      .field(tx.csr_digest.view());
  return std::move(w).bytes();
}

Transaction decode_transaction(ByteView bytes) {
  CanonicalReader r(bytes);
  Transaction tx;
  tx.crt_type = decode_crt_type(r.u8());
  tx.drone_name = r.string_field();
  tx.operator_pubkey.bytes = r.fixed<kPublicKeySize>();
  tx.operator_signature = read_signature(r, tx.operator_pubkey);
  tx.expiry = r.u64();
  tx.csr_digest.bytes = r.fixed<kDigestSize>();
  r.expect_done();
  return tx;
}

bool signature_valid(const Transaction& tx) {
  return verify(tx.operator_pubkey, signing_bytes(tx), tx.operator_signature);
}

Transaction make_transaction(CrtType type, std::string drone_name, const KeyPair& operator_key,
                             Tick expiry, const Digest& csr_digest) {
  if (drone_name.empty()) throw Error(Errc::EmptyDroneName);
  if (drone_name.size() > kMaxDroneNameLength) {
    throw Error(Errc::MalformedTransaction, "drone name longer than 253 characters");
  }
  Transaction tx;
  tx.crt_type = type;
  tx.drone_name = std::move(drone_name);
  tx.operator_pubkey = operator_key.public_key();
  tx.expiry = expiry;
  tx.csr_digest = csr_digest;
  tx.operator_signature = operator_key.sign(signing_bytes(tx));
  return tx;
}

Bytes canonical_bytes(const BlockHeader& header) {
  CanonicalWriter w;
  w.u64(header.serial_number)
      .u8(static_cast<std::uint8_t>(header.crt_type))
      .field(header.global_prev.view());
  if (header.service_prev) {
    w.field(header.service_prev->view());
  } else {
    w.empty();
  }
  w.u64(header.timestamp);
  return std::move(w).bytes();
}

Bytes canonical_bytes(const BlockBody& body) {
  CanonicalWriter w;
  w.field(body.drone_name)
      .field(body.operator_pubkey.view())
      .field(body.operator_signature.view())
      .u64(body.expiry)
      .field(body.csr_digest.view());
  return std::move(w).bytes();
}

Bytes canonical_bytes(const BlockFooter& footer) {
  CanonicalWriter w;
  w.u64(footer.validator_count).u64(footer.approvals.size());
  for (const auto& a : footer.approvals) {
    w.field(a.validator.view()).field(a.signature.view());
  }
  return std::move(w).bytes();
}

Bytes canonical_bytes(const Block& block) {
  CanonicalWriter w;
  w.field(canonical_bytes(block.header))
      .field(canonical_bytes(block.body))
      .field(canonical_bytes(block.footer));
  return std::move(w).bytes();
}

BlockHeader decode_header(ByteView bytes) {
  CanonicalReader r(bytes);
  BlockHeader h;
  h.serial_number = r.u64();
  h.crt_type = decode_crt_type(r.u8());
  h.global_prev.bytes = r.fixed<kDigestSize>();
  auto service = r.field();
  if (!service.empty()) {
    if (service.size() != kDigestSize) throw Error(Errc::DecodeError, "bad service pointer");
    Digest d;
    std::copy(service.begin(), service.end(), d.bytes.begin());
    h.service_prev = d;
  }
  h.timestamp = r.u64();
  r.expect_done();
  return h;
}

BlockBody decode_body(ByteView bytes) {
  CanonicalReader r(bytes);
  BlockBody b;
  b.drone_name = r.string_field();
  b.operator_pubkey.bytes = r.fixed<kPublicKeySize>();
  b.operator_signature = read_signature(r, b.operator_pubkey);
  b.expiry = r.u64();
  b.csr_digest.bytes = r.fixed<kDigestSize>();
  r.expect_done();
  return b;
}

BlockFooter decode_footer(ByteView bytes) {
  CanonicalReader r(bytes);
  BlockFooter f;
  f.validator_count = r.u64();
  auto count = r.u64();
  for (std::uint64_t i = 0; i < count; ++i) {
    Approval a;
    a.validator.bytes = r.fixed<kPublicKeySize>();
    a.signature = read_signature(r, a.validator);
    f.approvals.push_back(std::move(a));
  }
  r.expect_done();
  return f;
}

Block decode_block(ByteView bytes) {
  CanonicalReader r(bytes);
  Block b;
  b.header = decode_header(r.field());
  b.body = decode_body(r.field());
  b.footer = decode_footer(r.field());
  r.expect_done();
  return b;
}

Digest signing_digest(const BlockHeader& header, const BlockBody& body) {
  CanonicalWriter w;
  w.field(canonical_bytes(header)).field(canonical_bytes(body));
  return digest(w.bytes());
}

Digest block_digest(const Block& block) { return digest(canonical_bytes(block)); }

BlockBody body_from(const Transaction& tx) {
  return BlockBody{tx.drone_name, tx.operator_pubkey, tx.operator_signature, tx.expiry,
                   tx.csr_digest};
}

Transaction transaction_from(CrtType type, const BlockBody& body) {
  return Transaction{type,        body.drone_name, body.operator_pubkey, body.operator_signature,
                     body.expiry, body.csr_digest};
}

bool ChallengeTranscript::well_formed() const {
  switch (kind) {
    case ChallengeKind::Registration: return t0.has_value() && phi0.has_value();
    case ChallengeKind::Revocation: return t1.has_value() && phi1.has_value();
    case ChallengeKind::Handshake: return handshake.has_value();
  }
  return false;
}

}  // namespace dpki
