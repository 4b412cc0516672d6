#include "dronepki/serialization.hpp"

#include "dronepki/error.hpp"

namespace dpki {

Json hex_json(ByteView bytes) { return to_hex(bytes); }

Bytes bytes_from_json(const Json& j) {
  if (!j.is_string()) throw Error(Errc::DecodeError, "expected hex string");
  return from_hex(j.get<std::string>());
}

void to_json(Json& j, const Digest& d) { j = d.hex(); }
void from_json(const Json& j, Digest& d) { d = Digest::from_hex(j.get<std::string>()); }

void to_json(Json& j, const PublicKey& k) { j = k.hex(); }
void from_json(const Json& j, PublicKey& k) { k = PublicKey::from_hex(j.get<std::string>()); }

void to_json(Json& j, const Signature& s) {
  j = Json::object();
  j["sig"] = to_hex(s.view());
  j["signer"] = s.signer;
}

void from_json(const Json& j, Signature& s) {
  s.bytes = bytes_from_json(j.at("sig"));
  s.signer = j.at("signer").get<PublicKey>();
}

void to_json(Json& j, const SealedEnvelope& e) {
  j = Json::object();
  j["ciphertext"] = to_hex(as_bytes(e.ciphertext));
  j["recipient"] = e.recipient;
}

void from_json(const Json& j, SealedEnvelope& e) {
  e.ciphertext = bytes_from_json(j.at("ciphertext"));
  e.recipient = j.at("recipient").get<PublicKey>();
}

void to_json(Json& j, const Transaction& tx) {
  j = Json::object();
  j["crt_type"] = to_string(tx.crt_type);
  j["drone_name"] = tx.drone_name;
  j["operator_pubkey"] = tx.operator_pubkey;
  j["operator_signature"] = to_hex(tx.operator_signature.view());
  j["expiry"] = tx.expiry;
  j["csr_digest"] = tx.csr_digest;
}

void from_json(const Json& j, Transaction& tx) {
  tx.crt_type = crt_type_from_string(j.at("crt_type").get<std::string>());
  tx.drone_name = j.at("drone_name").get<std::string>();
  tx.operator_pubkey = j.at("operator_pubkey").get<PublicKey>();
  tx.operator_signature = {bytes_from_json(j.at("operator_signature")), tx.operator_pubkey};
  tx.expiry = j.at("expiry").get<Tick>();
  tx.csr_digest = j.at("csr_digest").get<Digest>();
}

void to_json(Json& j, const BlockHeader& h) {
  j = Json::object();
  j["serial_number"] = h.serial_number;
  j["crt_type"] = to_string(h.crt_type);
  j["global_prev"] = h.global_prev;
  j["service_prev"] = h.service_prev ? Json(*h.service_prev) : Json(nullptr);
  j["timestamp"] = h.timestamp;
}

void from_json(const Json& j, BlockHeader& h) {
  h.serial_number = j.at("serial_number").get<std::uint64_t>();
  h.crt_type = crt_type_from_string(j.at("crt_type").get<std::string>());
  h.global_prev = j.at("global_prev").get<Digest>();
  const auto& sp = j.at("service_prev");
  if (sp.is_null()) {
    h.service_prev.reset();
  } else {
    h.service_prev = sp.get<Digest>();
  }
  h.timestamp = j.at("timestamp").get<Tick>();
}

void to_json(Json& j, const BlockBody& b) {
  j = Json::object();
  j["drone_name"] = b.drone_name;
  j["operator_pubkey"] = b.operator_pubkey;
  j["operator_signature"] = to_hex(b.operator_signature.view());
  j["expiry"] = b.expiry;
  j["csr_digest"] = b.csr_digest;
}

void from_json(const Json& j, BlockBody& b) {
  b.drone_name = j.at("drone_name").get<std::string>();
  b.operator_pubkey = j.at("operator_pubkey").get<PublicKey>();
  b.operator_signature = {bytes_from_json(j.at("operator_signature")), b.operator_pubkey};
  b.expiry = j.at("expiry").get<Tick>();
  b.csr_digest = j.at("csr_digest").get<Digest>();
}

void to_json(Json& j, const Approval& a) {
  j = Json::object();
  j["validator"] = a.validator;
  j["signature"] = to_hex(a.signature.view());
}

void from_json(const Json& j, Approval& a) {
  a.validator = j.at("validator").get<PublicKey>();
  a.signature = {bytes_from_json(j.at("signature")), a.validator};
}

void to_json(Json& j, const BlockFooter& f) {
  j = Json::object();
  j["validator_count"] = f.validator_count;
  j["approvals"] = f.approvals;
}

void from_json(const Json& j, BlockFooter& f) {
  f.validator_count = j.at("validator_count").get<std::uint64_t>();
  f.approvals = j.at("approvals").get<std::vector<Approval>>();
}

void to_json(Json& j, const Block& b) {
  j = Json::object();
  j["header"] = b.header;
  j["body"] = b.body;
  j["footer"] = b.footer;
}

void from_json(const Json& j, Block& b) {
  b.header = j.at("header").get<BlockHeader>();
  b.body = j.at("body").get<BlockBody>();
  b.footer = j.at("footer").get<BlockFooter>();
}

void to_json(Json& j, const HandshakeRecord& r) {
  j = Json::object();
  j["certreq"] = to_hex(as_bytes(r.certreq));
  j["encreq"] = r.encreq;
  j["signature"] = r.signature;
  j["tokentx"] = to_hex(as_bytes(r.tokentx));
  j["token"] = to_hex(as_bytes(r.token));
  j["enctoken"] = r.enctoken;
  j["tokensig"] = r.tokensig;
  j["enctokendo"] = r.enctokendo;
  j["sigtokendo"] = r.sigtokendo;
  j["initialtoken"] = to_hex(as_bytes(r.initialtoken));
}

void from_json(const Json& j, HandshakeRecord& r) {
  r.certreq = bytes_from_json(j.at("certreq"));
  r.encreq = j.at("encreq").get<SealedEnvelope>();
  r.signature = j.at("signature").get<Signature>();
  r.tokentx = bytes_from_json(j.at("tokentx"));
  r.token = bytes_from_json(j.at("token"));
  r.enctoken = j.at("enctoken").get<SealedEnvelope>();
  r.tokensig = j.at("tokensig").get<Signature>();
  r.enctokendo = j.at("enctokendo").get<SealedEnvelope>();
  r.sigtokendo = j.at("sigtokendo").get<Signature>();
  r.initialtoken = bytes_from_json(j.at("initialtoken"));
}

namespace {
template <typename T>
Json opt(const std::optional<T>& v) {
  return v ? Json(*v) : Json(nullptr);
}

template <typename T>
std::optional<T> read_opt(const Json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<T>();
}
}  // namespace

void to_json(Json& j, const ChallengeTranscript& t) {
  j = Json::object();
  j["kind"] = to_string(t.kind);
  j["t0"] = opt(t.t0);
  j["phi0"] = opt(t.phi0);
  j["t1"] = opt(t.t1);
  j["phi1"] = opt(t.phi1);
  j["handshake"] = opt(t.handshake);
}

void from_json(const Json& j, ChallengeTranscript& t) {
  auto kind = j.at("kind").get<std::string>();
  if (kind == "registration") {
    t.kind = ChallengeKind::Registration;
  } else if (kind == "revocation") {
    t.kind = ChallengeKind::Revocation;
  } else if (kind == "handshake") {
    t.kind = ChallengeKind::Handshake;
  } else {
    throw Error(Errc::DecodeError, "unknown transcript kind '" + kind + "'");
  }
  t.t0 = read_opt<Signature>(j, "t0");
  t.phi0 = read_opt<Signature>(j, "phi0");
  t.t1 = read_opt<Digest>(j, "t1");
  t.phi1 = read_opt<Signature>(j, "phi1");
  t.handshake = read_opt<HandshakeRecord>(j, "handshake");
}

}  // namespace dpki
