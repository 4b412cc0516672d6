#pragma once

// Encrypt-then-sign issuance handshake between a drone operator (DO, key a /
// ga) and a service validator (SV, key b / gb):
//
//   DO: certreq = concat(csr, dronename); encreq = seal(gb, certreq);
//       signature = sign(a, encreq)                              -> SV
//   SV: verify(ga, encreq, signature); d = open(b, encreq);
//       token = concat(gb, tokentx); enctoken = seal(ga, token);
//       tokensig = sign(b, enctoken)                             -> DO
//   DO: verify(gb, enctoken, tokensig); enctokendo = seal(gb, enctoken);
//       sigtokendo = sign(a, enctokendo)                         -> SV
//   SV: verify(ga, enctokendo, sigtokendo);
//       initialtoken = open(b, enctokendo); assert initialtoken == enctoken

#include <array>
#include <functional>
#include <optional>
#include <string>

#include "dronepki/crypto.hpp"
#include "dronepki/error.hpp"
#include "dronepki/model.hpp"

namespace dpki {

enum class HandshakeStep {
  SvVerifyRequest,
  SvOpenRequest,
  DoVerifyToken,
  SvVerifyTokenReturn,
  SvOpenTokenReturn,
  SvAssert,
};

/// The six values that cross the wire.
enum class HandshakeMessage { EncReq, Signature, EncToken, TokenSig, EncTokenDo, SigTokenDo };

inline constexpr std::array<HandshakeMessage, 6> kHandshakeMessages = {
    HandshakeMessage::EncReq,   HandshakeMessage::Signature,  HandshakeMessage::EncToken,
    HandshakeMessage::TokenSig, HandshakeMessage::EncTokenDo, HandshakeMessage::SigTokenDo};

std::string_view to_string(HandshakeStep step);
std::string_view to_string(HandshakeMessage message);

class HandshakeAbort : public Error {
 public:
  HandshakeAbort(HandshakeStep step, std::string cause);

  HandshakeStep step() const noexcept { return step_; }
  const std::string& cause() const noexcept { return cause_; }

 private:
  HandshakeStep step_;
  std::string cause_;
};

Bytes certificate_request(ByteView csr, std::string_view drone_name);
Bytes certificate_request(const Transaction& tx);

struct HandshakeRequest {
  Bytes certreq;
  SealedEnvelope encreq;
  Signature signature;
};

struct HandshakeChallenge {
  Bytes opened_request;  // d
  Bytes tokentx;
  Bytes token;
  SealedEnvelope enctoken;
  Signature tokensig;
};

struct HandshakeResponse {
  SealedEnvelope enctokendo;
  Signature sigtokendo;
};

HandshakeRequest handshake_request(const KeyPair& operator_key, const PublicKey& validator,
                                   ByteView certreq, const Seed& seal_seed);

/// Throws HandshakeAbort at SvVerifyRequest or SvOpenRequest. When
/// `expected_certreq` is given the opened request must equal it.
HandshakeChallenge handshake_challenge(const KeyPair& validator, const PublicKey& operator_key,
                                       const SealedEnvelope& encreq, const Signature& signature,
                                       ByteView tokentx, const Seed& seal_seed,
                                       const std::optional<Bytes>& expected_certreq = {});

/// Throws HandshakeAbort at DoVerifyToken.
HandshakeResponse handshake_respond(const KeyPair& operator_key, const PublicKey& validator,
                                    const SealedEnvelope& enctoken, const Signature& tokensig,
                                    const Seed& seal_seed);

/// Throws HandshakeAbort at SvVerifyTokenReturn, SvOpenTokenReturn or SvAssert.
HandshakeRecord handshake_finish(const KeyPair& validator, const PublicKey& operator_key,
                                 const HandshakeRequest& request,
                                 const HandshakeChallenge& challenge,
                                 const HandshakeResponse& response);

/// Wire form of the operator's final message, as placed in the registry.
Bytes encode_response(const HandshakeResponse& response);
HandshakeResponse decode_response(ByteView bytes, const PublicKey& validator,
                                  const PublicKey& operator_key);

/// Sees (and may rewrite) every wire value before the receiver acts on it.
using HandshakeInterceptor = std::function<void(HandshakeMessage, Bytes& wire)>;

struct HandshakeParams {
  Bytes csr;
  std::string drone_name;
  Bytes tokentx;  // generated from `seed` when empty
  Seed seed{};
};

HandshakeRecord run_handshake(const KeyPair& operator_key, const KeyPair& validator,
                              const HandshakeParams& params,
                              const HandshakeInterceptor& intercept = {});

/// Signature and assertion checks a third party can make on a completed
/// record without the validator's secret key.
bool handshake_record_consistent(const HandshakeRecord& record, const PublicKey& operator_key,
                                 const PublicKey& validator);

}  // namespace dpki
