#include "dronepki/handshake.hpp"

namespace dpki {

std::string_view to_string(HandshakeStep step) {
  switch (step) {
    case HandshakeStep::SvVerifyRequest: return "sv_verify_request";
    case HandshakeStep::SvOpenRequest: return "sv_open_request";
    case HandshakeStep::DoVerifyToken: return "do_verify_token";
    case HandshakeStep::SvVerifyTokenReturn: return "sv_verify_token_return";
    case HandshakeStep::SvOpenTokenReturn: return "sv_open_token_return";
    case HandshakeStep::SvAssert: return "sv_assert";
  }
  return "unknown";
}

std::string_view to_string(HandshakeMessage message) {
  switch (message) {
    case HandshakeMessage::EncReq: return "encreq";
    case HandshakeMessage::Signature: return "signature";
    case HandshakeMessage::EncToken: return "enctoken";
    case HandshakeMessage::TokenSig: return "tokensig";
    case HandshakeMessage::EncTokenDo: return "enctokendo";
    case HandshakeMessage::SigTokenDo: return "sigtokendo";
  }
  return "unknown";
}

HandshakeAbort::HandshakeAbort(HandshakeStep step, std::string cause)
    : Error(Errc::HandshakeAbort, std::string(to_string(step)) + ": " + cause),
      step_(step),
      cause_(std::move(cause)) {}

Bytes certificate_request(ByteView csr, std::string_view drone_name) {
  return concat(csr, as_bytes(drone_name));
}

Bytes certificate_request(const Transaction& tx) {
  return certificate_request(tx.csr_digest.view(), tx.drone_name);
}

HandshakeRequest handshake_request(const KeyPair& operator_key, const PublicKey& validator,
                                   ByteView certreq, const Seed& seal_seed) {
  HandshakeRequest req;
  req.certreq.assign(certreq.begin(), certreq.end());
  req.encreq = seal(validator, certreq, seal_seed);
  req.signature = operator_key.sign(req.encreq.ciphertext);
  return req;
}

HandshakeChallenge handshake_challenge(const KeyPair& validator, const PublicKey& operator_key,
                                       const SealedEnvelope& encreq, const Signature& signature,
                                       ByteView tokentx, const Seed& seal_seed,
                                       const std::optional<Bytes>& expected_certreq) {
  if (!verify(operator_key, encreq.ciphertext, signature)) {
    throw HandshakeAbort(HandshakeStep::SvVerifyRequest, "request signature does not verify");
  }
  HandshakeChallenge ch;
  try {
    ch.opened_request = validator.open(encreq);
  } catch (const Error& e) {
    throw HandshakeAbort(HandshakeStep::SvOpenRequest, e.what());
  }
  if (expected_certreq && ch.opened_request != *expected_certreq) {
    throw HandshakeAbort(HandshakeStep::SvOpenRequest, "request does not match transaction");
  }
  ch.tokentx.assign(tokentx.begin(), tokentx.end());
  ch.token = concat(validator.public_key().view(), tokentx);
  ch.enctoken = seal(operator_key, ch.token, seal_seed);
  ch.tokensig = validator.sign(ch.enctoken.ciphertext);
  return ch;
}

HandshakeResponse handshake_respond(const KeyPair& operator_key, const PublicKey& validator,
                                    const SealedEnvelope& enctoken, const Signature& tokensig,
                                    const Seed& seal_seed) {
  if (!verify(validator, enctoken.ciphertext, tokensig)) {
    throw HandshakeAbort(HandshakeStep::DoVerifyToken, "token signature does not verify");
  }
  HandshakeResponse resp;
  resp.enctokendo = seal(validator, enctoken.ciphertext, seal_seed);
  resp.sigtokendo = operator_key.sign(resp.enctokendo.ciphertext);
  return resp;
}

HandshakeRecord handshake_finish(const KeyPair& validator, const PublicKey& operator_key,
                                 const HandshakeRequest& request,
                                 const HandshakeChallenge& challenge,
                                 const HandshakeResponse& response) {
  if (!verify(operator_key, response.enctokendo.ciphertext, response.sigtokendo)) {
    throw HandshakeAbort(HandshakeStep::SvVerifyTokenReturn, "returned token signature does not verify");
  }
  Bytes initialtoken;
  try {
    initialtoken = validator.open(response.enctokendo);
  } catch (const Error& e) {
    throw HandshakeAbort(HandshakeStep::SvOpenTokenReturn, e.what());
  }
  if (initialtoken != challenge.enctoken.ciphertext) {
    throw HandshakeAbort(HandshakeStep::SvAssert, "returned token differs from issued token");
  }
  HandshakeRecord r;
  r.certreq = challenge.opened_request;
  r.encreq = request.encreq;
  r.signature = request.signature;
  r.tokentx = challenge.tokentx;
  r.token = challenge.token;
  r.enctoken = challenge.enctoken;
  r.tokensig = challenge.tokensig;
  r.enctokendo = response.enctokendo;
  r.sigtokendo = response.sigtokendo;
  r.initialtoken = std::move(initialtoken);
  return r;
}

Bytes encode_response(const HandshakeResponse& response) {
  CanonicalWriter w;
  w.field(response.enctokendo.ciphertext);
  w.field(response.sigtokendo.bytes);
  return std::move(w).bytes();
}

HandshakeResponse decode_response(ByteView bytes, const PublicKey& validator,
                                  const PublicKey& operator_key) {
  CanonicalReader r(bytes);
  HandshakeResponse resp;
  auto ct = r.field();
  resp.enctokendo = SealedEnvelope{Bytes(ct.begin(), ct.end()), validator};
  auto sig = r.field();
  resp.sigtokendo = Signature{Bytes(sig.begin(), sig.end()), operator_key};
  r.expect_done();
  return resp;
}

HandshakeRecord run_handshake(const KeyPair& operator_key, const KeyPair& validator,
                              const HandshakeParams& params,
                              const HandshakeInterceptor& intercept) {
  const PublicKey& ga = operator_key.public_key();
  const PublicKey& gb = validator.public_key();
  auto wire = [&](HandshakeMessage m, const Bytes& value) {
    Bytes copy = value;
    if (intercept) intercept(m, copy);
    return copy;
  };

  const Bytes certreq = certificate_request(as_bytes(params.csr), params.drone_name);
  const Bytes seed_bytes(params.seed.begin(), params.seed.end());
  const HandshakeRequest sent =
      handshake_request(operator_key, gb, certreq, derive_seed("handshake/encreq", seed_bytes));

  HandshakeRequest received = sent;
  received.encreq.ciphertext = wire(HandshakeMessage::EncReq, sent.encreq.ciphertext);
  received.signature.bytes = wire(HandshakeMessage::Signature, sent.signature.bytes);

  Bytes tokentx = params.tokentx;
  if (tokentx.empty()) {
    const Seed s = derive_seed("handshake/tokentx", seed_bytes);
    tokentx.assign(s.begin(), s.end());
  }
  const HandshakeChallenge issued =
      handshake_challenge(validator, ga, received.encreq, received.signature, tokentx,
                          derive_seed("handshake/enctoken", seed_bytes));

  SealedEnvelope enctoken{wire(HandshakeMessage::EncToken, issued.enctoken.ciphertext), ga};
  Signature tokensig{wire(HandshakeMessage::TokenSig, issued.tokensig.bytes), gb};
  const HandshakeResponse sent_resp = handshake_respond(
      operator_key, gb, enctoken, tokensig, derive_seed("handshake/enctokendo", seed_bytes));

  HandshakeResponse received_resp = sent_resp;
  received_resp.enctokendo.ciphertext =
      wire(HandshakeMessage::EncTokenDo, sent_resp.enctokendo.ciphertext);
  received_resp.sigtokendo.bytes = wire(HandshakeMessage::SigTokenDo, sent_resp.sigtokendo.bytes);

  return handshake_finish(validator, ga, received, issued, received_resp);
}

bool handshake_record_consistent(const HandshakeRecord& r, const PublicKey& operator_key,
                                 const PublicKey& validator) {
  if (r.encreq.recipient != validator || r.enctoken.recipient != operator_key ||
      r.enctokendo.recipient != validator) {
    return false;
  }
  if (!verify(operator_key, r.encreq.ciphertext, r.signature)) return false;
  if (!verify(validator, r.enctoken.ciphertext, r.tokensig)) return false;
  if (!verify(operator_key, r.enctokendo.ciphertext, r.sigtokendo)) return false;
  if (r.initialtoken != r.enctoken.ciphertext) return false;
  return r.token == concat(validator.view(), r.tokentx);
}

}  // namespace dpki
