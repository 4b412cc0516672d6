#include "dronepki/crypto.hpp"

#include <sodium.h>

#include <algorithm>
#include <cstring>
#include <stdexcept>

#include "dronepki/error.hpp"

namespace dpki {

namespace {

void ensure_sodium() {
  static const bool ready = [] {
    if (sodium_init() < 0) throw std::runtime_error("libsodium initialization failed");
    return true;
  }();
  (void)ready;
}

template <std::size_t N>
std::array<std::uint8_t, N> fixed_from_hex(std::string_view hex) {
  Bytes raw = dpki::from_hex(hex);
  if (raw.size() != N) throw Error(Errc::DecodeError, "wrong key/digest length");
  std::array<std::uint8_t, N> out{};
  std::copy(raw.begin(), raw.end(), out.begin());
  return out;
}

}  // namespace

Digest Digest::from_hex(std::string_view hex) { return {fixed_from_hex<kDigestSize>(hex)}; }

PublicKey PublicKey::from_hex(std::string_view hex) {
  return {fixed_from_hex<kPublicKeySize>(hex)};
}

KeyPair KeyPair::generate() {
  ensure_sodium();
  KeyPair kp;
  crypto_sign_keypair(kp.public_.bytes.data(), kp.secret_.data());
  return kp;
}

KeyPair KeyPair::from_seed(const Seed& seed) {
  ensure_sodium();
  KeyPair kp;
  crypto_sign_seed_keypair(kp.public_.bytes.data(), kp.secret_.data(), seed.data());
  return kp;
}

KeyPair::~KeyPair() { sodium_memzero(secret_.data(), secret_.size()); }

Signature KeyPair::sign(ByteView message) const {
  ensure_sodium();
  Signature sig;
  sig.bytes.resize(crypto_sign_BYTES);
  sig.signer = public_;
  crypto_sign_detached(sig.bytes.data(), nullptr, message.data(), message.size(), secret_.data());
  return sig;
}

Bytes KeyPair::open(const SealedEnvelope& envelope) const {
  ensure_sodium();
  if (envelope.recipient != public_) {
    throw Error(Errc::DecryptionFailure, "envelope sealed to a different key");
  }
  if (envelope.ciphertext.size() < crypto_box_SEALBYTES) {
    throw Error(Errc::DecryptionFailure, "ciphertext too short");
  }
  std::array<std::uint8_t, crypto_box_PUBLICKEYBYTES> x_pk{};
  std::array<std::uint8_t, crypto_box_SECRETKEYBYTES> x_sk{};
  if (crypto_sign_ed25519_pk_to_curve25519(x_pk.data(), public_.bytes.data()) != 0 ||
      crypto_sign_ed25519_sk_to_curve25519(x_sk.data(), secret_.data()) != 0) {
    throw Error(Errc::DecryptionFailure, "key conversion failed");
  }
  Bytes plain(envelope.ciphertext.size() - crypto_box_SEALBYTES);
  int rc = crypto_box_seal_open(plain.data(), envelope.ciphertext.data(),
                                envelope.ciphertext.size(), x_pk.data(), x_sk.data());
  sodium_memzero(x_sk.data(), x_sk.size());
  if (rc != 0) throw Error(Errc::DecryptionFailure, "authentication failed");
  return plain;
}

Digest digest(ByteView message) {
  ensure_sodium();
  Digest d;
  crypto_hash_sha256(d.bytes.data(), message.data(), message.size());
  return d;
}

bool verify(const PublicKey& key, ByteView message, const Signature& sig) {
  ensure_sodium();
  if (sig.bytes.size() != crypto_sign_BYTES) return false;
  return crypto_sign_verify_detached(sig.bytes.data(), message.data(), message.size(),
                                     key.bytes.data()) == 0;
}

namespace {

SealedEnvelope seal_with(const PublicKey& recipient, ByteView plaintext,
                         const std::uint8_t* eph_pk, const std::uint8_t* eph_sk) {
  std::array<std::uint8_t, crypto_box_PUBLICKEYBYTES> x_pk{};
  if (crypto_sign_ed25519_pk_to_curve25519(x_pk.data(), recipient.bytes.data()) != 0) {
    throw Error(Errc::DecryptionFailure, "recipient key is not a valid curve point");
  }
  // Same construction as crypto_box_seal: nonce = BLAKE2b(epk || pk).
  std::array<std::uint8_t, crypto_box_NONCEBYTES> nonce{};
  crypto_generichash_state st;
  crypto_generichash_init(&st, nullptr, 0, nonce.size());
  crypto_generichash_update(&st, eph_pk, crypto_box_PUBLICKEYBYTES);
  crypto_generichash_update(&st, x_pk.data(), x_pk.size());
  crypto_generichash_final(&st, nonce.data(), nonce.size());

  SealedEnvelope env;
  env.recipient = recipient;
  env.ciphertext.resize(crypto_box_SEALBYTES + plaintext.size());
  std::memcpy(env.ciphertext.data(), eph_pk, crypto_box_PUBLICKEYBYTES);
  if (crypto_box_easy(env.ciphertext.data() + crypto_box_PUBLICKEYBYTES, plaintext.data(),
                      plaintext.size(), nonce.data(), x_pk.data(), eph_sk) != 0) {
    throw Error(Errc::DecryptionFailure, "sealing failed");
  }
  return env;
}

}  // namespace

SealedEnvelope seal(const PublicKey& recipient, ByteView plaintext) {
  ensure_sodium();
  Seed seed;
  randombytes_buf(seed.data(), seed.size());
  auto env = seal(recipient, plaintext, seed);
  sodium_memzero(seed.data(), seed.size());
  return env;
}

SealedEnvelope seal(const PublicKey& recipient, ByteView plaintext, const Seed& ephemeral_seed) {
  ensure_sodium();
  std::array<std::uint8_t, crypto_box_PUBLICKEYBYTES> eph_pk{};
  std::array<std::uint8_t, crypto_box_SECRETKEYBYTES> eph_sk{};
  crypto_box_seed_keypair(eph_pk.data(), eph_sk.data(), ephemeral_seed.data());
  auto env = seal_with(recipient, plaintext, eph_pk.data(), eph_sk.data());
  sodium_memzero(eph_sk.data(), eph_sk.size());
  return env;
}

Seed derive_seed(std::string_view label, ByteView context) {
  CanonicalWriter w;
  w.field(label).field(context);
  auto d = digest(w.bytes());
  return d.bytes;
}

}  // namespace dpki
