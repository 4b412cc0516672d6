#pragma once

// Cryptographic primitives behind a narrow interface.
//
//   digest  SHA-256
//   sign    Ed25519 (deterministic signatures)
//   seal    X25519 sealed box, keyed by the Ed25519 identity converted to
//           its Montgomery form; one KeyPair signs and receives.
//
// All free functions are pure and thread-safe.

#include <array>
#include <compare>
#include <cstdint>
#include <span>
#include <string>

#include "dronepki/bytes.hpp"

namespace dpki {

inline constexpr std::size_t kDigestSize = 32;
inline constexpr std::size_t kPublicKeySize = 32;
inline constexpr std::size_t kSignatureSize = 64;
inline constexpr std::size_t kSeedSize = 32;

struct Digest {
  std::array<std::uint8_t, kDigestSize> bytes{};

  static Digest zero() { return {}; }
  ByteView view() const { return as_bytes(bytes); }
  std::string hex() const { return to_hex(view()); }
  static Digest from_hex(std::string_view hex);

  auto operator<=>(const Digest&) const = default;
};

struct PublicKey {
  std::array<std::uint8_t, kPublicKeySize> bytes{};

  ByteView view() const { return as_bytes(bytes); }
  std::string hex() const { return to_hex(view()); }
  static PublicKey from_hex(std::string_view hex);

  auto operator<=>(const PublicKey&) const = default;
};

struct Signature {
  Bytes bytes;       // normally kSignatureSize; kept variable to model malformed input
  PublicKey signer;  // the key the signature claims to come from

  ByteView view() const { return as_bytes(bytes); }
  bool operator==(const Signature&) const = default;
};

struct SealedEnvelope {
  Bytes ciphertext;
  PublicKey recipient;

  bool operator==(const SealedEnvelope&) const = default;
};

using Seed = std::array<std::uint8_t, kSeedSize>;

class KeyPair {
 public:
  static KeyPair generate();
  static KeyPair from_seed(const Seed& seed);

  KeyPair(const KeyPair&) = default;
  KeyPair& operator=(const KeyPair&) = default;
  ~KeyPair();

  const PublicKey& public_key() const noexcept { return public_; }

  Signature sign(ByteView message) const;

  /// Throws Error(DecryptionFailure) if the envelope was not sealed to this
  /// key or has been altered.
  Bytes open(const SealedEnvelope& envelope) const;

 private:
  KeyPair() = default;

  std::array<std::uint8_t, 64> secret_{};
  PublicKey public_;
};

Digest digest(ByteView message);

inline Signature sign(const KeyPair& key, ByteView message) { return key.sign(message); }

bool verify(const PublicKey& key, ByteView message, const Signature& sig);

/// Seals with a fresh random ephemeral key.
SealedEnvelope seal(const PublicKey& recipient, ByteView plaintext);

/// Seals with an ephemeral key derived from `ephemeral_seed`. The envelope
/// is byte-compatible with the randomized form.
SealedEnvelope seal(const PublicKey& recipient, ByteView plaintext, const Seed& ephemeral_seed);

inline Bytes open(const KeyPair& key, const SealedEnvelope& envelope) { return key.open(envelope); }

/// Derives a 32-byte seed from a domain label and arbitrary context bytes.
Seed derive_seed(std::string_view label, ByteView context);

}  // namespace dpki
