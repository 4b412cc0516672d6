#include <gtest/gtest.h>

#include <random>
#include <set>

#include "dronepki/bytes.hpp"
#include "dronepki/crypto.hpp"
#include "dronepki/error.hpp"
#include "support.hpp"

namespace dpki {
namespace {

Seed seed_from_hex(std::string_view hex) {
  Seed s{};
  const Bytes b = from_hex(hex);
  std::copy(b.begin(), b.end(), s.begin());
  return s;
}

Bytes random_bytes(std::mt19937_64& rng, std::size_t n) {
  Bytes b(n);
  for (auto& x : b) x = static_cast<std::uint8_t>(rng());
  return b;
}

TEST(Hex, RoundTripsAndRejectsGarbage) {
  EXPECT_EQ(to_hex(Bytes{0x00, 0xab, 0xff}), "00abff");
  EXPECT_EQ(from_hex("00ABff"), (Bytes{0x00, 0xab, 0xff}));
  EXPECT_THROW(from_hex("abc"), Error);
  EXPECT_THROW(from_hex("zz"), Error);
}

TEST(Canonical, FieldsAreLengthPrefixedBigEndian) {
  CanonicalWriter w;
  w.field("ab").u64(258);
  const Bytes expected = {0, 0, 0, 2, 'a', 'b', 0, 0, 0, 8, 0, 0, 0, 0, 0, 0, 1, 2};
  EXPECT_EQ(w.bytes(), expected);

  CanonicalReader r(w.bytes());
  EXPECT_EQ(r.string_field(), "ab");
  EXPECT_EQ(r.u64(), 258u);
  EXPECT_TRUE(r.done());
}

TEST(Canonical, ConcatenationAmbiguityIsRemoved) {
  CanonicalWriter a, b;
  a.field("ab").field("c");
  b.field("a").field("bc");
  EXPECT_NE(a.bytes(), b.bytes());
}

TEST(Canonical, TruncatedInputIsRejected) {
  CanonicalWriter w;
  w.field("hello");
  Bytes cut = w.bytes();
  cut.pop_back();
  CanonicalReader r(cut);
  EXPECT_THROW(r.field(), Error);
}

TEST(Digest, MatchesKnownSha256Vectors) {
  EXPECT_EQ(digest(ByteView{}).hex(),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(digest(as_bytes("abc")).hex(),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Digest, DeterministicAndCollisionFreeOnCorpus) {
  std::mt19937_64 rng(7);
  std::set<Digest> seen;
  for (int i = 0; i < 10000; ++i) {
    Bytes m = random_bytes(rng, 1 + rng() % 64);
    m.push_back(static_cast<std::uint8_t>(i));
    m.push_back(static_cast<std::uint8_t>(i >> 8));
    EXPECT_EQ(digest(m), digest(m));
    seen.insert(digest(m));
  }
  EXPECT_EQ(seen.size(), 10000u);
}

TEST(Signature, MatchesRfc8032TestVector1) {
  const KeyPair k = KeyPair::from_seed(
      seed_from_hex("9d61b19deffd5a60ba844af492ec2cc44449c5697b326919703bac031cae7f60"));
  EXPECT_EQ(k.public_key().hex(),
            "d75a980182b10ab7d54bfed3c964073a0ee172f3daa62325af021a68f707511a");
  const Signature s = k.sign(ByteView{});
  EXPECT_EQ(to_hex(s.bytes),
            "e5564300c360ac729086e2cc806e828a84877f1eb8e5d974d873e065224901555fb8821590a33bac"
            "c61e39701cf9b46bd25bf5f0595bbe24655141438e7a100b");
  EXPECT_EQ(s.signer, k.public_key());
}

TEST(Signature, RoundTripWrongKeyWrongMessage) {
  const KeyPair a = test::key("a"), b = test::key("b");
  const Bytes m = {1, 2, 3};
  const Signature s = sign(a, m);
  EXPECT_TRUE(verify(a.public_key(), m, s));
  EXPECT_FALSE(verify(b.public_key(), m, s));
  EXPECT_FALSE(verify(a.public_key(), Bytes{1, 2, 4}, s));
}

TEST(Signature, TamperAndTruncationFail) {
  const KeyPair a = test::key("a");
  Bytes m = {9, 9, 9, 9};
  Signature s = sign(a, m);
  for (std::size_t i = 0; i < m.size(); ++i) {
    Bytes t = m;
    t[i] ^= 0x01;
    EXPECT_FALSE(verify(a.public_key(), t, s));
  }
  Signature cut = s;
  cut.bytes.pop_back();
  EXPECT_FALSE(verify(a.public_key(), m, cut));
  Signature empty = s;
  empty.bytes.clear();
  EXPECT_FALSE(verify(a.public_key(), m, empty));
}

TEST(Signature, PropertyThousandRoundTrips) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 1000; ++i) {
    const KeyPair k = KeyPair::from_seed(derive_seed("prop", random_bytes(rng, 8)));
    const Bytes m = random_bytes(rng, rng() % 200);
    ASSERT_TRUE(verify(k.public_key(), m, k.sign(m)));
  }
}

TEST(Seal, RoundTripAndWrongKey) {
  const KeyPair a = test::key("a"), b = test::key("b");
  const Bytes m = {4, 5, 6, 7};
  const SealedEnvelope env = seal(a.public_key(), m);
  EXPECT_EQ(env.recipient, a.public_key());
  EXPECT_EQ(open(a, env), m);
  try {
    open(b, env);
    FAIL() << "opened with the wrong key";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::DecryptionFailure);
  }
}

TEST(Seal, TamperedCiphertextFailsToOpen) {
  const KeyPair a = test::key("a");
  SealedEnvelope env = seal(a.public_key(), Bytes{1, 2, 3});
  env.ciphertext.back() ^= 0x80;
  EXPECT_THROW(open(a, env), Error);
}

TEST(Seal, SeededSealIsDeterministicAndOpens) {
  const KeyPair a = test::key("a");
  const Seed s = derive_seed("eph", as_bytes("1"));
  const Bytes m = {1, 1, 2, 3, 5, 8};
  const auto e1 = seal(a.public_key(), m, s);
  const auto e2 = seal(a.public_key(), m, s);
  EXPECT_EQ(e1, e2);
  EXPECT_EQ(open(a, e1), m);
  EXPECT_NE(seal(a.public_key(), m, derive_seed("eph", as_bytes("2"))), e1);
}

TEST(Seal, PropertyThousandRoundTrips) {
  std::mt19937_64 rng(13);
  const KeyPair k = test::key("seal-prop");
  for (int i = 0; i < 1000; ++i) {
    const Bytes m = random_bytes(rng, rng() % 300);
    ASSERT_EQ(open(k, seal(k.public_key(), m)), m);
  }
}

TEST(DeriveSeed, LabelAndContextSeparate) {
  EXPECT_EQ(derive_seed("x", as_bytes("1")), derive_seed("x", as_bytes("1")));
  EXPECT_NE(derive_seed("x", as_bytes("1")), derive_seed("y", as_bytes("1")));
  EXPECT_NE(derive_seed("x1", as_bytes("")), derive_seed("x", as_bytes("1")));
}

}  // namespace
}  // namespace dpki
