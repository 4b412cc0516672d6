#pragma once

#include <algorithm>
#include <random>
#include <string>
#include <vector>

#include "dronepki/consensus.hpp"
#include "dronepki/crypto.hpp"
#include "dronepki/ledger.hpp"
#include "dronepki/model.hpp"

namespace dpki::test {

inline KeyPair key(std::string_view label, std::uint64_t i = 0) {
  const std::string ctx = std::to_string(i);
  return KeyPair::from_seed(derive_seed(label, as_bytes(ctx)));
}

inline std::vector<KeyPair> keys(std::string_view label, std::size_t n) {
  std::vector<KeyPair> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(key(label, i));
  return out;
}

inline std::vector<PublicKey> public_keys(const std::vector<KeyPair>& ks) {
  std::vector<PublicKey> out;
  for (const auto& k : ks) out.push_back(k.public_key());
  return out;
}

inline Digest csr_of(std::string_view name) { return digest(as_bytes("csr:" + std::string(name))); }

inline Transaction initial(const KeyPair& op, std::string name, Tick expiry = 1'000'000) {
  const Digest csr = csr_of(name);
  return make_transaction(CrtType::Initial, std::move(name), op, expiry, csr);
}

/// Revocation of the drone's latest committed certificate.
inline Transaction revoke(const KeyPair& op, const Ledger& ledger, std::string name) {
  const Block* prev = ledger.latest_for(name);
  const Digest target = prev ? digest(canonical_bytes(prev->body)) : Digest::zero();
  return make_transaction(CrtType::Revoke, std::move(name), op, 0, target);
}

/// Footer with one approval per signer, ordered by key.
inline Block sign_block(const BlockHeader& header, const BlockBody& body,
                        std::vector<const KeyPair*> signers, std::uint64_t validator_count) {
  std::sort(signers.begin(), signers.end(),
            [](const KeyPair* a, const KeyPair* b) { return a->public_key() < b->public_key(); });
  Block b{header, body, {validator_count, {}}};
  const Digest m = signing_digest(header, body);
  for (const KeyPair* s : signers) b.footer.approvals.push_back({s->public_key(), s->sign(m.view())});
  return b;
}

/// Builds the next block for `tx` signed by the first `approvals` validators.
inline Block next_block(const Ledger& ledger, const std::vector<KeyPair>& validators,
                        const Transaction& tx, Tick ts, std::size_t approvals) {
  std::vector<const KeyPair*> signers;
  for (std::size_t i = 0; i < approvals && i < validators.size(); ++i) signers.push_back(&validators[i]);
  return sign_block(ledger.next_header(tx.crt_type, tx.drone_name, ts), body_from(tx), signers,
                    ledger.validator_set().size());
}

/// Appends `tx` with every validator approving.
inline const Block& commit(Ledger& ledger, const std::vector<KeyPair>& validators,
                           const Transaction& tx, Tick ts) {
  ledger.append(next_block(ledger, validators, tx, ts, validators.size()));
  return ledger.blocks().back();
}

/// Deterministic lifecycle corpus: registrations, revocations and
/// re-registrations over `drones` names, one block per tick step.
struct Corpus {
  std::vector<KeyPair> validators;
  std::vector<KeyPair> operators;
  Ledger ledger;
  Tick last_tick = 0;
};

template <typename Rng>
Corpus lifecycle_corpus(Rng& rng, std::size_t blocks, std::size_t drones, std::size_t n_validators,
                        Tick step = 3, Tick lifetime_min = 5, Tick lifetime_max = 400) {
  Corpus c{keys("corpus-validator", n_validators), keys("corpus-operator", 3), Ledger{}, 0};
  c.ledger = Ledger(public_keys(c.validators));
  std::uniform_int_distribution<std::size_t> pick_drone(1, drones);
  std::uniform_int_distribution<Tick> lifetime(lifetime_min, lifetime_max);
  std::bernoulli_distribution do_revoke(0.4);
  Tick now = 1;
  while (c.ledger.size() < blocks) {
    now += 1 + rng() % step;
    const std::size_t idx = pick_drone(rng);
    const std::string name = "Drone_" + std::to_string(idx);
    const auto& op = c.operators[idx % c.operators.size()];
    const auto status = c.ledger.certificate_status(name, now);
    if (status == CertStatus::Active) {
      if (do_revoke(rng)) commit(c.ledger, c.validators, revoke(op, c.ledger, name), now);
    } else {
      commit(c.ledger, c.validators, initial(op, name, now + lifetime(rng)), now);
    }
  }
  c.last_tick = now;
  return c;
}

}  // namespace dpki::test
