#include <map>
#include <string>

#include "dronepki/ledger.hpp"
#include "ledger_checks.hpp"

namespace dpki {

namespace {

ChainReport failed(std::uint64_t index, const detail::Failure& f) {
  ChainReport r;
  r.ok = false;
  r.failed_at = index;
  r.reason = f.code;
  r.detail = f.detail;
  return r;
}

detail::Membership roster_membership(const Ledger& ledger) {
  return [&ledger](const PublicKey& k) { return ledger.was_ever_validator(k); };
}

// Walks the chain in order. `digest_of(i)` supplies block i's digest and
// `signature_failure(i)` its signature verdict; both verifiers report the
// same first failure.
template <typename DigestOf, typename SignatureFailure>
ChainReport walk(const Ledger& ledger, DigestOf&& digest_of, SignatureFailure&& signature_failure) {
  const auto& blocks = ledger.blocks();
  std::map<std::string, std::size_t, std::less<>> heads;
  Digest tip = Digest::zero();
  Tick previous_ts = 0;
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const Block& b = blocks[i];
    detail::ChainPosition pos;
    pos.expected_serial = i;
    pos.previous_timestamp = previous_ts;
    pos.tip = tip;
    Digest head_digest;
    if (auto it = heads.find(b.body.drone_name); it != heads.end()) {
      pos.drone_head = &blocks[it->second];
      head_digest = digest_of(it->second);
      pos.drone_head_digest = &head_digest;
    }
    if (auto f = detail::check_structure(b, pos)) return failed(i, *f);
    if (auto f = signature_failure(i)) return failed(i, *f);

    tip = digest_of(i);
    previous_ts = b.header.timestamp;
    heads[b.body.drone_name] = i;
  }
  return {};
}

}  // namespace

ChainReport verify_chain(const Ledger& ledger) {
  const auto& blocks = ledger.blocks();
  const auto member = roster_membership(ledger);
  const auto max_count = ledger.roster().size();
  return walk(
      ledger, [&](std::size_t i) { return block_digest(blocks[i]); },
      [&](std::size_t i) {
        return detail::check_signatures(blocks[i], member, std::nullopt, max_count);
      });
}

ChainReport verify_chain_parallel(const Ledger& ledger) {
  const auto& blocks = ledger.blocks();
  const auto n = static_cast<std::int64_t>(blocks.size());
  const auto member = roster_membership(ledger);
  const auto max_count = ledger.roster().size();

  std::vector<Digest> digests(blocks.size());
  std::vector<std::optional<detail::Failure>> sig_failures(blocks.size());

#pragma omp parallel for schedule(dynamic, 8)
  for (std::int64_t i = 0; i < n; ++i) {
    digests[i] = block_digest(blocks[i]);
    sig_failures[i] = detail::check_signatures(blocks[i], member, std::nullopt, max_count);
  }

  return walk(
      ledger, [&](std::size_t i) { return digests[i]; },
      [&](std::size_t i) { return sig_failures[i]; });
}

}  // namespace dpki
