#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dronepki/error.hpp"
#include "dronepki/model.hpp"

namespace dpki {

enum class CertStatus { Active, Revoked, Expired, Unknown };

std::string_view to_string(CertStatus status);

using PendingId = std::uint64_t;

struct PendingEntry {
  PendingId id = 0;
  Transaction tx;
  Tick submitted = 0;
  int consecutive_rejections = 0;
};

struct ChainReport {
  bool ok = true;
  std::optional<std::uint64_t> failed_at;
  std::optional<Errc> reason;
  std::string detail;

  explicit operator bool() const { return ok; }
};

/// Append-only block store with the global hash chain, per-drone chains,
/// the pending pool and the permissioned validator set.
///
/// Single writer. Committed blocks are never mutated or removed.
class Ledger {
 public:
  Ledger() = default;
  explicit Ledger(std::vector<PublicKey> validators);

  /// Rebuilds a ledger from stored blocks without checking them; pair with
  /// verify_chain. `roster` is every key that was ever permissioned.
  static Ledger from_blocks(std::vector<PublicKey> validators, std::vector<PublicKey> roster,
                            std::vector<Block> blocks);

  // Validator set. Kept sorted by key bytes.
  const std::vector<PublicKey>& validator_set() const { return validators_; }
  const std::vector<PublicKey>& roster() const { return roster_; }
  bool is_validator(const PublicKey& key) const;
  bool was_ever_validator(const PublicKey& key) const;
  void add_validator(const PublicKey& key);
  bool remove_validator(const PublicKey& key);

  /// Throws Error(MalformedTransaction) for a bad operator signature, an
  /// empty or overlong name, or an Initial whose expiry is not after `now`.
  PendingId submit(const Transaction& tx, Tick now);
  const std::vector<PendingEntry>& pending() const { return pending_; }
  const PendingEntry* find_pending(PendingId id) const;
  PendingEntry* find_pending(PendingId id);
  bool remove_pending(PendingId id);

  /// Entries with now - submitted >= age_threshold, oldest first.
  std::vector<PendingId> pending_aged(Tick now, Tick age_threshold) const;

  /// Header for the next block on the current tip.
  BlockHeader next_header(CrtType type, std::string_view drone, Tick timestamp) const;

  /// Appends after checking every block invariant against the tip and the
  /// current validator set. Removes the matching pending entry, if any.
  void append(const Block& block);

  const std::vector<Block>& blocks() const { return blocks_; }
  std::size_t size() const { return blocks_.size(); }
  bool empty() const { return blocks_.empty(); }
  const Digest& digest_at(std::size_t index) const { return digests_.at(index); }
  Digest tip_digest() const { return digests_.empty() ? Digest::zero() : digests_.back(); }

  std::optional<std::size_t> head_index(std::string_view drone) const;
  const Block* latest_for(std::string_view drone) const;
  CertStatus certificate_status(std::string_view drone, Tick now) const;

  /// Depth of a balanced index over the committed blocks.
  std::size_t lookup_depth() const;

 private:
  std::vector<Block> blocks_;
  std::vector<Digest> digests_;
  std::vector<PendingEntry> pending_;
  std::map<std::string, std::size_t, std::less<>> head_by_drone_;
  std::vector<PublicKey> validators_;
  std::vector<PublicKey> roster_;
  PendingId next_pending_ = 1;
};

inline CertStatus certificate_status(const Ledger& ledger, std::string_view drone, Tick now) {
  return ledger.certificate_status(drone, now);
}

/// Re-verifies every pointer, signature, threshold and lifecycle rule from
/// the first block. Serial reference implementation.
ChainReport verify_chain(const Ledger& ledger);

/// Same contract as verify_chain; digests and signature checks run as
/// OpenMP loops. Reports the identical first failure.
ChainReport verify_chain_parallel(const Ledger& ledger);

/// JSON-lines export: one `validators` record, then one block per line.
void export_jsonl(const Ledger& ledger, std::ostream& out);
/// Loads without verifying. Throws Error(DecodeError) on malformed input.
Ledger import_jsonl(std::istream& in);

}  // namespace dpki
