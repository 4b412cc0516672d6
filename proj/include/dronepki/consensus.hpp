#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "dronepki/crypto.hpp"
#include "dronepki/ledger.hpp"
#include "dronepki/model.hpp"
#include "dronepki/validator.hpp"

namespace dpki {

// -- Proposer schedule --------------------------------------------------------

/// Round-robin over the set sorted by key bytes: index = round_id mod n.
/// Throws Error(EmptyValidatorSet).
PublicKey select_proposer(std::uint64_t round_id, std::vector<PublicKey> validator_set);

// -- Votes ------------------------------------------------------------------

struct Vote {
  std::uint64_t round_id = 0;
  PublicKey voter;
  Verdict verdict = Verdict::Reject;
  Signature signature;
};

/// What a vote signs. An approval signs the block's signing digest itself,
/// so it can be copied into the footer; a rejection signs a tagged digest.
Digest vote_message(Verdict verdict, const Digest& signing);

Vote sign_vote(const KeyPair& voter, std::uint64_t round_id, Verdict verdict,
               const Digest& signing);
bool vote_valid(const Vote& vote, const Digest& signing);

// -- Rounds -------------------------------------------------------------------

struct Candidate {
  Transaction tx;
  ChallengeTranscript transcript;
};

class Round {
 public:
  Round(std::uint64_t round_id, PublicKey proposer, Candidate candidate, BlockHeader header,
        std::vector<PublicKey> validator_set, Tick deadline);

  /// Throws Error(ForeignVote | StaleRound | DoubleVote | BadVoteSignature).
  /// A vote is stale if it names another round or arrives after the deadline.
  void add_vote(const Vote& vote, Tick now);

  std::uint64_t id() const { return id_; }
  const PublicKey& proposer() const { return proposer_; }
  const Candidate& candidate() const { return candidate_; }
  const BlockHeader& header() const { return header_; }
  BlockBody body() const { return body_from(candidate_.tx); }
  const Digest& signing() const { return signing_; }
  const std::vector<PublicKey>& validator_set() const { return set_; }
  Tick deadline() const { return deadline_; }
  const std::map<PublicKey, Vote>& votes() const { return votes_; }
  bool has_voted(const PublicKey& key) const { return votes_.contains(key); }

  std::size_t n() const { return set_.size(); }
  std::size_t approvals() const { return approvals_; }
  std::size_t rejections() const { return votes_.size() - approvals_; }

  /// approvals > n/2
  bool approved() const { return 2 * approvals_ > n(); }
  /// Approval can no longer be reached.
  bool approval_impossible() const { return 2 * (n() - rejections()) <= n(); }
  bool decided() const { return approved() || approval_impossible(); }
  bool majority_rejected() const { return 2 * rejections() > n(); }

  /// Header, body and a footer holding every approval, ordered by key.
  Block assemble() const;

 private:
  std::uint64_t id_;
  PublicKey proposer_;
  Candidate candidate_;
  BlockHeader header_;
  Digest signing_;
  std::vector<PublicKey> set_;
  Tick deadline_;
  std::map<PublicKey, Vote> votes_;
  std::size_t approvals_ = 0;
};

class RewardTally {
 public:
  /// One credit per footer signature.
  void award(const Block& block);
  std::uint64_t credit(const PublicKey& key) const;
  std::uint64_t total() const { return total_; }
  const std::map<PublicKey, std::uint64_t>& credits() const { return credits_; }

 private:
  std::map<PublicKey, std::uint64_t> credits_;
  std::uint64_t total_ = 0;
};

struct CommitResult {
  bool committed = false;
  std::optional<Block> block;
  std::optional<Errc> reason;  // set when not committed

  explicit operator bool() const { return committed; }
};

/// Commits iff approvals > n/2 and the block appends cleanly; credits the
/// footer signers when `tally` is given.
CommitResult collect_and_commit(const Round& round, Ledger& ledger, RewardTally* tally = nullptr);

// -- Liveness -----------------------------------------------------------------

/// Aged pending entries, oldest first (ties by id).
std::vector<PendingEntry> escalate_pending(const Ledger& ledger, Tick now, Tick age_threshold);

enum class InactivityKind { SkippedProposal, MissedVote };

std::string_view to_string(InactivityKind kind);

struct InactivityEntry {
  PublicKey validator;
  InactivityKind kind;
  Tick at = 0;
  std::uint64_t subject = 0;  // pending id or round id
};

class InactivityLog {
 public:
  void record(const PublicKey& validator, InactivityKind kind, Tick at, std::uint64_t subject);
  std::size_t count(const PublicKey& validator) const;
  std::size_t total() const { return entries_.size(); }
  const std::vector<InactivityEntry>& entries() const { return entries_; }

 private:
  std::vector<InactivityEntry> entries_;
  std::map<PublicKey, std::size_t> counts_;
};

// -- Membership ---------------------------------------------------------------

Signature issue_credential(const KeyPair& root, const PublicKey& candidate);
bool credential_valid(const PublicKey& root, const PublicKey& candidate,
                      const Signature& credential);

/// Adds `candidate` to the ledger's validator set. Throws Error(BadCredential)
/// unless `credential` is the root key's signature over the candidate.
void admit_validator(Ledger& ledger, const PublicKey& root, const PublicKey& candidate,
                     const Signature& credential);

/// Counts verdicts that contradict the validation oracle.
class StrikeBook {
 public:
  static constexpr int kDefaultLimit = 3;

  explicit StrikeBook(int limit = kDefaultLimit) : limit_(limit) {}

  /// Returns true when this strike reaches the limit.
  bool strike(const PublicKey& validator);
  int strikes(const PublicKey& validator) const;
  int limit() const { return limit_; }

 private:
  int limit_;
  std::map<PublicKey, int> strikes_;
};

}  // namespace dpki
