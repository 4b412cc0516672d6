#include "dronepki/consensus.hpp"

#include <algorithm>

namespace dpki {

PublicKey select_proposer(std::uint64_t round_id, std::vector<PublicKey> validator_set) {
  if (validator_set.empty()) throw Error(Errc::EmptyValidatorSet);
  std::sort(validator_set.begin(), validator_set.end());
  return validator_set[round_id % validator_set.size()];
}

Digest vote_message(Verdict verdict, const Digest& signing) {
  if (verdict == Verdict::Approve) return signing;
  CanonicalWriter w;
  w.field("reject");
  w.field(signing.view());
  return digest(w.bytes());
}

Vote sign_vote(const KeyPair& voter, std::uint64_t round_id, Verdict verdict,
               const Digest& signing) {
  return Vote{round_id, voter.public_key(), verdict,
              voter.sign(vote_message(verdict, signing).view())};
}

bool vote_valid(const Vote& vote, const Digest& signing) {
  return vote.signature.signer == vote.voter &&
         verify(vote.voter, vote_message(vote.verdict, signing).view(), vote.signature);
}

Round::Round(std::uint64_t round_id, PublicKey proposer, Candidate candidate, BlockHeader header,
             std::vector<PublicKey> validator_set, Tick deadline)
    : id_(round_id),
      proposer_(proposer),
      candidate_(std::move(candidate)),
      header_(std::move(header)),
      signing_(signing_digest(header_, body_from(candidate_.tx))),
      set_(std::move(validator_set)),
      deadline_(deadline) {
  std::sort(set_.begin(), set_.end());
}

void Round::add_vote(const Vote& vote, Tick now) {
  if (!std::binary_search(set_.begin(), set_.end(), vote.voter)) {
    throw Error(Errc::ForeignVote, "voter " + vote.voter.hex() + " is not in the validator set");
  }
  if (vote.round_id != id_ || now > deadline_) {
    throw Error(Errc::StaleRound, "vote for round " + std::to_string(vote.round_id) +
                                      " at tick " + std::to_string(now));
  }
  if (votes_.contains(vote.voter)) {
    throw Error(Errc::DoubleVote, "second vote from " + vote.voter.hex());
  }
  if (!vote_valid(vote, signing_)) {
    throw Error(Errc::BadVoteSignature, "vote from " + vote.voter.hex() + " does not verify");
  }
  votes_.emplace(vote.voter, vote);
  if (vote.verdict == Verdict::Approve) ++approvals_;
}

Block Round::assemble() const {
  Block b;
  b.header = header_;
  b.body = body();
  b.footer.validator_count = set_.size();
  for (const auto& [key, vote] : votes_) {
    if (vote.verdict == Verdict::Approve) b.footer.approvals.push_back({key, vote.signature});
  }
  return b;
}

void RewardTally::award(const Block& block) {
  for (const auto& a : block.footer.approvals) {
    ++credits_[a.validator];
    ++total_;
  }
}

std::uint64_t RewardTally::credit(const PublicKey& key) const {
  auto it = credits_.find(key);
  return it == credits_.end() ? 0 : it->second;
}

CommitResult collect_and_commit(const Round& round, Ledger& ledger, RewardTally* tally) {
  CommitResult r;
  if (!round.approved()) {
    r.reason = Errc::InsufficientApprovals;
    return r;
  }
  Block block = round.assemble();
  try {
    ledger.append(block);
  } catch (const Error& e) {
    r.reason = e.code();
    return r;
  }
  if (tally) tally->award(block);
  r.committed = true;
  r.block = std::move(block);
  return r;
}

std::vector<PendingEntry> escalate_pending(const Ledger& ledger, Tick now, Tick age_threshold) {
  std::vector<PendingEntry> out;
  for (PendingId id : ledger.pending_aged(now, age_threshold)) {
    out.push_back(*ledger.find_pending(id));
  }
  return out;
}

std::string_view to_string(InactivityKind kind) {
  return kind == InactivityKind::SkippedProposal ? "skipped_proposal" : "missed_vote";
}

void InactivityLog::record(const PublicKey& validator, InactivityKind kind, Tick at,
                           std::uint64_t subject) {
  entries_.push_back({validator, kind, at, subject});
  ++counts_[validator];
}

std::size_t InactivityLog::count(const PublicKey& validator) const {
  auto it = counts_.find(validator);
  return it == counts_.end() ? 0 : it->second;
}

namespace {

Digest credential_message(const PublicKey& candidate) {
  CanonicalWriter w;
  w.field("validator-credential");
  w.field(candidate.view());
  return digest(w.bytes());
}

}  // namespace

Signature issue_credential(const KeyPair& root, const PublicKey& candidate) {
  return root.sign(credential_message(candidate).view());
}

bool credential_valid(const PublicKey& root, const PublicKey& candidate,
                      const Signature& credential) {
  return verify(root, credential_message(candidate).view(), credential);
}

void admit_validator(Ledger& ledger, const PublicKey& root, const PublicKey& candidate,
                     const Signature& credential) {
  if (!credential_valid(root, candidate, credential)) {
    throw Error(Errc::BadCredential, "credential for " + candidate.hex() + " does not verify");
  }
  ledger.add_validator(candidate);
}

bool StrikeBook::strike(const PublicKey& validator) { return ++strikes_[validator] == limit_; }

int StrikeBook::strikes(const PublicKey& validator) const {
  auto it = strikes_.find(validator);
  return it == strikes_.end() ? 0 : it->second;
}

}  // namespace dpki
