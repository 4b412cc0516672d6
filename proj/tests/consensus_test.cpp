#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "dronepki/consensus.hpp"
#include "support.hpp"

namespace dpki {
namespace {

Errc vote_error(Round& round, const Vote& v, Tick now) {
  try {
    round.add_vote(v, now);
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "vote accepted";
  return Errc::DecodeError;
}

struct Fixture {
  std::vector<KeyPair> sv;
  KeyPair op = test::key("op");
  Ledger ledger;

  explicit Fixture(std::size_t n) : sv(test::keys("sv", n)), ledger(test::public_keys(sv)) {}

  Round round(std::uint64_t id, const Transaction& tx, Tick ts = 1, Tick deadline = 100) const {
    return Round(id, sv[0].public_key(), Candidate{tx, {}},
                 ledger.next_header(tx.crt_type, tx.drone_name, ts), ledger.validator_set(), deadline);
  }
};

TEST(SelectProposer, RoundRobinOverSortedKeys) {
  const auto ks = test::public_keys(test::keys("sv", 4));
  auto sorted = ks;
  std::sort(sorted.begin(), sorted.end());
  std::map<PublicKey, int> counts;
  for (std::uint64_t r = 0; r < 8; ++r) {
    EXPECT_EQ(select_proposer(r, ks), sorted[r % 4]);
    ++counts[select_proposer(r, ks)];
  }
  for (const auto& [k, c] : counts) EXPECT_EQ(c, 2);

  auto permuted = ks;
  std::reverse(permuted.begin(), permuted.end());
  for (std::uint64_t r = 0; r < 8; ++r) EXPECT_EQ(select_proposer(r, permuted), select_proposer(r, ks));

  const std::vector<PublicKey> one = {ks[2]};
  for (std::uint64_t r = 0; r < 5; ++r) EXPECT_EQ(select_proposer(r, one), ks[2]);
  try {
    select_proposer(0, {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::EmptyValidatorSet);
  }
}

TEST(Vote, SignaturesBindVerdictAndDigest) {
  const auto k = test::key("v");
  const Digest d = digest(as_bytes("block"));
  const Vote a = sign_vote(k, 3, Verdict::Approve, d);
  const Vote r = sign_vote(k, 3, Verdict::Reject, d);
  EXPECT_TRUE(vote_valid(a, d));
  EXPECT_TRUE(vote_valid(r, d));
  EXPECT_TRUE(verify(k.public_key(), d.view(), a.signature));
  Vote flipped = r;
  flipped.verdict = Verdict::Approve;
  EXPECT_FALSE(vote_valid(flipped, d));
  EXPECT_FALSE(vote_valid(a, digest(as_bytes("other"))));
}

TEST(Round, VoteGuards) {
  Fixture s(4);
  Round round = s.round(7, test::initial(s.op, "Drone_1"), 1, 50);
  const KeyPair outsider = test::key("outsider");
  EXPECT_EQ(vote_error(round, sign_vote(outsider, 7, Verdict::Approve, round.signing()), 2),
            Errc::ForeignVote);
  EXPECT_EQ(vote_error(round, sign_vote(s.sv[1], 6, Verdict::Approve, round.signing()), 2),
            Errc::StaleRound);
  EXPECT_EQ(vote_error(round, sign_vote(s.sv[1], 7, Verdict::Approve, round.signing()), 51),
            Errc::StaleRound);
  round.add_vote(sign_vote(s.sv[1], 7, Verdict::Approve, round.signing()), 50);
  EXPECT_EQ(vote_error(round, sign_vote(s.sv[1], 7, Verdict::Reject, round.signing()), 3),
            Errc::DoubleVote);
  Vote bad = sign_vote(s.sv[2], 7, Verdict::Approve, round.signing());
  bad.signature.bytes[5] ^= 1;
  EXPECT_EQ(vote_error(round, bad, 3), Errc::BadVoteSignature);
  EXPECT_EQ(round.votes().size(), 1u);
}

TEST(Round, CommitsWithThreeOfFourAndCredits) {
  Fixture s(4);
  const auto tx = test::initial(s.op, "Drone_1");
  Round round = s.round(0, tx);
  for (int i = 0; i < 3; ++i) round.add_vote(sign_vote(s.sv[i], 0, Verdict::Approve, round.signing()), 1);
  round.add_vote(sign_vote(s.sv[3], 0, Verdict::Reject, round.signing()), 1);
  RewardTally tally;
  const auto res = collect_and_commit(round, s.ledger, &tally);
  ASSERT_TRUE(res.committed);
  EXPECT_EQ(res.block->footer.approvals.size(), 3u);
  EXPECT_EQ(res.block->footer.validator_count, 4u);
  EXPECT_EQ(s.ledger.size(), 1u);
  for (int i = 0; i < 3; ++i) EXPECT_EQ(tally.credit(s.sv[i].public_key()), 1u);
  EXPECT_EQ(tally.credit(s.sv[3].public_key()), 0u);
  EXPECT_EQ(tally.total(), 3u);
  EXPECT_TRUE(std::is_sorted(res.block->footer.approvals.begin(), res.block->footer.approvals.end(),
                             [](const Approval& a, const Approval& b) { return a.validator < b.validator; }));
}

TEST(Round, TwoOfFourFails) {
  Fixture s(4);
  Round round = s.round(0, test::initial(s.op, "Drone_1"));
  for (int i = 0; i < 2; ++i) round.add_vote(sign_vote(s.sv[i], 0, Verdict::Approve, round.signing()), 1);
  RewardTally tally;
  const auto res = collect_and_commit(round, s.ledger, &tally);
  EXPECT_FALSE(res.committed);
  EXPECT_EQ(res.reason, Errc::InsufficientApprovals);
  EXPECT_TRUE(s.ledger.empty());
  EXPECT_EQ(tally.total(), 0u);
}

TEST(Round, ThresholdExhaustiveAgainstBruteForce) {
  for (std::size_t n = 1; n <= 9; ++n) {
    Fixture s(n);
    for (std::size_t k = 0; k <= n; ++k) {
      Ledger ledger(test::public_keys(s.sv));
      const auto tx = test::initial(s.op, "Drone_1");
      Round round(0, s.sv[0].public_key(), Candidate{tx, {}},
                  ledger.next_header(tx.crt_type, tx.drone_name, 1), ledger.validator_set(), 10);
      for (std::size_t i = 0; i < n; ++i) {
        round.add_vote(sign_vote(s.sv[i], 0, i < k ? Verdict::Approve : Verdict::Reject, round.signing()), 1);
      }
      // Brute force: count subsets-of-one-more-than-half.
      std::size_t majority = 0;
      while (2 * majority <= n) ++majority;
      const bool oracle = k >= majority;
      EXPECT_EQ(collect_and_commit(round, ledger).committed, oracle) << n << "," << k;
      EXPECT_EQ(ledger.size(), oracle ? 1u : 0u);
    }
  }
}

TEST(Round, DecisionPredicates) {
  Fixture s(5);
  Round round = s.round(0, test::initial(s.op, "Drone_1"));
  EXPECT_FALSE(round.decided());
  round.add_vote(sign_vote(s.sv[0], 0, Verdict::Reject, round.signing()), 1);
  round.add_vote(sign_vote(s.sv[1], 0, Verdict::Reject, round.signing()), 1);
  EXPECT_FALSE(round.approval_impossible());
  round.add_vote(sign_vote(s.sv[2], 0, Verdict::Reject, round.signing()), 1);
  EXPECT_TRUE(round.approval_impossible());
  EXPECT_TRUE(round.majority_rejected());
  EXPECT_FALSE(round.approved());
}

TEST(Rewards, ConservationOverCommittedBlocks) {
  std::mt19937_64 rng(1);
  Fixture s(5);
  RewardTally tally;
  std::uint64_t footer_sum = 0;
  for (int i = 0; i < 30; ++i) {
    const auto tx = test::initial(s.op, "Drone_" + std::to_string(i));
    Round round = s.round(i, tx, 1 + i);
    for (std::size_t v = 0; v < 5; ++v) {
      const auto verdict = rng() % 3 ? Verdict::Approve : Verdict::Reject;
      round.add_vote(sign_vote(s.sv[v], i, verdict, round.signing()), 1 + i);
    }
    const auto res = collect_and_commit(round, s.ledger, &tally);
    if (res.committed) footer_sum += res.block->footer.approvals.size();
  }
  EXPECT_EQ(tally.total(), footer_sum);
  std::uint64_t sum = 0;
  for (const auto& [k, c] : tally.credits()) sum += c;
  EXPECT_EQ(sum, footer_sum);
}

TEST(Escalation, AgedEntriesInPriorityOrder) {
  Fixture s(3);
  EXPECT_TRUE(escalate_pending(s.ledger, 100, 10).empty());
  s.ledger.submit(test::initial(s.op, "A"), 5);
  s.ledger.submit(test::initial(s.op, "B"), 1);
  s.ledger.submit(test::initial(s.op, "C"), 50);
  const auto aged = escalate_pending(s.ledger, 20, 10);
  ASSERT_EQ(aged.size(), 2u);
  EXPECT_EQ(aged[0].tx.drone_name, "B");
  EXPECT_EQ(aged[1].tx.drone_name, "A");
}

TEST(Inactivity, CountsAreMonotone) {
  InactivityLog log;
  const auto a = test::key("a").public_key(), b = test::key("b").public_key();
  std::size_t last = 0;
  for (int i = 0; i < 10; ++i) {
    log.record(i % 3 ? a : b, i % 2 ? InactivityKind::MissedVote : InactivityKind::SkippedProposal, i, i);
    EXPECT_GE(log.count(a), last);
    last = log.count(a);
  }
  EXPECT_EQ(log.count(a) + log.count(b), log.total());
  EXPECT_EQ(log.entries().size(), 10u);
}

TEST(Membership, CredentialedAdmittedOthersRejected) {
  const KeyPair root = test::key("root");
  Fixture s(3);
  const KeyPair good = test::key("new");
  admit_validator(s.ledger, root.public_key(), good.public_key(), issue_credential(root, good.public_key()));
  EXPECT_TRUE(s.ledger.is_validator(good.public_key()));

  const KeyPair self = test::key("self");
  const KeyPair forger = test::key("forger");
  const auto before = s.ledger.validator_set();
  for (const Signature& cred : {issue_credential(self, self.public_key()),
                                issue_credential(forger, self.public_key()),
                                issue_credential(root, good.public_key())}) {
    try {
      admit_validator(s.ledger, root.public_key(), self.public_key(), cred);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), Errc::BadCredential);
    }
  }
  EXPECT_EQ(s.ledger.validator_set(), before);
  EXPECT_TRUE(credential_valid(root.public_key(), good.public_key(), issue_credential(root, good.public_key())));
}

TEST(Strikes, LimitIsThree) {
  StrikeBook book;
  const auto k = test::key("k").public_key();
  EXPECT_FALSE(book.strike(k));
  EXPECT_FALSE(book.strike(k));
  EXPECT_TRUE(book.strike(k));
  EXPECT_EQ(book.strikes(k), 3);
  EXPECT_EQ(book.strikes(test::key("j").public_key()), 0);
}

}  // namespace
}  // namespace dpki
