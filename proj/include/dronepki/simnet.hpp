#pragma once

// Deterministic discrete-event simulation of the issuance network.
//
// Time model (1 tick = tick_seconds of simulated time):
//   - every message costs 1 tick;
//   - a validator runs validation work and consensus work on two lanes,
//     each processing one job at a time; most jobs cost 1 tick;
//   - a proposer's pre-check reads the pending pool and the ledger and costs
//     1 + bit_width(|ledger|) + bit_width(|pending|) ticks;
//   - before endorsing, the proposer re-reads the ledger at a cost of
//     1 + bit_width(|ledger|) ticks;
//   - a validator polls the registry poll_delay ticks after issuing a token.
// Commit rounds run one at a time; validation sessions run concurrently, at
// most one per validator.

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "dronepki/consensus.hpp"
#include "dronepki/ledger.hpp"

namespace dpki {

enum class ChallengeMode { SignOnly, Handshake };

std::string_view to_string(ChallengeMode mode);
ChallengeMode challenge_mode_from_string(std::string_view s);

struct AdversaryScenario {
  enum class Kind { None, IsrSpoofing, MaliciousValidators, VictimTargeting, SybilWave };

  Kind kind = Kind::None;
  std::size_t count = 0;     // spoof attempts, malicious validators or Sybils
  std::size_t victim = 0;    // operator index
  std::size_t offender = 0;  // validator index

  // Negative controls for IsrSpoofing: each breaks one trust assumption.
  bool spoofer_has_acl = false;
  bool spoofer_has_victim_key = false;

  /// none | spoof[:K] | malicious:K | target:V,O | sybil:K
  static AdversaryScenario parse(std::string_view text);
  std::string describe() const;
};

struct OpMix {
  unsigned initial = 70;
  unsigned revoke = 20;
  unsigned verify = 10;
};

struct SimConfig {
  std::uint64_t seed = 1;
  std::size_t n_validators = 4;
  std::size_t n_operators = 2;
  std::size_t n_transactions = 10;
  ChallengeMode mode = ChallengeMode::SignOnly;
  Tick age_threshold = 32;
  int poll_retries = 3;
  Tick poll_delay = 32;
  Tick vote_timeout = 128;
  Tick tick_budget = 10'000'000;
  Tick cert_lifetime = 1'000'000;
  OpMix mix;
  AdversaryScenario adversary;
  /// Voters also fetch the registry token instead of trusting the transcript.
  bool strict_voting = false;
  /// Verify votes with OpenMP; the trace is identical either way.
  bool parallel = false;
  double tick_seconds = 1e-3;

  /// Throws Error(InvalidConfig).
  void validate() const;
};

enum class OpClass { Registration, Revocation, Verification };

std::string_view to_string(OpClass op);
inline constexpr std::array<OpClass, 3> kOpClasses = {OpClass::Registration, OpClass::Revocation,
                                                      OpClass::Verification};

struct ClassMetrics {
  std::size_t submitted = 0;
  std::size_t completed = 0;
  Tick first_submit = 0;
  Tick last_complete = 0;
  double latency_ticks_sum = 0;

  double mean_latency_ticks() const;
  /// Completed operations per tick over [first submission, last completion].
  double throughput_per_tick() const;
};

struct SimMetrics {
  std::array<ClassMetrics, 3> classes{};
  std::size_t rounds = 0;
  std::size_t committed = 0;
  std::size_t failed_rounds = 0;
  std::size_t terminal_rejections = 0;
  std::size_t invalid_commits = 0;
  std::size_t spoof_attempts = 0;
  std::size_t spoof_commits = 0;
  std::size_t foreign_votes = 0;
  std::size_t rejected_admissions = 0;
  std::size_t escalations = 0;
  std::size_t evictions = 0;
  std::size_t queries = 0;
  std::size_t incoherent_answers = 0;
  std::map<std::string, std::size_t> reject_reasons;
  bool majority_compromise = false;
  double mean_block_bytes = 0;
  Tick end_tick = 0;

  std::size_t victim_transactions = 0;
  std::size_t victim_committed = 0;
  /// Commit rounds elapsed between a victim transaction's submission and its commit.
  std::vector<std::uint64_t> victim_commit_rounds;

  const ClassMetrics& of(OpClass op) const { return classes[static_cast<std::size_t>(op)]; }
  ClassMetrics& of(OpClass op) { return classes[static_cast<std::size_t>(op)]; }
};

struct SimTrace {
  Ledger ledger;
  SimMetrics metrics;
  InactivityLog inactivity;
  RewardTally rewards;
  std::vector<PublicKey> validators;  // admitted at setup, in node order
  std::vector<PublicKey> evicted;
  bool budget_exhausted = false;
};

/// Runs one scenario to completion. When `trace` is given, every event is
/// written to it as one JSON object per line.
SimTrace run(const SimConfig& config, std::ostream* trace = nullptr);

}  // namespace dpki
