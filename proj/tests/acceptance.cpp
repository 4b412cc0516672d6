// Acceptance gate: one PASS/FAIL line per criterion; exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "dronepki/bench.hpp"
#include "dronepki/consensus.hpp"
#include "dronepki/handshake.hpp"
#include "dronepki/plugin.hpp"
#include "dronepki/replay.hpp"
#include "dronepki/simnet.hpp"
#include "oracle.hpp"
#include "support.hpp"

using namespace dpki;

namespace {

struct Outcome {
  bool ok = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

bool gate(int id, const char* name, double limit_s, const std::function<Outcome()>& body) {
  const auto start = Clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(Clock::now() - start).count();
  const bool in_time = secs < limit_s;
  const bool pass = o.ok && in_time;
  std::printf("%s %2d %s: %s [%.2f s, limit %.0f s%s]\n", pass ? "PASS" : "FAIL", id, name,
              o.detail.c_str(), secs, limit_s, in_time ? "" : ", too slow");
  std::fflush(stdout);
  return pass;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// -- 1 ------------------------------------------------------------------------

Outcome threshold_exactness() {
  const auto op = test::key("acc-op");
  const Transaction tx = test::initial(op, "Drone_1");
  std::size_t cases = 0, agree = 0;
  for (std::size_t n = 1; n <= 9; ++n) {
    const auto sv = test::keys("acc-sv", n);
    for (std::size_t k = 0; k <= n; ++k) {
      Ledger ledger(test::public_keys(sv));
      const auto set = ledger.validator_set();
      Round round(0, select_proposer(0, set), {tx, {}}, ledger.next_header(tx.crt_type, tx.drone_name, 1),
                  set, 10);
      for (std::size_t i = 0; i < n; ++i) {
        const Verdict v = i < k ? Verdict::Approve : Verdict::Reject;
        round.add_vote(sign_vote(sv[i], 0, v, round.signing()), 1);
      }
      // Brute force: count the voters on each side.
      std::size_t yes = 0;
      for (const auto& [key, vote] : round.votes()) yes += vote.verdict == Verdict::Approve;
      const bool oracle = yes > n - yes;
      const bool committed = collect_and_commit(round, ledger).committed;
      ++cases;
      agree += committed == oracle && ledger.size() == (oracle ? 1u : 0u);
    }
  }
  return {agree == cases && cases == 54, fmt("%zu/%zu (n,k) cases agree", agree, cases)};
}

// -- 2 ------------------------------------------------------------------------

using Flip = std::function<void(Block&, std::uint8_t mask)>;

template <typename Get>
void byte_slots(std::vector<Flip>& out, std::size_t n, Get get) {
  for (std::size_t k = 0; k < n; ++k) {
    out.push_back([get, k](Block& b, std::uint8_t m) { get(b)[k] ^= m; });
  }
}

// One entry per byte of the header and body payload, acting on the decoded fields.
std::vector<Flip> field_bytes(const Block& b) {
  std::vector<Flip> out;
  auto u64 = [&](auto get) {
    for (int k = 0; k < 8; ++k) {
      out.push_back([get, k](Block& x, std::uint8_t m) { get(x) ^= std::uint64_t{m} << (8 * k); });
    }
  };
  u64([](Block& x) -> std::uint64_t& { return x.header.serial_number; });
  out.push_back([](Block& x, std::uint8_t) {
    x.header.crt_type = x.header.crt_type == CrtType::Initial ? CrtType::Revoke : CrtType::Initial;
  });
  byte_slots(out, kDigestSize, [](Block& x) -> auto& { return x.header.global_prev.bytes; });
  out.push_back([](Block& x, std::uint8_t) {
    x.header.service_prev = x.header.service_prev ? std::nullopt : std::optional(Digest::zero());
  });
  if (b.header.service_prev) {
    byte_slots(out, kDigestSize, [](Block& x) -> auto& { return x.header.service_prev->bytes; });
  }
  u64([](Block& x) -> std::uint64_t& { return x.header.timestamp; });
  byte_slots(out, b.body.drone_name.size(), [](Block& x) -> auto& { return x.body.drone_name; });
  byte_slots(out, kPublicKeySize, [](Block& x) -> auto& { return x.body.operator_pubkey.bytes; });
  byte_slots(out, b.body.operator_signature.bytes.size(),
             [](Block& x) -> auto& { return x.body.operator_signature.bytes; });
  u64([](Block& x) -> std::uint64_t& { return x.body.expiry; });
  byte_slots(out, kDigestSize, [](Block& x) -> auto& { return x.body.csr_digest.bytes; });
  return out;
}

Outcome tamper_evidence() {
  std::mt19937_64 rng(2);
  SimConfig cfg;
  cfg.n_transactions = 60;
  const SimTrace run_trace = run(cfg);
  const auto& all = run_trace.ledger.blocks();
  if (all.size() < 50) return {false, "simulated ledger has fewer than 50 blocks"};
  const std::vector<Block> built(all.begin(), all.begin() + 50);
  const Ledger ledger = Ledger::from_blocks(run_trace.ledger.validator_set(), run_trace.ledger.roster(), built);
  if (!verify_chain(ledger).ok) return {false, "untampered ledger failed verification"};
  std::size_t trials = 0, caught = 0;
  for (std::size_t i = 0; i < built.size(); ++i) {
    const auto slots = field_bytes(built[i]);
    for (int f = 0; f < 20; ++f) {
      ++trials;
      auto blocks = built;
      slots[rng() % slots.size()](blocks[i], static_cast<std::uint8_t>(1u << (rng() % 8)));
      const Ledger t = Ledger::from_blocks(ledger.validator_set(), ledger.roster(), std::move(blocks));
      caught += !verify_chain(t).ok;
    }
  }
  return {caught == trials && trials == 1000,
          fmt("verify_chain rejects %zu/%zu tampered ledgers, untampered verifies", caught, trials)};
}

// -- 3 ------------------------------------------------------------------------

Outcome challenge_soundness() {
  std::mt19937_64 rng(3);
  std::size_t attempts = 0, commits = 0, runs = 0;
  std::map<std::string, std::size_t> reasons;
  while (attempts < 1000) {
    SimConfig cfg;
    cfg.seed = rng();
    cfg.n_validators = 3 + rng() % 5;
    cfg.n_operators = 1 + rng() % 3;
    cfg.n_transactions = 10;
    cfg.mode = rng() % 2 ? ChallengeMode::Handshake : ChallengeMode::SignOnly;
    cfg.strict_voting = rng() % 2;
    cfg.adversary.kind = AdversaryScenario::Kind::IsrSpoofing;
    cfg.adversary.count = std::min<std::size_t>(10, 1000 - attempts);
    const SimTrace t = run(cfg);
    if (t.budget_exhausted) return {false, "tick budget exhausted"};
    ++runs;
    attempts += t.metrics.spoof_attempts;
    commits += t.metrics.spoof_commits;
    for (const auto& [r, k] : t.metrics.reject_reasons) reasons[r] += k;
  }
  std::string why;
  for (const auto& [r, k] : reasons) why += (why.empty() ? "" : ", ") + r + "=" + std::to_string(k);
  return {commits == 0 && attempts == 1000,
          fmt("%zu spoofed certificates committed of %zu attempts over %zu runs (%s)", commits, attempts,
              runs, why.c_str())};
}

// -- 4 ------------------------------------------------------------------------

Outcome minority_impotence() {
  std::size_t minority_invalid = 0, majority_invalid = 0, majority_runs_with = 0, unlabeled = 0;
  for (std::size_t n : {3, 5, 7}) {
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
      for (std::size_t m : {n / 2, n / 2 + 1}) {
        SimConfig cfg;
        cfg.seed = seed;
        cfg.n_validators = n;
        cfg.n_transactions = 10;
        cfg.adversary.kind = AdversaryScenario::Kind::MaliciousValidators;
        cfg.adversary.count = m;
        const SimTrace t = run(cfg);
        if (m == n / 2) {
          minority_invalid += t.metrics.invalid_commits;
        } else {
          majority_invalid += t.metrics.invalid_commits;
          majority_runs_with += t.metrics.invalid_commits > 0;
          unlabeled += t.metrics.invalid_commits > 0 && !t.metrics.majority_compromise;
        }
      }
    }
  }
  return {minority_invalid == 0 && majority_invalid > 0 && unlabeled == 0,
          fmt("minority: %zu invalid commits; majority: %zu invalid commits in %zu/300 runs, %zu unlabeled",
              minority_invalid, majority_invalid, majority_runs_with, unlabeled)};
}

// -- 5 ------------------------------------------------------------------------

Outcome victim_liveness() {
  std::size_t ok_runs = 0, logged = 0, quiet_controls = 0;
  std::uint64_t worst = 0, bound = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    SimConfig cfg;
    cfg.seed = seed;
    cfg.n_validators = 5;
    cfg.n_operators = 3;
    // Backlog no larger than the bound.
    cfg.n_transactions = 40;
    SimConfig control = cfg;
    cfg.adversary.kind = AdversaryScenario::Kind::VictimTargeting;
    cfg.adversary.victim = seed % cfg.n_operators;
    cfg.adversary.offender = seed % cfg.n_validators;
    const SimTrace t = run(cfg);
    bound = cfg.age_threshold + cfg.n_validators;
    const auto& rounds = t.metrics.victim_commit_rounds;
    const std::uint64_t w = rounds.empty() ? 0 : *std::max_element(rounds.begin(), rounds.end());
    worst = std::max(worst, w);
    const bool all = t.metrics.victim_transactions > 0 &&
                     t.metrics.victim_committed == t.metrics.victim_transactions;
    ok_runs += all && w <= bound;
    logged += t.inactivity.count(t.validators[cfg.adversary.offender]) > 0;
    quiet_controls += run(control).inactivity.total() == 0;
  }
  return {ok_runs == 100 && logged == 100 && quiet_controls == 100,
          fmt("%zu/100 runs commit every victim transaction within %llu rounds (worst %llu), "
              "offender logged in %zu/100, %zu/100 controls without offender log nothing",
              ok_runs, static_cast<unsigned long long>(bound), static_cast<unsigned long long>(worst),
              logged, quiet_controls)};
}

// -- 6 ------------------------------------------------------------------------

Outcome sybil_neutrality() {
  std::size_t identical = 0, runs = 0, rejected = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    SimConfig base;
    base.seed = seed;
    base.n_transactions = 30;
    SimConfig sybil = base;
    sybil.adversary.kind = AdversaryScenario::Kind::SybilWave;
    sybil.adversary.count = 100;
    std::ostringstream a, b;
    const SimTrace ta = run(base);
    const SimTrace tb = run(sybil);
    export_jsonl(ta.ledger, a);
    export_jsonl(tb.ledger, b);
    ++runs;
    identical += a.str() == b.str();
    rejected += tb.metrics.rejected_admissions;
  }
  return {identical == runs && rejected == 100 * runs,
          fmt("%zu/%zu terminal ledgers byte-identical to baseline, %zu/%zu Sybil admissions rejected",
              identical, runs, rejected, 100 * runs)};
}

// -- 7 ------------------------------------------------------------------------

Outcome plugin_coherence() {
  // Named cases: Drone_1 active, Drone_2 revoked.
  const auto sv = test::keys("acc-named-sv", 4);
  const auto op = test::key("acc-named-op");
  Ledger fig(test::public_keys(sv));
  test::commit(fig, sv, test::initial(op, "Drone_1"), 1);
  test::commit(fig, sv, test::initial(op, "Drone_2"), 2);
  test::commit(fig, sv, test::revoke(op, fig, "Drone_2"), 3);
  VerificationArray fa;
  fa.sync(fig, 3);
  const bool named = fa.is_valid("Drone_1") && !fa.is_valid("Drone_2");

  std::mt19937_64 rng(7);
  const std::size_t drones = 40;
  const auto c = test::lifecycle_corpus(rng, 500, drones, 4, 3, 5, 200);
  Ledger growing(c.ledger.validator_set());
  VerificationArray plugin;
  std::size_t next = 0, checks = 0, agree = 0;
  for (Tick now = 0; now <= c.last_tick + 250; ++now) {
    while (next < c.ledger.size() && c.ledger.blocks()[next].header.timestamp <= now) {
      growing.append(c.ledger.blocks()[next++]);
    }
    plugin.sync(growing, now);
    for (std::size_t d = 0; d <= drones + 1; ++d) {
      const std::string name = "Drone_" + std::to_string(d);
      ++checks;
      agree += plugin.is_valid(name) == (test::status_fold(c.ledger, name, now) == CertStatus::Active);
    }
  }
  return {named && agree == checks,
          fmt("%zu/%zu (drone, tick) checks agree over %zu blocks; named cases %s", agree, checks,
              c.ledger.size(), named ? "reproduce" : "differ")};
}

// -- 8 ------------------------------------------------------------------------

HandshakeStep next_check(HandshakeMessage m) {
  switch (m) {
    case HandshakeMessage::EncReq:
    case HandshakeMessage::Signature: return HandshakeStep::SvVerifyRequest;
    case HandshakeMessage::EncToken:
    case HandshakeMessage::TokenSig: return HandshakeStep::DoVerifyToken;
    default: return HandshakeStep::SvVerifyTokenReturn;
  }
}

Outcome handshake_fidelity() {
  std::size_t honest = 0, aborted = 0, tampered = 0;
  std::mt19937_64 rng(8);
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto op = test::key("acc-hs-op", seed);
    const auto sv = test::key("acc-hs-sv", seed);
    HandshakeParams p;
    p.csr = {1, 2, 3, static_cast<std::uint8_t>(seed)};
    p.drone_name = "Drone_" + std::to_string(seed);
    p.seed = derive_seed("acc-hs", as_bytes(std::to_string(seed)));
    const auto rec = run_handshake(op, sv, p);
    honest += rec.initialtoken == rec.enctoken.ciphertext &&
              handshake_record_consistent(rec, op.public_key(), sv.public_key());
    for (auto target : kHandshakeMessages) {
      ++tampered;
      const std::size_t pos = rng();
      const auto mask = static_cast<std::uint8_t>(1u << (rng() % 8));
      try {
        run_handshake(op, sv, p, [&](HandshakeMessage m, Bytes& wire) {
          if (m == target) wire[pos % wire.size()] ^= mask;
        });
      } catch (const HandshakeAbort& e) {
        aborted += e.step() <= next_check(target);
      }
    }
  }
  return {honest == 100 && aborted == tampered,
          fmt("%zu/100 honest runs pass the assert; %zu/%zu tampered runs abort by the next check",
              honest, aborted, tampered)};
}

// -- 9 ------------------------------------------------------------------------

double at(const std::vector<BenchPoint>& pts, std::uint64_t axis, OpClass op) {
  for (const auto& p : pts) {
    if (p.axis == axis && p.op_class == op) return p.throughput_ops;
  }
  return 0;
}

Outcome performance_trends() {
  SweepOptions o;
  o.repetitions = 5;
  const std::vector<std::size_t> nodes = {4, 8, 12}, txs = {500, 1000, 2000};
  const auto pn = sweep_nodes(nodes, 2000, o);
  const auto pt = sweep_transactions(txs, 12, o);
  bool ok = true;
  std::string d;
  auto series = [&](const char* label, const std::vector<BenchPoint>& pts,
                    const std::vector<std::size_t>& axis, OpClass op) {
    std::vector<double> v;
    for (auto a : axis) v.push_back(at(pts, a, op));
    d += fmt("%s %s %.1f/%.1f/%.1f; ", label, std::string(to_string(op)).c_str(), v[0], v[1], v[2]);
    return v;
  };
  for (OpClass op : {OpClass::Registration, OpClass::Revocation}) {
    const auto v = series("nodes", pn, nodes, op);
    ok = ok && v[0] <= v[1] && v[1] <= v[2];
  }
  {
    const auto v = series("nodes", pn, nodes, OpClass::Verification);
    const double mean = (v[0] + v[1] + v[2]) / 3;
    for (double x : v) ok = ok && std::abs(x - mean) <= 0.2 * mean;
  }
  for (OpClass op : {OpClass::Registration, OpClass::Revocation}) {
    const auto v = series("txs", pt, txs, op);
    ok = ok && v[0] >= v[1] && v[1] >= v[2];
  }
  {
    const auto v = series("txs", pt, txs, OpClass::Verification);
    ok = ok && v[0] <= v[1] && v[1] <= v[2];
  }
  d += "ops/s";
  return {ok, d};
}

// -- 10 -----------------------------------------------------------------------

Outcome block_size() {
  SimConfig cfg;
  cfg.n_transactions = 100;
  const SimTrace t = run(cfg);
  const double bytes = measure_block_size(t.ledger);
  SweepOptions o;
  o.base = cfg;
  const Json meta = bench_metadata("block_size", {cfg.n_transactions}, o, {});
  const double kb = bytes / 1000.0;
  return {kb >= 0.2 && kb <= 2.0 && t.metrics.mean_block_bytes == bytes,
          fmt("mean block %.1f bytes = %.3f KB over %zu blocks (%s)", bytes, kb, t.ledger.size(),
              meta.at("primitives").at("signature").get<std::string>().c_str())};
}

// -- 11 -----------------------------------------------------------------------

Outcome determinism() {
  std::size_t configs = 0, identical = 0, discrepancies = 0;
  for (const char* adv : {"none", "spoof:6", "malicious:2", "malicious:3", "target:1,2", "sybil:20"}) {
    for (auto mode : {ChallengeMode::SignOnly, ChallengeMode::Handshake}) {
      for (bool parallel : {false, true}) {
        SimConfig cfg;
        cfg.seed = 11 + configs;
        cfg.n_validators = 5;
        cfg.n_operators = 3;
        cfg.n_transactions = 25;
        cfg.mode = mode;
        cfg.parallel = parallel;
        cfg.adversary = AdversaryScenario::parse(adv);
        std::ostringstream a, b;
        run(cfg, &a);
        run(cfg, &b);
        ++configs;
        identical += a.str() == b.str();
        std::istringstream in(a.str());
        discrepancies += replay_trace(in).discrepancies;
      }
    }
  }
  return {identical == configs && discrepancies == 0,
          fmt("%zu/%zu configurations byte-identical on repeat, %zu replay discrepancies", identical,
              configs, discrepancies)};
}

}  // namespace

int main(int argc, char** argv) {
  // Optional arguments select criteria by number.
  std::vector<int> only;
  for (int i = 1; i < argc; ++i) only.push_back(std::atoi(argv[i]));
  auto want = [&](int id) { return only.empty() || std::find(only.begin(), only.end(), id) != only.end(); };

  struct Criterion {
    int id;
    const char* name;
    double limit_s;
    Outcome (*body)();
  };
  const Criterion criteria[] = {
      {1, "threshold exactness", 1, threshold_exactness},
      {2, "tamper evidence", 10, tamper_evidence},
      {3, "challenge soundness", 30, challenge_soundness},
      {4, "minority impotence", 60, minority_impotence},
      {5, "victim-targeting liveness", 30, victim_liveness},
      {6, "sybil neutrality", 30, sybil_neutrality},
      {7, "plugin coherence", 10, plugin_coherence},
      {8, "handshake model fidelity", 10, handshake_fidelity},
      {9, "performance trends", 600, performance_trends},
      {10, "block size order of magnitude", 5, block_size},
      {11, "determinism", 30, determinism},
  };
  bool ok = true;
  for (const auto& c : criteria) {
    if (want(c.id)) ok &= gate(c.id, c.name, c.limit_s, c.body);
  }
  std::printf("%s\n", ok ? "ALL CRITERIA PASS" : "SOME CRITERIA FAIL");
  return ok ? 0 : 1;
}
