#include "dronepki/simnet.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <deque>
#include <functional>
#include <optional>
#include <ostream>
#include <queue>
#include <random>
#include <set>

#include "dronepki/bench.hpp"
#include "dronepki/handshake.hpp"
#include "dronepki/plugin.hpp"
#include "dronepki/registry.hpp"
#include "dronepki/serialization.hpp"
#include "dronepki/validator.hpp"

namespace dpki {

std::string_view to_string(ChallengeMode mode) {
  return mode == ChallengeMode::SignOnly ? "sign-only" : "handshake";
}

ChallengeMode challenge_mode_from_string(std::string_view s) {
  if (s == "sign-only") return ChallengeMode::SignOnly;
  if (s == "handshake") return ChallengeMode::Handshake;
  throw Error(Errc::InvalidConfig, "unknown mode '" + std::string(s) + "'");
}

std::string_view to_string(OpClass op) {
  switch (op) {
    case OpClass::Registration: return "registration";
    case OpClass::Revocation: return "revocation";
    case OpClass::Verification: return "verification";
  }
  return "unknown";
}

namespace {

std::size_t parse_count(std::string_view text, std::string_view whole) {
  std::size_t value = 0;
  auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || end != text.data() + text.size() || text.empty()) {
    throw Error(Errc::InvalidConfig, "bad adversary '" + std::string(whole) + "'");
  }
  return value;
}

}  // namespace

AdversaryScenario AdversaryScenario::parse(std::string_view text) {
  AdversaryScenario a;
  const auto colon = text.find(':');
  const auto kind = text.substr(0, colon);
  const auto arg = colon == std::string_view::npos ? std::string_view{} : text.substr(colon + 1);
  if (kind == "none" && arg.empty()) return a;
  if (kind == "spoof") {
    a.kind = Kind::IsrSpoofing;
    if (colon != std::string_view::npos) a.count = parse_count(arg, text);
    return a;
  }
  if (kind == "malicious") {
    a.kind = Kind::MaliciousValidators;
    a.count = parse_count(arg, text);
    return a;
  }
  if (kind == "sybil") {
    a.kind = Kind::SybilWave;
    a.count = parse_count(arg, text);
    return a;
  }
  if (kind == "target") {
    const auto comma = arg.find(',');
    if (comma == std::string_view::npos) {
      throw Error(Errc::InvalidConfig, "target needs V,O: '" + std::string(text) + "'");
    }
    a.kind = Kind::VictimTargeting;
    a.victim = parse_count(arg.substr(0, comma), text);
    a.offender = parse_count(arg.substr(comma + 1), text);
    return a;
  }
  throw Error(Errc::InvalidConfig, "unknown adversary '" + std::string(text) + "'");
}

std::string AdversaryScenario::describe() const {
  switch (kind) {
    case Kind::None: return "none";
    case Kind::IsrSpoofing: {
      std::string s = count ? "spoof:" + std::to_string(count) : "spoof";
      if (spoofer_has_acl) s += "+acl";
      if (spoofer_has_victim_key) s += "+victim-key";
      return s;
    }
    case Kind::MaliciousValidators: return "malicious:" + std::to_string(count);
    case Kind::VictimTargeting:
      return "target:" + std::to_string(victim) + "," + std::to_string(offender);
    case Kind::SybilWave: return "sybil:" + std::to_string(count);
  }
  return "none";
}

void SimConfig::validate() const {
  auto fail = [](const std::string& what) { throw Error(Errc::InvalidConfig, what); };
  if (n_validators == 0) fail("n_validators must be positive");
  if (n_operators == 0) fail("n_operators must be positive");
  if (n_transactions == 0) fail("n_transactions must be positive");
  if (poll_retries < 1) fail("poll_retries must be at least 1");
  if (vote_timeout == 0) fail("vote_timeout must be positive");
  if (mix.initial == 0) fail("mix needs initial transactions");
  if (mix.revoke > mix.initial) fail("mix cannot revoke more than it registers");
  if (!(tick_seconds > 0)) fail("tick_seconds must be positive");
  using K = AdversaryScenario::Kind;
  if (adversary.kind == K::MaliciousValidators && adversary.count > n_validators) {
    fail("malicious count exceeds n_validators");
  }
  if (adversary.kind == K::VictimTargeting &&
      (adversary.victim >= n_operators || adversary.offender >= n_validators)) {
    fail("target indices out of range");
  }
}

double ClassMetrics::mean_latency_ticks() const {
  return completed ? latency_ticks_sum / static_cast<double>(completed) : 0.0;
}

double ClassMetrics::throughput_per_tick() const {
  if (completed == 0) return 0.0;
  const Tick span = last_complete > first_submit ? last_complete - first_submit : 1;
  return static_cast<double>(completed) / static_cast<double>(span);
}

namespace {

bool settled(const Round& r) {
  return r.approved() || r.majority_rejected() || r.votes().size() == r.n();
}

constexpr std::size_t kNone = static_cast<std::size_t>(-1);
constexpr int kTerminalRejections = 2;

Bytes context(std::initializer_list<std::uint64_t> values) {
  CanonicalWriter w;
  for (auto v : values) w.u64(v);
  return std::move(w).bytes();
}

ValidationOutcome rejected(RejectReason reason, ChallengeKind kind) {
  ValidationOutcome out;
  out.reason = reason;
  out.transcript.kind = kind;
  return out;
}

struct ValidatorNode {
  KeyPair key;
  bool malicious = false;
  bool active = true;
  Tick work_free = 0;
  Tick consensus_free = 0;
  std::optional<std::uint64_t> session;
};

struct OperatorNode {
  KeyPair key;
  Tick free = 0;
};

struct PendingMeta {
  OpClass op = OpClass::Registration;
  std::size_t owner = kNone;
  bool spoof = false;
  bool victim = false;
  Tick submitted = 0;
  std::uint64_t submitted_round = 0;
  std::optional<std::uint64_t> session;
  std::optional<std::size_t> excluded;
};

struct Session {
  std::uint64_t id = 0;
  PendingId pending = 0;
  std::size_t proposer = 0;
  int actions = 0;
  int polls = 0;
  std::optional<Signature> t0;
  std::optional<HandshakeRequest> request;
  std::optional<HandshakeChallenge> challenge;
};

struct Proposal {
  PendingId pending = 0;
  std::size_t proposer = 0;
  ValidationOutcome outcome;
};

struct RoundState {
  Round round;
  PendingId pending = 0;
  std::size_t proposer = 0;
  bool oracle_valid = false;
  Tick opened = 0;
  bool commit_scheduled = false;
};

struct RoundLog {
  std::vector<PublicKey> set;
  std::set<PublicKey> voted;
};

struct Event {
  Tick at;
  std::uint64_t id;
  std::function<void()> fn;
};

struct Later {
  bool operator()(const Event& a, const Event& b) const {
    return a.at != b.at ? a.at > b.at : a.id > b.id;
  }
};

class Simulator {
 public:
  Simulator(const SimConfig& config, std::ostream* trace)
      : cfg_(config),
        trace_(trace),
        rng_(config.seed),
        root_(KeyPair::from_seed(derive_seed("root", context({config.seed})))),
        attacker_{KeyPair::from_seed(derive_seed("attacker", context({config.seed})))} {}

  SimTrace run();

 private:
  // -- plumbing ---------------------------------------------------------------
  void at(Tick t, std::function<void()> fn) {
    queue_.push(Event{t, next_event_++, std::move(fn)});
  }

  // Queues a job on a single-server lane; returns its completion tick.
  Tick job(Tick& lane, Tick cost) {
    const Tick start = std::max(lane, now_);
    lane = start + cost;
    return lane;
  }

  template <typename Fill>
  void emit(std::string_view event, Fill&& fill) {
    if (!trace_) return;
    Json j;
    j["tick"] = now_;
    j["event"] = event;
    fill(j);
    *trace_ << j.dump() << '\n';
  }

  bool ignores(std::size_t validator, const PendingMeta& m) const {
    return cfg_.adversary.kind == AdversaryScenario::Kind::VictimTargeting &&
           validator == cfg_.adversary.offender && m.victim;
  }

  const KeyPair& actor_key(const PendingMeta& m) const {
    if (!m.spoof) return operators_[m.owner].key;
    return cfg_.adversary.spoofer_has_victim_key ? operators_[m.owner].key : attacker_.key;
  }

  Tick& actor_lane(const PendingMeta& m) {
    return m.spoof ? attacker_.free : operators_[m.owner].free;
  }

  Tick precheck_cost() const {
    return 1 + std::bit_width(ledger_.size()) + std::bit_width(ledger_.pending().size());
  }
  Tick recheck_cost() const { return 1 + std::bit_width(ledger_.size()); }

  // -- setup --------------------------------------------------------------------
  void setup();
  void inject_spoofing(std::size_t count, bool stale_tokens);
  void inject_malicious_validators(std::size_t count);
  void inject_sybil(std::size_t count);
  PendingId submit(const Transaction& tx, OpClass op, std::size_t owner, bool spoof);

  // -- validation sessions ------------------------------------------------------
  void dispatch();
  std::optional<std::size_t> pick_proposer(std::optional<std::size_t> excluded);
  void start_session(std::size_t validator, PendingId pending);
  void check_stall(std::uint64_t sid);
  void after_precheck(std::uint64_t sid);
  void deliver_token(std::uint64_t sid);
  void handshake_request_step(std::uint64_t sid);
  void handshake_respond_step(std::uint64_t sid);
  void poll(std::uint64_t sid);
  void handle_poll(std::uint64_t sid, std::optional<Bytes> token);
  void propose(std::uint64_t sid, ValidationOutcome outcome);
  void close_session(std::uint64_t sid);
  void return_to_pool(PendingId pending);

  // -- consensus ----------------------------------------------------------------
  void open_rounds();
  void open_round(const Proposal& p, const PendingEntry& entry);
  bool strict_check(const Transaction& tx, const ChallengeTranscript& t) const;
  void on_vote(std::uint64_t rid, const Vote& vote);
  void schedule_commit();
  void on_deadline(std::uint64_t rid);
  void decide();
  void evict(std::size_t validator);
  void schedule_revocation(const std::string& drone, std::size_t owner);
  void answer_query(std::size_t index);

  const SimConfig& cfg_;
  std::ostream* trace_;
  std::mt19937_64 rng_;
  KeyPair root_;
  OperatorNode attacker_;

  Ledger ledger_;
  Registry registry_;
  VerificationArray plugin_;
  std::vector<ValidatorNode> validators_;
  std::map<PublicKey, std::size_t> vindex_;
  std::vector<OperatorNode> operators_;
  std::vector<KeyPair> sybils_;
  std::vector<std::string> queries_;
  std::set<std::string> revoke_set_;

  std::priority_queue<Event, std::vector<Event>, Later> queue_;
  std::uint64_t next_event_ = 0;
  Tick now_ = 0;

  std::map<PendingId, PendingMeta> meta_;
  std::set<PendingId> unassigned_;
  std::set<PendingId> escalated_;
  std::map<std::uint64_t, Session> sessions_;
  std::uint64_t next_session_ = 0;
  std::uint64_t cursor_ = 0;

  std::deque<Proposal> proposals_;
  std::optional<RoundState> current_;
  std::map<std::uint64_t, RoundLog> logs_;
  std::uint64_t next_round_ = 0;
  std::uint64_t decided_rounds_ = 0;

  SimMetrics metrics_;
  InactivityLog inactivity_;
  RewardTally rewards_;
  StrikeBook strikes_;
  std::vector<PublicKey> evicted_;
};

// -- setup ----------------------------------------------------------------------

void Simulator::setup() {
  using K = AdversaryScenario::Kind;
  const auto& adv = cfg_.adversary;

  for (std::size_t i = 0; i < cfg_.n_validators; ++i) {
    ValidatorNode node{KeyPair::from_seed(derive_seed("validator", context({cfg_.seed, i}))),
                       false, true, 0, 0, std::nullopt};
    admit_validator(ledger_, root_.public_key(), node.key.public_key(),
                    issue_credential(root_, node.key.public_key()));
    vindex_.emplace(node.key.public_key(), i);
    validators_.push_back(std::move(node));
  }
  for (std::size_t i = 0; i < cfg_.n_operators; ++i) {
    operators_.push_back(
        OperatorNode{KeyPair::from_seed(derive_seed("operator", context({cfg_.seed, i})))});
  }

  emit("genesis", [&](Json& j) {
    j["seed"] = cfg_.seed;
    j["mode"] = to_string(cfg_.mode);
    j["adversary"] = cfg_.adversary.describe();
    j["validators"] = ledger_.validator_set();
    j["roster"] = ledger_.roster();
  });

  const std::size_t total = cfg_.mix.initial + cfg_.mix.revoke + cfg_.mix.verify;
  const std::size_t t = cfg_.n_transactions;
  std::size_t n_verify = t * cfg_.mix.verify / total;
  std::size_t n_revoke = t * cfg_.mix.revoke / total;
  std::size_t n_initial = t - n_verify - n_revoke;
  if (n_revoke > n_initial) n_revoke = n_initial;

  std::vector<std::size_t> order(n_initial);
  for (std::size_t k = 0; k < n_initial; ++k) order[k] = k + 1;
  std::shuffle(order.begin(), order.end(), rng_);
  for (std::size_t k = 0; k < n_revoke; ++k) revoke_set_.insert("Drone_" + std::to_string(order[k]));

  const std::size_t name_space = n_initial + std::max<std::size_t>(1, n_initial / 10);
  std::uniform_int_distribution<std::size_t> pick(1, name_space);
  for (std::size_t q = 0; q < n_verify; ++q) queries_.push_back("Drone_" + std::to_string(pick(rng_)));

  if (adv.kind == K::IsrSpoofing) {
    inject_spoofing(adv.count ? adv.count : std::max<std::size_t>(3, t / 10), true);
  } else if (adv.kind == K::MaliciousValidators) {
    inject_malicious_validators(adv.count);
  } else if (adv.kind == K::SybilWave) {
    inject_sybil(adv.count);
  }
  metrics_.majority_compromise =
      adv.kind == K::MaliciousValidators && 2 * adv.count > cfg_.n_validators;

  for (std::size_t k = 1; k <= n_initial; ++k) {
    const std::string name = "Drone_" + std::to_string(k);
    const std::size_t owner = (k - 1) % cfg_.n_operators;
    registry_.grant(name, operators_[owner].key.public_key());
    CanonicalWriter csr;
    csr.field("csr").field(name).u64(cfg_.seed);
    submit(make_transaction(CrtType::Initial, name, operators_[owner].key, cfg_.cert_lifetime,
                            digest(csr.bytes())),
           OpClass::Registration, owner, false);
  }

  if (!queries_.empty()) {
    // Bootstrap round trip, then one answer per tick.
    auto& m = metrics_.of(OpClass::Verification);
    m.submitted = queries_.size();
    at(2, [this] {
      plugin_.sync(ledger_, now_);
      emit("plugin_sync", [&](Json& j) { j["synced_serial"] = plugin_.synced_serial().value_or(0); });
    });
    for (std::size_t q = 0; q < queries_.size(); ++q) at(3 + q, [this, q] { answer_query(q); });
  }
}

void Simulator::inject_spoofing(std::size_t count, bool stale_tokens) {
  const std::size_t base = cfg_.n_transactions + 1;
  std::bernoulli_distribution stale(0.5);
  for (std::size_t j = 0; j < count; ++j) {
    const std::string name = "Drone_" + std::to_string(base + j);
    const std::size_t victim = j % cfg_.n_operators;
    const KeyPair& victim_key = operators_[victim].key;
    registry_.grant(name, cfg_.adversary.spoofer_has_acl ? attacker_.key.public_key()
                                                          : victim_key.public_key());
    if (stale_tokens && stale(rng_)) {
      // Left over from an earlier challenge the victim answered.
      const Seed junk = derive_seed("stale", context({cfg_.seed, j}));
      registry_.place_token(victim_key.public_key(), name, victim_key.sign(junk).bytes, 0);
    }
    const KeyPair& signer = cfg_.adversary.spoofer_has_victim_key ? victim_key : attacker_.key;
    CanonicalWriter csr;
    csr.field("spoof-csr").field(name).u64(cfg_.seed);
    submit(make_transaction(CrtType::Initial, name, signer, cfg_.cert_lifetime,
                            digest(csr.bytes())),
           OpClass::Registration, victim, true);
  }
}

void Simulator::inject_malicious_validators(std::size_t count) {
  for (std::size_t i = 0; i < count && i < validators_.size(); ++i) validators_[i].malicious = true;
  inject_spoofing(std::max<std::size_t>(3, cfg_.n_transactions / 10), false);
}

void Simulator::inject_sybil(std::size_t count) {
  // Sybil keys come from their own seed stream.
  const KeyPair forger = KeyPair::from_seed(derive_seed("sybil-root", context({cfg_.seed})));
  for (std::size_t i = 0; i < count; ++i) {
    KeyPair key = KeyPair::from_seed(derive_seed("sybil", context({cfg_.seed, i})));
    const Signature credential = i % 2 == 0 ? issue_credential(key, key.public_key())
                                            : issue_credential(forger, key.public_key());
    try {
      admit_validator(ledger_, root_.public_key(), key.public_key(), credential);
    } catch (const Error& e) {
      ++metrics_.rejected_admissions;
      emit("admission_rejected", [&](Json& j) {
        j["candidate"] = key.public_key();
        j["reason"] = to_string(e.code());
      });
    }
    sybils_.push_back(std::move(key));
  }
}

PendingId Simulator::submit(const Transaction& tx, OpClass op, std::size_t owner, bool spoof) {
  const PendingId id = ledger_.submit(tx, now_);
  PendingMeta m;
  m.op = op;
  m.owner = owner;
  m.spoof = spoof;
  m.victim = cfg_.adversary.kind == AdversaryScenario::Kind::VictimTargeting && !spoof &&
             owner == cfg_.adversary.victim;
  m.submitted = now_;
  m.submitted_round = decided_rounds_;
  meta_.emplace(id, m);
  unassigned_.insert(id);
  if (spoof) {
    ++metrics_.spoof_attempts;
  } else {
    auto& cm = metrics_.of(op);
    if (cm.submitted++ == 0) cm.first_submit = now_;
  }
  if (m.victim) ++metrics_.victim_transactions;
  emit("submit", [&](Json& j) {
    j["pending"] = id;
    j["op"] = to_string(op);
    if (spoof) j["spoof"] = true;
    j["tx"] = tx;
  });
  return id;
}

// -- validation sessions -------------------------------------------------------

std::optional<std::size_t> Simulator::pick_proposer(std::optional<std::size_t> excluded) {
  const auto& set = ledger_.validator_set();
  for (std::size_t k = 0; k < set.size(); ++k) {
    const std::size_t idx = vindex_.at(select_proposer(cursor_ + k, set));
    const auto& node = validators_[idx];
    if (node.session || (excluded && *excluded == idx)) continue;
    cursor_ += k + 1;
    return idx;
  }
  return std::nullopt;
}

void Simulator::dispatch() {
  if (ledger_.validator_set().empty()) return;
  auto try_from = [this](const std::set<PendingId>& ids) {
    for (PendingId pid : ids) {
      if (auto v = pick_proposer(meta_.at(pid).excluded)) {
        start_session(*v, pid);
        return true;
      }
    }
    return false;
  };
  for (;;) {
    const bool any_free = std::any_of(validators_.begin(), validators_.end(),
                                      [](const auto& v) { return v.active && !v.session; });
    if (!any_free) return;
    if (!try_from(escalated_) && !try_from(unassigned_)) return;
  }
}

void Simulator::start_session(std::size_t validator, PendingId pending) {
  unassigned_.erase(pending);
  escalated_.erase(pending);
  PendingMeta& m = meta_.at(pending);
  Session s;
  s.id = next_session_++;
  s.pending = pending;
  s.proposer = validator;
  m.session = s.id;
  validators_[validator].session = s.id;
  const std::uint64_t sid = s.id;
  emit("session", [&](Json& j) {
    j["session"] = sid;
    j["pending"] = pending;
    j["proposer"] = validators_[validator].key.public_key();
  });
  at(now_ + cfg_.age_threshold, [this, sid] { check_stall(sid); });

  auto& node = validators_[validator];
  if (ignores(validator, m)) {
    sessions_.emplace(sid, std::move(s));
    return;
  }
  s.actions = 1;
  sessions_.emplace(sid, std::move(s));
  if (node.malicious) {
    // Approves without running any check.
    at(job(node.work_free, 1), [this, sid] {
      auto it = sessions_.find(sid);
      if (it == sessions_.end()) return;
      const auto& tx = ledger_.find_pending(it->second.pending)->tx;
      ValidationOutcome out;
      out.verdict = Verdict::Approve;
      out.transcript.kind = tx.crt_type == CrtType::Revoke ? ChallengeKind::Revocation
                            : cfg_.mode == ChallengeMode::Handshake ? ChallengeKind::Handshake
                                                                    : ChallengeKind::Registration;
      out.validator_signature = endorse(validators_[it->second.proposer].key, tx);
      propose(sid, std::move(out));
    });
    return;
  }
  at(job(node.work_free, precheck_cost()), [this, sid] { after_precheck(sid); });
}

void Simulator::check_stall(std::uint64_t sid) {
  auto it = sessions_.find(sid);
  if (it == sessions_.end() || it->second.actions > 0) return;
  const Session s = it->second;
  const auto aged = escalate_pending(ledger_, now_, cfg_.age_threshold);
  const bool is_aged = std::any_of(aged.begin(), aged.end(),
                                   [&](const PendingEntry& e) { return e.id == s.pending; });
  if (!is_aged) return;
  const PublicKey& holder = validators_[s.proposer].key.public_key();
  inactivity_.record(holder, InactivityKind::SkippedProposal, now_, s.pending);
  ++metrics_.escalations;
  emit("escalate", [&](Json& j) {
    j["pending"] = s.pending;
    j["holder"] = holder;
  });
  PendingMeta& m = meta_.at(s.pending);
  m.session.reset();
  m.excluded = s.proposer;
  escalated_.insert(s.pending);
  close_session(sid);
  dispatch();
}

void Simulator::after_precheck(std::uint64_t sid) {
  auto it = sessions_.find(sid);
  if (it == sessions_.end()) return;
  Session& s = it->second;
  const Transaction& tx = ledger_.find_pending(s.pending)->tx;
  auto& sv = validators_[s.proposer];

  if (tx.crt_type == CrtType::Revoke) {
    const RejectReason r = revocation_precheck(tx, ledger_);
    if (r != RejectReason::None) {
      propose(sid, rejected(r, ChallengeKind::Revocation));
      return;
    }
    poll(sid);
    return;
  }

  const ChallengeKind kind = cfg_.mode == ChallengeMode::Handshake ? ChallengeKind::Handshake
                                                                   : ChallengeKind::Registration;
  const RejectReason r = registration_precheck(tx, ledger_, now_);
  if (r != RejectReason::None) {
    propose(sid, rejected(r, kind));
    return;
  }
  ++s.actions;
  if (cfg_.mode == ChallengeMode::SignOnly) {
    s.t0 = issue_registration_token(sv.key, tx);
    at(now_ + 1, [this, sid] { deliver_token(sid); });
    at(now_ + cfg_.poll_delay, [this, sid] { poll(sid); });
  } else {
    at(now_ + 1, [this, sid] { handshake_request_step(sid); });
  }
}

void Simulator::deliver_token(std::uint64_t sid) {
  auto it = sessions_.find(sid);
  if (it == sessions_.end()) return;
  const PendingMeta& m = meta_.at(it->second.pending);
  const Signature t0 = *it->second.t0;
  const std::string drone = ledger_.find_pending(it->second.pending)->tx.drone_name;
  const KeyPair& key = actor_key(m);
  at(job(actor_lane(m), 1), [this, t0, drone, &key] {
    const Bytes phi0 = operator_sign_token(key, t0).bytes;
    at(now_ + 1, [this, phi0, drone, &key] {
      const bool ok = registry_.place_token(key.public_key(), drone, phi0, now_) ==
                      TokenStatus::Present;
      emit(ok ? "token_placed" : "token_refused", [&](Json& j) {
        j["drone"] = drone;
        j["by"] = key.public_key();
      });
    });
  });
}

void Simulator::handshake_request_step(std::uint64_t sid) {
  auto it = sessions_.find(sid);
  if (it == sessions_.end()) return;
  const PendingMeta& m = meta_.at(it->second.pending);
  const KeyPair& key = actor_key(m);
  at(job(actor_lane(m), 1), [this, sid, &key] {
    auto it = sessions_.find(sid);
    if (it == sessions_.end()) return;
    Session& s = it->second;
    const Transaction& tx = ledger_.find_pending(s.pending)->tx;
    const PublicKey sv = validators_[s.proposer].key.public_key();
    s.request = handshake_request(key, sv, certificate_request(tx),
                                  derive_seed("hs/encreq", context({cfg_.seed, sid})));
    // Request reaches the validator, which answers with the challenge.
    at(now_ + 1, [this, sid] {
      auto it = sessions_.find(sid);
      if (it == sessions_.end()) return;
      auto& sv = validators_[it->second.proposer];
      at(job(sv.work_free, 1), [this, sid] {
        auto it = sessions_.find(sid);
        if (it == sessions_.end()) return;
        Session& s = it->second;
        ++s.actions;
        const Transaction& tx = ledger_.find_pending(s.pending)->tx;
        const Seed tokentx = derive_seed("hs/tokentx", context({cfg_.seed, sid}));
        try {
          s.challenge = handshake_challenge(validators_[s.proposer].key, tx.operator_pubkey,
                                            s.request->encreq, s.request->signature, tokentx,
                                            derive_seed("hs/enctoken", context({cfg_.seed, sid})),
                                            certificate_request(tx));
        } catch (const HandshakeAbort&) {
          propose(sid, rejected(RejectReason::HandshakeAbort, ChallengeKind::Handshake));
          return;
        }
        at(now_ + 1, [this, sid] { handshake_respond_step(sid); });
        at(now_ + cfg_.poll_delay, [this, sid] { poll(sid); });
      });
    });
  });
}

void Simulator::handshake_respond_step(std::uint64_t sid) {
  auto it = sessions_.find(sid);
  if (it == sessions_.end()) return;
  const PendingMeta& m = meta_.at(it->second.pending);
  const KeyPair& key = actor_key(m);
  at(job(actor_lane(m), 1), [this, sid, &key] {
    auto it = sessions_.find(sid);
    if (it == sessions_.end()) return;
    const Session& s = it->second;
    const std::string drone = ledger_.find_pending(s.pending)->tx.drone_name;
    Bytes wire;
    try {
      wire = encode_response(handshake_respond(
          key, validators_[s.proposer].key.public_key(), s.challenge->enctoken,
          s.challenge->tokensig, derive_seed("hs/enctokendo", context({cfg_.seed, sid}))));
    } catch (const HandshakeAbort&) {
      return;
    }
    at(now_ + 1, [this, wire, drone, &key] {
      const bool ok =
          registry_.place_token(key.public_key(), drone, wire, now_) == TokenStatus::Present;
      emit(ok ? "token_placed" : "token_refused", [&](Json& j) {
        j["drone"] = drone;
        j["by"] = key.public_key();
      });
    });
  });
}

void Simulator::poll(std::uint64_t sid) {
  // Request and response each cost one message tick.
  at(now_ + 1, [this, sid] {
    auto it = sessions_.find(sid);
    if (it == sessions_.end()) return;
    const std::string& drone = ledger_.find_pending(it->second.pending)->tx.drone_name;
    std::optional<Bytes> token = registry_.retrieve_token(drone).first;
    at(now_ + 1, [this, sid, token = std::move(token)] {
      auto it = sessions_.find(sid);
      if (it == sessions_.end()) return;
      auto& sv = validators_[it->second.proposer];
      at(job(sv.work_free, recheck_cost()), [this, sid, token] { handle_poll(sid, token); });
    });
  });
}

void Simulator::handle_poll(std::uint64_t sid, std::optional<Bytes> token) {
  auto it = sessions_.find(sid);
  if (it == sessions_.end()) return;
  Session& s = it->second;
  ++s.actions;
  ++s.polls;
  const bool last = s.polls >= cfg_.poll_retries;
  const Transaction& tx = ledger_.find_pending(s.pending)->tx;
  const KeyPair& sv = validators_[s.proposer].key;

  // The ledger may have moved while the challenge was outstanding.
  const RejectReason stale = tx.crt_type == CrtType::Revoke
                                 ? revocation_precheck(tx, ledger_)
                                 : registration_precheck(tx, ledger_, now_);
  if (stale != RejectReason::None) {
    const ChallengeKind kind = tx.crt_type == CrtType::Revoke ? ChallengeKind::Revocation
                               : cfg_.mode == ChallengeMode::Handshake ? ChallengeKind::Handshake
                                                                       : ChallengeKind::Registration;
    propose(sid, rejected(stale, kind));
    return;
  }

  if (tx.crt_type == CrtType::Revoke) {
    ValidationOutcome out = finish_revocation(sv, tx, ledger_, token);
    if (out.verdict == Verdict::Approve || last) {
      propose(sid, std::move(out));
    } else {
      at(now_ + cfg_.poll_delay, [this, sid] { poll(sid); });
    }
    return;
  }

  if (cfg_.mode == ChallengeMode::SignOnly) {
    ValidationOutcome out = finish_registration(sv, tx, *s.t0, token);
    if (out.verdict == Verdict::Approve || last) {
      propose(sid, std::move(out));
    } else {
      at(now_ + cfg_.poll_delay, [this, sid] { poll(sid); });
    }
    return;
  }

  ValidationOutcome out;
  out.transcript.kind = ChallengeKind::Handshake;
  out.reason = RejectReason::TokenMissing;
  if (token) {
    try {
      const HandshakeResponse resp = decode_response(*token, sv.public_key(), tx.operator_pubkey);
      out.transcript.handshake =
          handshake_finish(sv, tx.operator_pubkey, *s.request, *s.challenge, resp);
      out.verdict = Verdict::Approve;
      out.reason = RejectReason::None;
      out.validator_signature = endorse(sv, tx);
    } catch (const HandshakeAbort&) {
      out.reason = RejectReason::HandshakeAbort;
    } catch (const Error&) {
      out.reason = RejectReason::TokenMismatch;
    }
  }
  if (out.verdict == Verdict::Approve || last) {
    propose(sid, std::move(out));
  } else {
    at(now_ + cfg_.poll_delay, [this, sid] { poll(sid); });
  }
}

void Simulator::propose(std::uint64_t sid, ValidationOutcome outcome) {
  const Session& s = sessions_.at(sid);
  const PendingId pending = s.pending;
  const std::size_t proposer = s.proposer;
  meta_.at(pending).session.reset();
  if (outcome.verdict == Verdict::Reject) ++metrics_.reject_reasons[std::string(reason_code(outcome.reason))];
  emit("proposal", [&](Json& j) {
    j["session"] = sid;
    j["pending"] = pending;
    j["proposer"] = validators_[proposer].key.public_key();
    j["verdict"] = to_string(outcome.verdict);
    j["reason"] = reason_code(outcome.reason);
  });
  proposals_.push_back(Proposal{pending, proposer, std::move(outcome)});
  close_session(sid);
  open_rounds();
  dispatch();
}

void Simulator::close_session(std::uint64_t sid) {
  auto it = sessions_.find(sid);
  if (it == sessions_.end()) return;
  validators_[it->second.proposer].session.reset();
  sessions_.erase(it);
}

void Simulator::return_to_pool(PendingId pending) {
  auto it = meta_.find(pending);
  if (it == meta_.end() || !ledger_.find_pending(pending)) return;
  it->second.session.reset();
  unassigned_.insert(pending);
}

// -- consensus ---------------------------------------------------------------------

void Simulator::open_rounds() {
  while (!current_ && !proposals_.empty()) {
    Proposal p = std::move(proposals_.front());
    proposals_.pop_front();
    const PendingEntry* entry = ledger_.find_pending(p.pending);
    if (!entry) continue;
    if (!validators_[p.proposer].active) {
      return_to_pool(p.pending);
      continue;
    }
    open_round(p, *entry);
  }
}

bool Simulator::strict_check(const Transaction& tx, const ChallengeTranscript& t) const {
  const auto token = registry_.retrieve_token(tx.drone_name).first;
  if (!token) return false;
  switch (t.kind) {
    case ChallengeKind::Registration: return t.phi0 && *token == t.phi0->bytes;
    case ChallengeKind::Revocation: return t.phi1 && *token == t.phi1->bytes;
    case ChallengeKind::Handshake:
      return t.handshake &&
             *token == encode_response({t.handshake->enctokendo, t.handshake->sigtokendo});
  }
  return false;
}

void Simulator::open_round(const Proposal& p, const PendingEntry& entry) {
  const Transaction& tx = entry.tx;
  const PendingMeta& m = meta_.at(p.pending);
  const KeyPair& proposer_key = validators_[p.proposer].key;
  const std::uint64_t rid = next_round_++;
  Round round(rid, proposer_key.public_key(), Candidate{tx, p.outcome.transcript},
              ledger_.next_header(tx.crt_type, tx.drone_name, now_), ledger_.validator_set(),
              now_ + cfg_.vote_timeout);
  const bool oracle = verify_transcript(proposer_key.public_key(), tx, p.outcome.transcript,
                                        ledger_, now_) == RejectReason::None;
  round.add_vote(sign_vote(proposer_key, rid, p.outcome.verdict, round.signing()), now_);

  std::vector<std::size_t> voters;
  for (const auto& key : round.validator_set()) {
    const std::size_t idx = vindex_.at(key);
    if (idx != p.proposer) voters.push_back(idx);
  }
  std::vector<std::optional<Vote>> planned(voters.size());
  auto plan = [&](std::size_t i) {
    const auto& node = validators_[voters[i]];
    if (ignores(voters[i], m)) return;
    Verdict verdict = Verdict::Approve;
    if (!node.malicious) {
      bool ok = verify_transcript(proposer_key.public_key(), tx, p.outcome.transcript, ledger_,
                                  now_) == RejectReason::None;
      if (ok && cfg_.strict_voting) ok = strict_check(tx, p.outcome.transcript);
      verdict = ok ? Verdict::Approve : Verdict::Reject;
    }
    planned[i] = sign_vote(node.key, rid, verdict, round.signing());
  };
  if (cfg_.parallel) {
    const auto n = static_cast<std::int64_t>(voters.size());
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) plan(static_cast<std::size_t>(i));
  } else {
    for (std::size_t i = 0; i < voters.size(); ++i) plan(i);
  }

  RoundLog log;
  log.set = round.validator_set();
  log.voted.insert(proposer_key.public_key());
  logs_.emplace(rid, std::move(log));

  emit("round_open", [&](Json& j) {
    j["round"] = rid;
    j["pending"] = p.pending;
    j["proposer"] = proposer_key.public_key();
    j["proposer_verdict"] = to_string(p.outcome.verdict);
    j["header"] = round.header();
  });

  const Tick vote_cost = cfg_.strict_voting ? 3 : 1;
  for (std::size_t i = 0; i < voters.size(); ++i) {
    if (!planned[i]) continue;
    const std::size_t voter = voters[i];
    at(now_ + 1, [this, voter, vote_cost, vote = *planned[i]] {
      const Tick done = job(validators_[voter].consensus_free, vote_cost);
      at(done + 1, [this, vote] { on_vote(vote.round_id, vote); });
    });
  }

  if (!sybils_.empty()) {
    at(now_ + 1, [this, rid] {
      if (!current_ || current_->round.id() != rid) return;
      std::size_t discarded = 0;
      for (const auto& s : sybils_) {
        try {
          current_->round.add_vote(
              sign_vote(s, rid, Verdict::Reject, current_->round.signing()), now_);
        } catch (const Error& e) {
          if (e.code() == Errc::ForeignVote) ++discarded;
        }
      }
      metrics_.foreign_votes += discarded;
      emit("foreign_votes", [&](Json& j) {
        j["round"] = rid;
        j["discarded"] = discarded;
      });
    });
  }

  at(round.deadline(), [this, rid] { on_deadline(rid); });
  current_.emplace(RoundState{std::move(round), p.pending, p.proposer, oracle, now_, false});
  if (settled(current_->round)) schedule_commit();
}

void Simulator::on_vote(std::uint64_t rid, const Vote& vote) {
  if (auto it = logs_.find(rid); it != logs_.end()) it->second.voted.insert(vote.voter);
  emit("vote", [&](Json& j) {
    j["round"] = rid;
    j["voter"] = vote.voter;
    j["verdict"] = to_string(vote.verdict);
  });
  if (!current_ || current_->round.id() != rid || current_->commit_scheduled) return;
  try {
    current_->round.add_vote(vote, now_);
  } catch (const Error& e) {
    emit("vote_refused", [&](Json& j) {
      j["round"] = rid;
      j["voter"] = vote.voter;
      j["reason"] = to_string(e.code());
    });
    return;
  }
  if (settled(current_->round)) schedule_commit();
}

void Simulator::schedule_commit() {
  current_->commit_scheduled = true;
  at(job(validators_[current_->proposer].consensus_free, 1), [this] { decide(); });
}

void Simulator::on_deadline(std::uint64_t rid) {
  if (current_ && current_->round.id() == rid && !current_->commit_scheduled) {
    current_->commit_scheduled = true;
    decide();
  }
  auto it = logs_.find(rid);
  if (it == logs_.end()) return;
  for (const auto& key : it->second.set) {
    if (it->second.voted.contains(key)) continue;
    inactivity_.record(key, InactivityKind::MissedVote, now_, rid);
    emit("inactivity", [&](Json& j) {
      j["validator"] = key;
      j["kind"] = to_string(InactivityKind::MissedVote);
      j["round"] = rid;
    });
  }
  logs_.erase(it);
}

void Simulator::decide() {
  RoundState st = std::move(*current_);
  current_.reset();
  const Round& round = st.round;
  ++metrics_.rounds;
  ++decided_rounds_;

  const CommitResult result = collect_and_commit(round, ledger_, &rewards_);

  std::vector<std::size_t> to_evict;
  for (const auto& [key, vote] : round.votes()) {
    const bool approve = vote.verdict == Verdict::Approve;
    if (approve != st.oracle_valid && strikes_.strike(key)) to_evict.push_back(vindex_.at(key));
  }

  PendingMeta m = meta_.at(st.pending);
  if (result.committed) {
    ++metrics_.committed;
    if (!st.oracle_valid) ++metrics_.invalid_commits;
    if (m.spoof) ++metrics_.spoof_commits;
    if (!m.spoof) {
      auto& cm = metrics_.of(m.op);
      ++cm.completed;
      cm.latency_ticks_sum += static_cast<double>(now_ - m.submitted);
      cm.last_complete = now_;
    }
    if (m.victim) {
      ++metrics_.victim_committed;
      metrics_.victim_commit_rounds.push_back(decided_rounds_ - m.submitted_round);
    }
    emit("commit", [&](Json& j) {
      j["round"] = round.id();
      j["pending"] = st.pending;
      j["proposer"] = round.proposer();
      j["verified_at"] = st.opened;
      j["oracle_valid"] = st.oracle_valid;
      j["block"] = *result.block;
      j["transcript"] = round.candidate().transcript;
      Json votes = Json::array();
      for (const auto& [key, vote] : round.votes()) {
        votes.push_back({{"voter", key}, {"verdict", to_string(vote.verdict)}});
      }
      j["votes"] = std::move(votes);
    });
    meta_.erase(st.pending);
    const Block& b = *result.block;
    if (b.header.crt_type == CrtType::Initial && !m.spoof && revoke_set_.contains(b.body.drone_name)) {
      schedule_revocation(b.body.drone_name, m.owner);
    }
  } else {
    ++metrics_.failed_rounds;
    PendingEntry* entry = ledger_.find_pending(st.pending);
    const bool rejected =
        round.majority_rejected() || result.reason != Errc::InsufficientApprovals;
    entry->consecutive_rejections = rejected ? entry->consecutive_rejections + 1 : 0;
    emit("round_failed", [&](Json& j) {
      j["round"] = round.id();
      j["pending"] = st.pending;
      j["approvals"] = round.approvals();
      j["rejections"] = round.rejections();
      j["reason"] = to_string(result.reason.value_or(Errc::InsufficientApprovals));
    });
    if (entry->consecutive_rejections >= kTerminalRejections) {
      ledger_.remove_pending(st.pending);
      meta_.erase(st.pending);
      ++metrics_.terminal_rejections;
      emit("terminal_reject", [&](Json& j) { j["pending"] = st.pending; });
    } else {
      return_to_pool(st.pending);
    }
  }

  for (std::size_t v : to_evict) evict(v);
  open_rounds();
  dispatch();
}

void Simulator::evict(std::size_t validator) {
  auto& node = validators_[validator];
  if (!node.active) return;
  node.active = false;
  const PublicKey key = node.key.public_key();
  ledger_.remove_validator(key);
  evicted_.push_back(key);
  ++metrics_.evictions;
  emit("evict", [&](Json& j) {
    j["validator"] = key;
    j["strikes"] = strikes_.strikes(key);
  });
  if (node.session) {
    const std::uint64_t sid = *node.session;
    const PendingId pending = sessions_.at(sid).pending;
    close_session(sid);
    return_to_pool(pending);
  }
  for (auto it = proposals_.begin(); it != proposals_.end();) {
    if (it->proposer == validator) {
      return_to_pool(it->pending);
      it = proposals_.erase(it);
    } else {
      ++it;
    }
  }
}

void Simulator::schedule_revocation(const std::string& drone, std::size_t owner) {
  // Commit notice reaches the operator, who signs, places phi1 and submits.
  at(now_ + 1, [this, drone, owner] {
    at(job(operators_[owner].free, 1), [this, drone, owner] {
      const KeyPair& key = operators_[owner].key;
      const Block* prev = ledger_.latest_for(drone);
      if (!prev || prev->header.crt_type != CrtType::Initial) return;
      const Transaction tx = make_transaction(CrtType::Revoke, drone, key, 0,
                                              digest(canonical_bytes(prev->body)));
      const RevocationToken token = issue_revocation_token(key, ledger_, tx);
      at(now_ + 1, [this, drone, owner, phi1 = token.phi1.bytes] {
        const auto& k = operators_[owner].key;
        registry_.place_token(k.public_key(), drone, phi1, now_);
        emit("token_placed", [&](Json& j) {
          j["drone"] = drone;
          j["by"] = k.public_key();
        });
      });
      at(now_ + 1, [this, tx, owner] {
        submit(tx, OpClass::Revocation, owner, false);
        dispatch();
      });
    });
  });
}

void Simulator::answer_query(std::size_t index) {
  plugin_.sync(ledger_, now_);
  const std::string& name = queries_[index];
  const bool answer = plugin_.is_valid(name, now_);
  const bool truth = ledger_.certificate_status(name, now_) == CertStatus::Active;
  ++metrics_.queries;
  if (answer != truth) ++metrics_.incoherent_answers;
  auto& cm = metrics_.of(OpClass::Verification);
  ++cm.completed;
  cm.latency_ticks_sum += static_cast<double>(now_);
  cm.last_complete = now_;
  emit("query", [&](Json& j) {
    j["drone"] = name;
    j["valid"] = answer;
  });
}

SimTrace Simulator::run() {
  setup();
  dispatch();
  bool exhausted = false;
  while (!queue_.empty()) {
    Event e = queue_.top();
    queue_.pop();
    if (e.at > cfg_.tick_budget) {
      exhausted = true;
      break;
    }
    now_ = e.at;
    e.fn();
  }
  if (exhausted) {
    emit("budget_exhausted", [&](Json& j) { j["budget"] = cfg_.tick_budget; });
  }

  metrics_.end_tick = now_;
  if (!ledger_.empty()) metrics_.mean_block_bytes = measure_block_size(ledger_);
  emit("end", [&](Json& j) {
    j["rounds"] = metrics_.rounds;
    j["committed"] = metrics_.committed;
    j["failed_rounds"] = metrics_.failed_rounds;
    j["terminal_rejections"] = metrics_.terminal_rejections;
    j["invalid_commits"] = metrics_.invalid_commits;
    j["spoof_commits"] = metrics_.spoof_commits;
    j["evictions"] = metrics_.evictions;
    j["escalations"] = metrics_.escalations;
    j["inactivity"] = inactivity_.total();
    j["majority_compromise"] = metrics_.majority_compromise;
    j["tip"] = ledger_.tip_digest();
    j["reward_total"] = rewards_.total();
  });

  SimTrace out;
  out.metrics = metrics_;
  out.inactivity = inactivity_;
  out.rewards = rewards_;
  for (const auto& v : validators_) out.validators.push_back(v.key.public_key());
  out.evicted = evicted_;
  out.budget_exhausted = exhausted;
  out.ledger = std::move(ledger_);
  return out;
}

}  // namespace

SimTrace run(const SimConfig& config, std::ostream* trace) {
  config.validate();
  Simulator sim(config, trace);
  return sim.run();
}

}  // namespace dpki
