#include "dronepki/ledger.hpp"

#include <algorithm>
#include <bit>
#include <istream>
#include <ostream>
#include <set>

#include "dronepki/serialization.hpp"
#include "ledger_checks.hpp"

namespace dpki {

std::string_view to_string(CertStatus status) {
  switch (status) {
    case CertStatus::Active: return "active";
    case CertStatus::Revoked: return "revoked";
    case CertStatus::Expired: return "expired";
    case CertStatus::Unknown: return "unknown";
  }
  return "unknown";
}

namespace detail {

std::optional<Failure> check_structure(const Block& block, const ChainPosition& pos) {
  const auto& h = block.header;
  if (h.serial_number != pos.expected_serial) {
    return Failure{Errc::BrokenSerial, "serial " + std::to_string(h.serial_number) +
                                           ", expected " + std::to_string(pos.expected_serial)};
  }
  if (h.timestamp < pos.previous_timestamp) {
    return Failure{Errc::BrokenTimestamp, "timestamp moves backwards"};
  }
  if (h.global_prev != pos.tip) {
    return Failure{Errc::BrokenGlobalChain, "global_prev does not match previous block"};
  }
  if (pos.drone_head == nullptr) {
    if (h.service_prev) {
      return Failure{Errc::BrokenServiceChain, "service_prev set on a drone's first block"};
    }
  } else if (!h.service_prev || *h.service_prev != *pos.drone_head_digest) {
    return Failure{Errc::BrokenServiceChain, "service_prev does not match drone head"};
  }

  const Block* head = pos.drone_head;
  if (h.crt_type == CrtType::Initial) {
    if (head && head->header.crt_type == CrtType::Initial && head->body.expiry > h.timestamp) {
      return Failure{Errc::DuplicateActiveCertificate,
                     "drone '" + block.body.drone_name + "' already has an active certificate"};
    }
  } else {
    if (!head || head->header.crt_type != CrtType::Initial) {
      return Failure{Errc::RevokeWithoutBinding,
                     "no certificate to revoke for '" + block.body.drone_name + "'"};
    }
    if (head->body.operator_pubkey != block.body.operator_pubkey) {
      return Failure{Errc::OperatorKeyMismatch, "revoking key differs from registered key"};
    }
  }
  return std::nullopt;
}

std::optional<Failure> check_signatures(const Block& block, const Membership& is_member,
                                        std::optional<std::uint64_t> expected_count,
                                        std::uint64_t max_count) {
  if (!signature_valid(transaction_from(block.header.crt_type, block.body))) {
    return Failure{Errc::BadOperatorSignature, "operator signature does not verify"};
  }
  const auto& f = block.footer;
  if (expected_count && f.validator_count != *expected_count) {
    return Failure{Errc::InsufficientApprovals, "footer records " +
                                                    std::to_string(f.validator_count) +
                                                    " validators, set has " +
                                                    std::to_string(*expected_count)};
  }
  if (f.validator_count == 0 || f.validator_count > max_count) {
    return Failure{Errc::InsufficientApprovals, "implausible validator count"};
  }
  const auto message = signing_digest(block.header, block.body);
  std::set<PublicKey> seen;
  for (const auto& a : f.approvals) {
    if (!is_member(a.validator)) {
      return Failure{Errc::UnknownValidatorSignature, "approval from " + a.validator.hex()};
    }
    if (!seen.insert(a.validator).second) {
      return Failure{Errc::DuplicateApproval, "validator appears twice in footer"};
    }
    if (!verify(a.validator, message.view(), a.signature)) {
      return Failure{Errc::BadApprovalSignature, "approval signature does not verify"};
    }
  }
  if (2 * f.approvals.size() <= f.validator_count) {
    return Failure{Errc::InsufficientApprovals,
                   std::to_string(f.approvals.size()) + " of " +
                       std::to_string(f.validator_count) + " approvals"};
  }
  return std::nullopt;
}

}  // namespace detail

namespace {

void insert_sorted(std::vector<PublicKey>& keys, const PublicKey& key) {
  auto it = std::lower_bound(keys.begin(), keys.end(), key);
  if (it == keys.end() || *it != key) keys.insert(it, key);
}

bool contains_sorted(const std::vector<PublicKey>& keys, const PublicKey& key) {
  return std::binary_search(keys.begin(), keys.end(), key);
}

}  // namespace

Ledger::Ledger(std::vector<PublicKey> validators) {
  for (const auto& v : validators) add_validator(v);
}

Ledger Ledger::from_blocks(std::vector<PublicKey> validators, std::vector<PublicKey> roster,
                           std::vector<Block> blocks) {
  Ledger l(std::move(validators));
  for (const auto& r : roster) insert_sorted(l.roster_, r);
  l.blocks_ = std::move(blocks);
  l.digests_.reserve(l.blocks_.size());
  for (std::size_t i = 0; i < l.blocks_.size(); ++i) {
    l.digests_.push_back(block_digest(l.blocks_[i]));
    l.head_by_drone_[l.blocks_[i].body.drone_name] = i;
  }
  return l;
}

bool Ledger::is_validator(const PublicKey& key) const { return contains_sorted(validators_, key); }

bool Ledger::was_ever_validator(const PublicKey& key) const {
  return contains_sorted(roster_, key);
}

void Ledger::add_validator(const PublicKey& key) {
  insert_sorted(validators_, key);
  insert_sorted(roster_, key);
}

bool Ledger::remove_validator(const PublicKey& key) {
  auto it = std::lower_bound(validators_.begin(), validators_.end(), key);
  if (it == validators_.end() || *it != key) return false;
  validators_.erase(it);
  return true;
}

PendingId Ledger::submit(const Transaction& tx, Tick now) {
  if (tx.drone_name.empty() || tx.drone_name.size() > kMaxDroneNameLength) {
    throw Error(Errc::MalformedTransaction, "bad drone name");
  }
  if (!signature_valid(tx)) throw Error(Errc::MalformedTransaction, "operator signature invalid");
  if (tx.crt_type == CrtType::Initial && tx.expiry <= now) {
    throw Error(Errc::MalformedTransaction, "expiry not after submission time");
  }
  PendingId id = next_pending_++;
  pending_.push_back(PendingEntry{id, tx, now, 0});
  return id;
}

const PendingEntry* Ledger::find_pending(PendingId id) const {
  auto it = std::find_if(pending_.begin(), pending_.end(),
                         [id](const PendingEntry& e) { return e.id == id; });
  return it == pending_.end() ? nullptr : &*it;
}

PendingEntry* Ledger::find_pending(PendingId id) {
  auto it = std::find_if(pending_.begin(), pending_.end(),
                         [id](const PendingEntry& e) { return e.id == id; });
  return it == pending_.end() ? nullptr : &*it;
}

bool Ledger::remove_pending(PendingId id) {
  auto it = std::find_if(pending_.begin(), pending_.end(),
                         [id](const PendingEntry& e) { return e.id == id; });
  if (it == pending_.end()) return false;
  pending_.erase(it);
  return true;
}

std::vector<PendingId> Ledger::pending_aged(Tick now, Tick age_threshold) const {
  std::vector<const PendingEntry*> aged;
  for (const auto& e : pending_) {
    if (now >= e.submitted && now - e.submitted >= age_threshold) aged.push_back(&e);
  }
  // The pool is FIFO, so a stable sort by submission keeps id order on ties.
  std::stable_sort(aged.begin(), aged.end(), [](const PendingEntry* a, const PendingEntry* b) {
    return a->submitted < b->submitted;
  });
  std::vector<PendingId> out;
  out.reserve(aged.size());
  for (const auto* e : aged) out.push_back(e->id);
  return out;
}

BlockHeader Ledger::next_header(CrtType type, std::string_view drone, Tick timestamp) const {
  BlockHeader h;
  h.serial_number = blocks_.size();
  h.crt_type = type;
  h.global_prev = tip_digest();
  if (auto head = head_index(drone)) h.service_prev = digests_[*head];
  h.timestamp = timestamp;
  return h;
}

void Ledger::append(const Block& block) {
  detail::ChainPosition pos;
  pos.expected_serial = blocks_.size();
  pos.previous_timestamp = blocks_.empty() ? 0 : blocks_.back().header.timestamp;
  pos.tip = tip_digest();
  if (auto head = head_index(block.body.drone_name)) {
    pos.drone_head = &blocks_[*head];
    pos.drone_head_digest = &digests_[*head];
  }
  if (auto failure = detail::check_structure(block, pos)) {
    throw Error(failure->code, failure->detail);
  }
  auto member = [this](const PublicKey& k) { return is_validator(k); };
  if (auto failure = detail::check_signatures(block, member, validators_.size(), roster_.size())) {
    throw Error(failure->code, failure->detail);
  }

  blocks_.push_back(block);
  digests_.push_back(block_digest(block));
  head_by_drone_[block.body.drone_name] = blocks_.size() - 1;

  const auto tx = transaction_from(block.header.crt_type, block.body);
  auto it = std::find_if(pending_.begin(), pending_.end(),
                         [&](const PendingEntry& e) { return e.tx == tx; });
  if (it != pending_.end()) pending_.erase(it);
}

std::optional<std::size_t> Ledger::head_index(std::string_view drone) const {
  auto it = head_by_drone_.find(drone);
  if (it == head_by_drone_.end()) return std::nullopt;
  return it->second;
}

const Block* Ledger::latest_for(std::string_view drone) const {
  auto idx = head_index(drone);
  return idx ? &blocks_[*idx] : nullptr;
}

CertStatus Ledger::certificate_status(std::string_view drone, Tick now) const {
  const Block* b = latest_for(drone);
  if (!b) return CertStatus::Unknown;
  if (b->header.crt_type == CrtType::Revoke) return CertStatus::Revoked;
  if (b->body.expiry <= now) return CertStatus::Expired;
  return CertStatus::Active;
}

std::size_t Ledger::lookup_depth() const { return std::bit_width(blocks_.size()); }

void export_jsonl(const Ledger& ledger, std::ostream& out) {
  Json header = Json::object();
  header["record"] = "validators";
  header["validators"] = ledger.validator_set();
  header["roster"] = ledger.roster();
  out << header.dump() << '\n';
  for (const auto& b : ledger.blocks()) {
    Json j = b;
    out << j.dump() << '\n';
  }
}

Ledger import_jsonl(std::istream& in) {
  std::string line;
  std::vector<PublicKey> validators;
  std::vector<PublicKey> roster;
  std::vector<Block> blocks;
  bool have_header = false;
  try {
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      auto j = Json::parse(line);
      if (!have_header) {
        if (!j.contains("record") || j.at("record") != "validators") {
          throw Error(Errc::DecodeError, "ledger file must start with a validators record");
        }
        validators = j.at("validators").get<std::vector<PublicKey>>();
        roster = j.at("roster").get<std::vector<PublicKey>>();
        have_header = true;
        continue;
      }
      blocks.push_back(j.get<Block>());
    }
  } catch (const Json::exception& e) {
    throw Error(Errc::DecodeError, e.what());
  }
  if (!have_header) throw Error(Errc::DecodeError, "empty ledger file");
  return Ledger::from_blocks(std::move(validators), std::move(roster), std::move(blocks));
}

}  // namespace dpki
