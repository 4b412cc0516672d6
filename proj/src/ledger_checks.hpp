#pragma once

// Per-block invariant checks shared by Ledger::append and the chain
// verifiers. Structural checks need the preceding chain; signature checks
// are independent per block.

#include <functional>
#include <optional>
#include <string>

#include "dronepki/error.hpp"
#include "dronepki/model.hpp"

namespace dpki::detail {

struct Failure {
  Errc code;
  std::string detail;
};

struct ChainPosition {
  std::uint64_t expected_serial = 0;
  Tick previous_timestamp = 0;
  Digest tip;
  const Block* drone_head = nullptr;  // latest block for the same drone
  const Digest* drone_head_digest = nullptr;
};

std::optional<Failure> check_structure(const Block& block, const ChainPosition& pos);

using Membership = std::function<bool(const PublicKey&)>;

/// `expected_count` pins footer.validator_count (append); when absent the
/// recorded count is trusted up to `max_count` (full-chain verification).
std::optional<Failure> check_signatures(const Block& block, const Membership& is_member,
                                        std::optional<std::uint64_t> expected_count,
                                        std::uint64_t max_count);

}  // namespace dpki::detail
