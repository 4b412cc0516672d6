#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "dronepki/ledger.hpp"

namespace dpki {

struct ReplayReport {
  std::size_t events = 0;
  std::size_t commits = 0;
  std::size_t evictions = 0;
  /// Commits whose recorded oracle label is false (majority-compromise runs).
  std::size_t invalid_commits = 0;
  /// Recorded facts the replay could not reproduce.
  std::size_t discrepancies = 0;
  std::vector<std::string> problems;
  ChainReport chain;
  Ledger ledger;

  bool ok() const { return discrepancies == 0; }
};

/// Rebuilds the ledger from a simulator trace: applies evictions, appends
/// every committed block through the full invariant checks, recomputes each
/// commit's oracle verdict and finally re-verifies the chain.
ReplayReport replay_trace(std::istream& trace);

}  // namespace dpki
