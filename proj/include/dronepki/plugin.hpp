#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "dronepki/ledger.hpp"

namespace dpki {

/// Client-side verification array: drone name -> "certificate valid now".
///
/// A certificate is valid on [commit, expiry): at the expiry tick it is
/// already invalid.
class VerificationArray {
 public:
  /// Incorporates blocks after the last synced serial and re-evaluates expiry
  /// for every tracked drone against `now`.
  void sync(const Ledger& ledger, Tick now);

  /// Unknown names are invalid.
  bool is_valid(std::string_view drone) const;
  /// Also re-checks expiry against `now` at query time.
  bool is_valid(std::string_view drone, Tick now) const;

  /// Serial of the last incorporated block; empty before the first block.
  std::optional<std::uint64_t> synced_serial() const { return synced_; }
  Tick synced_at() const { return now_; }

  const std::map<std::string, bool, std::less<>>& statuses() const { return statuses_; }

  bool operator==(const VerificationArray& other) const {
    return statuses_ == other.statuses_ && synced_ == other.synced_;
  }

 private:
  struct Binding {
    bool active = false;  // latest block is an Initial
    Tick expiry = 0;
  };

  std::map<std::string, Binding, std::less<>> bindings_;
  std::map<std::string, bool, std::less<>> statuses_;
  std::optional<std::uint64_t> synced_;
  Tick now_ = 0;
};

}  // namespace dpki
