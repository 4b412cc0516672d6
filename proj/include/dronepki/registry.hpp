#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dronepki/crypto.hpp"
#include "dronepki/model.hpp"

namespace dpki {

/// Return code of PlaceToken / RetrieveToken: 0 = absent/refused, 1 = ok.
enum class TokenStatus : int { Absent = 0, Present = 1 };

struct RegistryEntry {
  Bytes token;
  PublicKey owner;
  Tick placed = 0;
};

/// Token-hosting service standing in for DNS records or the platform page
/// where an operator proves control of a drone service. Writes are
/// authorized per drone name.
///
/// With more than one replica, every authorized write reaches all replicas
/// and each validator reads its own; adversary hooks can then poison a
/// single replica.
class Registry {
 public:
  explicit Registry(std::size_t replicas = 1);

  /// Grants `controller` write access to `drone`'s entry.
  void grant(std::string drone, const PublicKey& controller);
  std::optional<PublicKey> controller(std::string_view drone) const;

  TokenStatus place_token(const PublicKey& caller, std::string_view drone, Bytes token, Tick now);

  /// Read-only.
  std::pair<std::optional<Bytes>, TokenStatus> retrieve_token(std::string_view drone,
                                                              std::size_t replica = 0) const;

  std::size_t replicas() const { return views_.size(); }
  const std::map<std::string, RegistryEntry, std::less<>>& entries(std::size_t replica = 0) const {
    return views_.at(replica);
  }

  // Adversary hooks: bypass authorization.
  void force_write(std::string_view drone, Bytes token, const PublicKey& writer, Tick now);
  void poison(std::size_t replica, std::string_view drone, Bytes token, const PublicKey& writer,
              Tick now);

 private:
  std::map<std::string, PublicKey, std::less<>> acl_;
  std::vector<std::map<std::string, RegistryEntry, std::less<>>> views_;
};

}  // namespace dpki
