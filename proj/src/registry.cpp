#include "dronepki/registry.hpp"

#include "dronepki/error.hpp"

namespace dpki {

Registry::Registry(std::size_t replicas) : views_(replicas == 0 ? 1 : replicas) {}

void Registry::grant(std::string drone, const PublicKey& controller) {
  acl_[std::move(drone)] = controller;
}

std::optional<PublicKey> Registry::controller(std::string_view drone) const {
  auto it = acl_.find(drone);
  if (it == acl_.end()) return std::nullopt;
  return it->second;
}

TokenStatus Registry::place_token(const PublicKey& caller, std::string_view drone, Bytes token,
                                  Tick now) {
  auto it = acl_.find(drone);
  if (it == acl_.end() || it->second != caller) return TokenStatus::Absent;
  for (auto& view : views_) {
    view.insert_or_assign(std::string(drone), RegistryEntry{token, caller, now});
  }
  return TokenStatus::Present;
}

std::pair<std::optional<Bytes>, TokenStatus> Registry::retrieve_token(std::string_view drone,
                                                                      std::size_t replica) const {
  const auto& view = views_.at(replica);
  auto it = view.find(drone);
  if (it == view.end()) return {std::nullopt, TokenStatus::Absent};
  return {it->second.token, TokenStatus::Present};
}

void Registry::force_write(std::string_view drone, Bytes token, const PublicKey& writer, Tick now) {
  for (auto& view : views_) {
    view.insert_or_assign(std::string(drone), RegistryEntry{token, writer, now});
  }
}

void Registry::poison(std::size_t replica, std::string_view drone, Bytes token,
                      const PublicKey& writer, Tick now) {
  views_.at(replica).insert_or_assign(std::string(drone), RegistryEntry{std::move(token), writer, now});
}

}  // namespace dpki
