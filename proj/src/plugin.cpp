#include "dronepki/plugin.hpp"

namespace dpki {

void VerificationArray::sync(const Ledger& ledger, Tick now) {
  const auto& blocks = ledger.blocks();
  std::size_t next = synced_ ? *synced_ + 1 : 0;
  for (; next < blocks.size(); ++next) {
    const Block& b = blocks[next];
    Binding& binding = bindings_[b.body.drone_name];
    binding.active = b.header.crt_type == CrtType::Initial;
    binding.expiry = b.body.expiry;
    synced_ = next;
  }
  now_ = now;
  for (const auto& [name, binding] : bindings_) {
    statuses_.insert_or_assign(name, binding.active && now < binding.expiry);
  }
}

bool VerificationArray::is_valid(std::string_view drone) const {
  auto it = statuses_.find(drone);
  return it != statuses_.end() && it->second;
}

bool VerificationArray::is_valid(std::string_view drone, Tick now) const {
  auto it = bindings_.find(drone);
  if (it == bindings_.end()) return false;
  return is_valid(drone) && it->second.active && now < it->second.expiry;
}

}  // namespace dpki
