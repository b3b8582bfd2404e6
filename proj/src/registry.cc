#include "fedtx/registry.hpp"

#include "fedtx/errors.hpp"

namespace fedtx {

void StorageRegistry::add(std::shared_ptr<Adapter> adapter) {
  if (!adapter) throw Error(ErrorCode::kInvalidArgument, "null adapter");
  auto caps = adapter->capabilities();
  caps.validate();
  const std::string name = adapter->name();
  auto [it, inserted] = entries_.emplace(name, Entry{std::move(adapter), caps});
  if (!inserted) throw Error(ErrorCode::kInvalidArgument, "duplicate storage '" + name + "'");
}

const StorageRegistry::Entry& StorageRegistry::entry(std::string_view storage) const {
  auto it = entries_.find(storage);
  if (it == entries_.end()) {
    throw Error(ErrorCode::kUnknownStorage, "storage '" + std::string(storage) + "' is not registered");
  }
  return it->second;
}

bool StorageRegistry::contains(std::string_view storage) const { return entries_.contains(storage); }

Adapter& StorageRegistry::get(std::string_view storage) const { return *entry(storage).adapter; }

const AdapterCapabilities& StorageRegistry::capabilities(std::string_view storage) const {
  return entry(storage).capabilities;
}

AtomicityUnit StorageRegistry::getAtomicityUnit(const FullKey& key) const {
  return capabilities(key.storage()).atomicity_unit;
}

std::optional<Record> StorageRegistry::read(const FullKey& key) const {
  return getDatabase(key).read(key);
}

std::vector<Record> StorageRegistry::scan(const GroupKey& partition) const {
  return get(partition.storage()).scan(partition);
}

WriteResult StorageRegistry::atomicWrite(std::span<const ConditionalWrite> writes) const {
  if (writes.empty()) return WriteResult::ok();
  return getDatabase(writes.front().key).atomicWrite(writes);
}

bool StorageRegistry::consistentReadable(const FullKey& key, const FullKey& companion) const {
  const auto& caps = capabilities(key.storage());
  if (!caps.consistent_readable) return false;
  if (companion.storage() != key.storage()) return false;
  return deriveGroupKey(key, caps.atomicity_unit) == deriveGroupKey(companion, caps.atomicity_unit);
}

bool StorageRegistry::viewJoinable(const FullKey& key) const {
  const auto& e = entry(key.storage());
  if (!e.capabilities.view_joinable) return false;
  return e.adapter->viewFor(key.ns(), key.table()).has_value();
}

std::vector<std::string> StorageRegistry::storages() const {
  std::vector<std::string> out;
  for (const auto& [name, _] : entries_) out.push_back(name);
  return out;
}

}  // namespace fedtx
