#pragma once

#include <map>
#include <memory>
#include <string>

#include "fedtx/adapter.hpp"

namespace fedtx {

/// Routes keys to adapters by their storage component. Populate once, then
/// treat as immutable; lookups are thread-safe.
class StorageRegistry {
 public:
  void add(std::shared_ptr<Adapter> adapter);

  bool contains(std::string_view storage) const;
  Adapter& get(std::string_view storage) const;
  Adapter& getDatabase(const FullKey& key) const { return get(key.storage()); }
  const AdapterCapabilities& capabilities(std::string_view storage) const;

  AtomicityUnit getAtomicityUnit(const FullKey& key) const;

  std::optional<Record> read(const FullKey& key) const;
  std::vector<Record> scan(const GroupKey& partition) const;
  // Routes by writes[0]; an empty batch is a no-op.
  WriteResult atomicWrite(std::span<const ConditionalWrite> writes) const;

  /// True iff the owning adapter is consistent-readable and both keys fall in
  /// one of its atomicity units.
  bool consistentReadable(const FullKey& key, const FullKey& companion) const;
  /// True iff the adapter is view-joinable and a view covers key's table.
  bool viewJoinable(const FullKey& key) const;

  std::vector<std::string> storages() const;

 private:
  struct Entry {
    std::shared_ptr<Adapter> adapter;
    AdapterCapabilities capabilities;
  };
  const Entry& entry(std::string_view storage) const;

  std::map<std::string, Entry, std::less<>> entries_;
};

}  // namespace fedtx
