#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fedtx/memstore.hpp"
#include "fedtx/registry.hpp"
#include "fedtx/transaction.hpp"
#include "fedtx/verifier.hpp"

namespace fedtx::testing {

struct StorageSetup {
  std::string name;
  AdapterCapabilities caps;
  // Views to register, as (namespace, table) of the application table.
  std::vector<std::pair<std::string, std::string>> views;
};

/// A registry of counted memstores plus a manager. The coordinator gets a
/// STORAGE-unit store of its own unless it names one of `storages`.
struct Cluster {
  std::map<std::string, MemStoreStack> stores;
  std::shared_ptr<StorageRegistry> registry;
  std::unique_ptr<TransactionManager> manager;

  static Cluster make(const std::vector<StorageSetup>& storages, ManagerOptions options = {});

  MemStoreStack& at(const std::string& name) { return stores.at(name); }
  TransactionManager& tm() { return *manager; }
  OpCounters totals() const;
  void resetCounters();
  void clearFaults();
};

FullKey key(const std::string& storage, const std::string& ns, const std::string& table, std::int64_t pk);
FullKey key(const std::string& storage, const std::string& ns, const std::string& table, std::int64_t pk,
            std::int64_t ck);

Columns cols(std::int64_t v);

/// Joined stored records for `keys` (PREPARED ones included), without recovery.
std::vector<Record> joinedDump(const TransactionManager& tm, const std::vector<FullKey>& keys);

/// Application columns of every present key, recovering PREPARED records.
std::map<FullKey, Columns> committedState(TransactionManager& tm, const std::vector<FullKey>& keys);

/// Commits `values` in one transaction; expects success.
void load(TransactionManager& tm, const std::map<FullKey, Columns>& values);

}  // namespace fedtx::testing
