#include "fixtures.hpp"

#include <stdexcept>

namespace fedtx::testing {

Cluster Cluster::make(const std::vector<StorageSetup>& storages, ManagerOptions options) {
  Cluster c;
  c.registry = std::make_shared<StorageRegistry>();
  for (const auto& s : storages) {
    auto stack = makeMemStore(s.name, MemStoreConfig{s.caps, 0, {}});
    for (const auto& [ns, table] : s.views) {
      stack.store->registerView(ViewDefinition{table + "_view", ns, table, table + options.decoupling.meta_suffix});
    }
    c.registry->add(stack.top());
    c.stores.emplace(s.name, std::move(stack));
  }
  if (!c.stores.contains(options.coordinator.storage)) {
    auto stack = makeMemStore(options.coordinator.storage,
                              MemStoreConfig{AdapterCapabilities{AtomicityUnit::kStorage, false, false}, 0, {}});
    c.registry->add(stack.top());
    c.stores.emplace(options.coordinator.storage, std::move(stack));
  }
  c.manager = std::make_unique<TransactionManager>(c.registry, std::move(options));
  return c;
}

OpCounters Cluster::totals() const {
  OpCounters total;
  for (const auto& [_, s] : stores) total += s.counters();
  return total;
}

void Cluster::resetCounters() {
  for (const auto& [_, s] : stores) s.counting->reset();
  manager->resetStats();
}

void Cluster::clearFaults() {
  for (const auto& [_, s] : stores) s.injectFault({});
}

FullKey key(const std::string& storage, const std::string& ns, const std::string& table, std::int64_t pk) {
  return FullKey(storage, ns, table, {Value(pk)});
}

FullKey key(const std::string& storage, const std::string& ns, const std::string& table, std::int64_t pk,
            std::int64_t ck) {
  return FullKey(storage, ns, table, {Value(pk)}, {Value(ck)});
}

Columns cols(std::int64_t v) { return Columns{{"v", Value(v)}}; }

std::vector<Record> joinedDump(const TransactionManager& tm, const std::vector<FullKey>& keys) {
  std::vector<Record> out;
  for (const auto& k : keys) {
    if (auto r = tm.store().read(k).record) out.push_back(std::move(*r));
  }
  return out;
}

std::map<FullKey, Columns> committedState(TransactionManager& tm, const std::vector<FullKey>& keys) {
  std::map<FullKey, Columns> out;
  for (const auto& k : keys) {
    if (auto r = tm.resolve(k)) out.emplace(k, splitColumns(r->columns).first);
  }
  return out;
}

void load(TransactionManager& tm, const std::map<FullKey, Columns>& values) {
  auto tx = tm.begin();
  for (const auto& [k, v] : values) tm.put(tx, k, v);
  auto result = tm.commit(tx);
  if (!result.committed()) throw std::runtime_error("load failed: " + result.detail);
  tm.drain();
}

}  // namespace fedtx::testing
