#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <vector>

#include "fedtx/adapter.hpp"
#include "fedtx/instrumented.hpp"

namespace fedtx {

struct MemStoreConfig {
  AdapterCapabilities capabilities;
  std::uint64_t seed = 0;
  FaultPlan fault_plan;
};

/// Deterministic in-memory adapter backed by an ordered map. atomicWrite
/// batches serialize per atomicity unit; read transactions hold the unit's
/// latch shared.
class MemStore final : public Adapter {
 public:
  MemStore(std::string name, MemStoreConfig config);

  const std::string& name() const override { return name_; }
  AdapterCapabilities capabilities() const override { return config_.capabilities; }

  std::optional<Record> read(const FullKey& key) override;
  std::vector<Record> scan(const GroupKey& partition) override;
  WriteResult atomicWrite(std::span<const ConditionalWrite> writes) override;

  std::unique_ptr<ReadTransaction> begin(const GroupKey& unit) override;
  std::optional<ViewDefinition> viewFor(const std::string& ns, const std::string& table) const override;
  std::optional<Record> viewRead(const std::string& view, const FullKey& key) override;
  std::vector<Record> viewScan(const std::string& view, const GroupKey& partition) override;

  void registerView(ViewDefinition view);
  // Fixes the key component tags of a table. Otherwise the first write does.
  void defineTable(const std::string& ns, const std::string& table,
                   std::vector<ValueType> partition_key, std::vector<ValueType> clustering_key = {});

  std::vector<Record> dump() const;
  std::size_t size() const;
  void truncate();

 private:
  class Transaction;
  struct Signature {
    std::vector<ValueType> partition_key;
    std::vector<ValueType> clustering_key;
  };
  using Rows = std::map<FullKey, Columns, std::less<>>;

  std::shared_ptr<std::shared_mutex> latchFor(const GroupKey& unit);
  void checkSignature(const FullKey& key);  // requires rows_mutex_ held exclusively
  std::optional<Record> readLocked(const FullKey& key) const;
  std::vector<Record> scanLocked(const std::string& ns, const std::string& table,
                                 const KeyValues& partition_key) const;
  const ViewDefinition& view(const std::string& name) const;
  static std::optional<Record> joinRows(const FullKey& key, const Columns* app, const Columns* meta);

  const std::string name_;
  const MemStoreConfig config_;

  mutable std::shared_mutex rows_mutex_;
  Rows rows_;
  std::map<std::pair<std::string, std::string>, Signature> signatures_;

  std::mutex latch_mutex_;
  std::map<std::string, std::shared_ptr<std::shared_mutex>> latches_;

  mutable std::shared_mutex view_mutex_;
  std::map<std::string, ViewDefinition> views_;
};

/// A MemStore wrapped as Counting(FaultInjecting(MemStore)). `top` is what
/// goes into a registry.
struct MemStoreStack {
  std::shared_ptr<MemStore> store;
  std::shared_ptr<FaultInjectingAdapter> faults;
  std::shared_ptr<CountingAdapter> counting;

  std::shared_ptr<Adapter> top() const { return counting; }
  OpCounters counters() const { return counting->counters(); }
  void injectFault(FaultPlan plan) const { faults->injectFault(std::move(plan)); }
};

MemStoreStack makeMemStore(std::string name, MemStoreConfig config);

}  // namespace fedtx
