#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "fedtx/adapter.hpp"

namespace fedtx {

struct OpCounters {
  std::uint64_t reads = 0;
  std::uint64_t scans = 0;
  std::uint64_t atomic_write_batches = 0;
  std::uint64_t written_records = 0;
  // Each atomicWrite batch and each db-level read transaction.
  std::uint64_t db_transactions = 0;

  OpCounters& operator+=(const OpCounters& other);
  bool operator==(const OpCounters&) const = default;

  /// `name=value` per line, fixed order.
  std::string report() const;
};

/// Tallies every operation issued to the wrapped adapter.
class CountingAdapter final : public Adapter {
 public:
  explicit CountingAdapter(std::shared_ptr<Adapter> inner);

  const std::string& name() const override { return inner_->name(); }
  AdapterCapabilities capabilities() const override { return inner_->capabilities(); }

  std::optional<Record> read(const FullKey& key) override;
  std::vector<Record> scan(const GroupKey& partition) override;
  WriteResult atomicWrite(std::span<const ConditionalWrite> writes) override;
  std::unique_ptr<ReadTransaction> begin(const GroupKey& unit) override;
  std::optional<ViewDefinition> viewFor(const std::string& ns, const std::string& table) const override;
  std::optional<Record> viewRead(const std::string& view, const FullKey& key) override;
  std::vector<Record> viewScan(const std::string& view, const GroupKey& partition) override;

  OpCounters counters() const;
  void reset();

 private:
  class Transaction;

  std::shared_ptr<Adapter> inner_;
  std::atomic<std::uint64_t> reads_{0};
  std::atomic<std::uint64_t> scans_{0};
  std::atomic<std::uint64_t> batches_{0};
  std::atomic<std::uint64_t> written_{0};
  std::atomic<std::uint64_t> db_transactions_{0};
};

enum class FaultKind : std::uint8_t {
  kCrashBeforeBatch,  // batch not applied, error raised
  kCrashAfterBatch,   // batch applied, error raised
};

struct FaultSpec {
  std::uint64_t operation_index = 0;  // n-th atomicWrite after injection, 0-based
  FaultKind kind = FaultKind::kCrashBeforeBatch;
};

using FaultPlan = std::vector<FaultSpec>;

/// Raises Error(kInjectedFault) on planned atomicWrite calls.
class FaultInjectingAdapter final : public Adapter {
 public:
  explicit FaultInjectingAdapter(std::shared_ptr<Adapter> inner, FaultPlan plan = {});

  const std::string& name() const override { return inner_->name(); }
  AdapterCapabilities capabilities() const override { return inner_->capabilities(); }

  std::optional<Record> read(const FullKey& key) override { return inner_->read(key); }
  std::vector<Record> scan(const GroupKey& partition) override { return inner_->scan(partition); }
  WriteResult atomicWrite(std::span<const ConditionalWrite> writes) override;
  std::unique_ptr<ReadTransaction> begin(const GroupKey& unit) override { return inner_->begin(unit); }
  std::optional<ViewDefinition> viewFor(const std::string& ns, const std::string& table) const override {
    return inner_->viewFor(ns, table);
  }
  std::optional<Record> viewRead(const std::string& view, const FullKey& key) override {
    return inner_->viewRead(view, key);
  }
  std::vector<Record> viewScan(const std::string& view, const GroupKey& partition) override {
    return inner_->viewScan(view, partition);
  }

  /// Replaces the plan and restarts operation numbering. Indices must be
  /// strictly increasing.
  void injectFault(FaultPlan plan);
  std::uint64_t faultsRaised() const;

 private:
  std::shared_ptr<Adapter> inner_;
  mutable std::mutex mutex_;
  FaultPlan plan_;
  std::size_t next_fault_ = 0;
  std::uint64_t op_index_ = 0;
  std::uint64_t raised_ = 0;
};

}  // namespace fedtx
