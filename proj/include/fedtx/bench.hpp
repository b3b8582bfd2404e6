#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "fedtx/memstore.hpp"
#include "fedtx/registry.hpp"
#include "fedtx/transaction.hpp"

namespace fedtx::bench {

enum class Workload : std::uint8_t { kF, kC };
enum class DecouplingMode : std::uint8_t { kNone, kUnoptimized, kConsistentReadable, kViewJoinable };
enum class ReportFormat : std::uint8_t { kText, kCsv };

std::string_view toString(Workload w);
std::string_view toString(DecouplingMode m);

inline constexpr std::string_view kNamespace = "ycsb";
inline constexpr std::string_view kTable = "usertable";
inline constexpr std::string_view kPayloadColumn = "payload";
inline constexpr std::string_view kCsvHeader =
    "config,committed,aborted,reads,scans,batches,writtenRecords,dbTransactions,p50us,p99us";

struct StorageSpec {
  std::string name;
  AtomicityUnit atomicity_unit = AtomicityUnit::kStorage;
  bool consistent_readable = false;
  bool view_joinable = false;
};

struct WorkloadConfig {
  std::string name = "run";
  Workload workload = Workload::kF;
  std::uint32_t ops_per_tx = 8;
  std::uint64_t record_count = 10000;
  std::uint32_t payload_bytes = 128;
  std::uint32_t threads = 1;
  std::uint64_t duration_ops = 5000;
  std::uint64_t seed = 1;
  bool aup_enabled = true;
  bool one_phase_enabled = true;
  DecouplingMode decoupling = DecouplingMode::kNone;
  bool serializable = false;
  std::vector<StorageSpec> storages{StorageSpec{"db0"}};
  // Either one of `storages` or a dedicated store of its own.
  std::string coordinator = "coordinator";

  /// Throws Error(kConfig).
  void validate() const;
};

/// Parses the JSON config format documented in the README. Throws Error(kConfig).
WorkloadConfig parseConfig(const std::string& text);
WorkloadConfig loadConfigFile(const std::string& path);

struct LatencySummary {
  std::uint64_t p50_us = 0;
  std::uint64_t p99_us = 0;
};

struct Report {
  std::string config;
  std::uint64_t attempted = 0;
  std::uint64_t committed = 0;
  std::uint64_t aborted = 0;
  // Logical transactions whose last attempt aborted when the budget ran out.
  std::uint64_t abandoned = 0;
  std::map<std::string, OpCounters> per_storage;
  OpCounters total;
  ManagerStats manager;
  LatencySummary latency;
};

std::string render(const Report& report, ReportFormat format);

/// Storages, registry and manager for one config.
class Bench {
 public:
  explicit Bench(WorkloadConfig config);

  /// Truncates every store and loads record_count records into each storage
  /// through the transaction manager. Counters are reset afterwards.
  Report loadPhase();
  Report runWorkload();

  const WorkloadConfig& config() const { return config_; }
  TransactionManager& manager() { return *manager_; }
  const std::map<std::string, MemStoreStack>& stores() const { return stores_; }
  std::shared_ptr<const StorageRegistry> registry() const { return registry_; }
  FullKey keyFor(const std::string& storage, std::uint64_t index) const;

  OpCounters totalCounters() const;
  void resetCounters();

 private:
  Report snapshot() const;

  WorkloadConfig config_;
  std::map<std::string, MemStoreStack> stores_;
  std::shared_ptr<StorageRegistry> registry_;
  std::unique_ptr<TransactionManager> manager_;
};

}  // namespace fedtx::bench
