#pragma once

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "fedtx/decoupling.hpp"
#include "fedtx/grouping.hpp"
#include "fedtx/metadata.hpp"
#include "fedtx/registry.hpp"

namespace fedtx {

enum class TxStatus : std::uint8_t { kActive, kCommitted, kAborted };

enum class AbortReason : std::uint8_t {
  kNone,
  kUserAbort,
  kConflict,            // a prepare or one-phase condition failed
  kValidation,          // a re-read differed from the observation
  kCoordinatorAborted,  // someone recorded ABORTED for this txId first
  kJoinIntegrity,
  kCrashed,             // injected fault; durable outcome is the coordinator's
};

std::string_view toString(TxStatus status);
std::string_view toString(AbortReason reason);

/// Points in the commit pipeline where ManagerOptions::hook is invoked.
enum class PipelinePoint : std::uint8_t {
  kBetweenDecoupledReads,
  kBeforeCommit,
  kAfterPrepareGroup,
  kBeforeValidation,
  kBeforeCommitState,
  kAfterCommitState,
  kAfterCommitRecordGroup,
};

using PipelineHook = std::function<void(PipelinePoint, const TxId&)>;

struct CoordinatorLocation {
  std::string storage = "coordinator";
  std::string ns = "coordinator";
  std::string table = "state";

  FullKey keyFor(const TxId& tx_id) const;
};

struct ManagerOptions {
  CoordinatorLocation coordinator;
  DecoupleConfig decoupling;
  bool aup_enabled = true;
  bool one_phase_enabled = true;
  // Upper bound on group batches issued concurrently.
  std::size_t parallelism = 8;
  bool async_commit_records = false;
  std::size_t async_queue_capacity = 1024;
  // Deterministic txIds when set.
  std::optional<std::uint64_t> tx_id_seed;
  // Test instrumentation; called on the committing thread when parallelism is 1.
  PipelineHook hook;
};

/// What a transaction saw when it first read a key.
struct Observation {
  std::optional<Record> raw;  // joined stored record, nullopt if absent
  ReadPath path = ReadPath::kNormal;

  bool present() const { return raw.has_value(); }
  VersionedRecord parsed() const { return VersionedRecord::parse(raw->key, raw->columns); }
};

struct BufferedWrite {
  WriteKind kind = WriteKind::kPut;
  Columns values;
};

/// One planned write, as recorded for history checking.
struct WriteEffect {
  FullKey key;
  WriteKind kind = WriteKind::kPut;
  std::uint64_t new_version = 0;
  TxId prior_tx_id;  // empty if the key was absent
  std::uint64_t prior_version = 0;
};

struct ScanObservation {
  GroupKey partition;
  ReadPath path = ReadPath::kNormal;
  std::vector<Record> raw;
};

class TxHandle {
 public:
  const TxId& id() const noexcept { return id_; }
  TxStatus status() const noexcept { return status_; }
  AbortReason abortReason() const noexcept { return reason_; }
  bool serializable() const noexcept { return serializable_; }
  Timestamp beginTs() const noexcept { return begin_ts_; }
  Timestamp endTs() const noexcept { return end_ts_; }

  const std::map<FullKey, Observation>& readSet() const noexcept { return read_set_; }
  const std::map<FullKey, BufferedWrite>& writeSet() const noexcept { return write_set_; }
  const std::vector<ScanObservation>& scans() const noexcept { return scans_; }
  // Filled when commit plans its writes.
  const std::vector<WriteEffect>& effects() const noexcept { return effects_; }

 private:
  friend class TransactionManager;
  TxHandle(TxId id, bool serializable, Timestamp begin_ts)
      : id_(std::move(id)), serializable_(serializable), begin_ts_(begin_ts) {}

  TxId id_;
  bool serializable_ = false;
  TxStatus status_ = TxStatus::kActive;
  AbortReason reason_ = AbortReason::kNone;
  Timestamp begin_ts_ = 0;
  Timestamp end_ts_ = 0;
  std::map<FullKey, Observation> read_set_;
  std::map<FullKey, BufferedWrite> write_set_;
  std::vector<ScanObservation> scans_;
  std::vector<WriteEffect> effects_;
};

struct CommitResult {
  TxStatus status = TxStatus::kAborted;
  AbortReason reason = AbortReason::kNone;
  std::string detail;

  bool committed() const { return status == TxStatus::kCommitted; }
};

struct ManagerStats {
  std::uint64_t validation_reads = 0;
  std::uint64_t coordinator_writes = 0;
  std::uint64_t one_phase_commits = 0;
  std::uint64_t two_phase_commits = 0;
  std::uint64_t read_only_commits = 0;
  std::uint64_t aborts = 0;
  std::uint64_t rolled_forward = 0;
  std::uint64_t rolled_back = 0;
};

enum class Resolution : std::uint8_t { kRolledForward, kRolledBack };

/// OCC transaction manager over a StorageRegistry. Thread-safe; a TxHandle
/// must be driven by one thread at a time.
class TransactionManager {
 public:
  explicit TransactionManager(std::shared_ptr<const StorageRegistry> registry, ManagerOptions options = {});
  ~TransactionManager();

  TransactionManager(const TransactionManager&) = delete;
  TransactionManager& operator=(const TransactionManager&) = delete;

  TxHandle begin(bool serializable = false);

  /// Application columns of `key`, honouring the transaction's own writes.
  std::optional<Columns> get(TxHandle& tx, const FullKey& key);
  /// Partition contents in clustering order, merged with buffered writes.
  std::vector<Record> scan(TxHandle& tx, const GroupKey& partition);
  void put(TxHandle& tx, const FullKey& key, Columns values);
  void remove(TxHandle& tx, const FullKey& key);

  CommitResult commit(TxHandle& tx);
  void abort(TxHandle& tx);

  /// Resolves a PREPARED record through the coordinator table.
  Resolution recover(const VersionedRecord& prepared);
  /// Reads `key`, recovering it if needed; returns the committed record.
  std::optional<Record> resolve(const FullKey& key);
  std::optional<CoordinatorState> coordinatorState(const TxId& tx_id) const;

  /// Blocks until queued commit-record work has finished.
  void drain();

  ManagerStats stats() const;
  void resetStats();
  const RecordStore& store() const { return store_; }
  const ManagerOptions& options() const { return options_; }

 private:
  struct PlannedWrite;
  class AsyncCommitter;

  Timestamp tick() { return clock_.fetch_add(1, std::memory_order_relaxed) + 1; }
  TxId newTxId();
  void hook(PipelinePoint point, const TxId& tx_id) const;
  static void requireActive(const TxHandle& tx);
  CommitResult runCommit(TxHandle& tx);

  Observation observe(const FullKey& key);
  bool stillValid(const FullKey& key, const Observation& observed);
  bool scanStillValid(const ScanObservation& scan, const std::map<FullKey, PlannedWrite>& plan);
  std::map<FullKey, PlannedWrite> planWrites(TxHandle& tx, Timestamp now);

  bool writeCoordinator(const TxId& tx_id, CoordinatorDecision decision);
  CommitResult finish(TxHandle& tx, AbortReason reason, std::string detail);
  void abortPrepared(const TxId& tx_id, const std::vector<Group<PlannedWrite>>& groups,
                     const std::vector<char>& prepared);
  void rollBackGroups(const std::vector<Group<PlannedWrite>>& groups, const std::vector<char>& prepared);
  void commitRecords(const std::vector<Group<PlannedWrite>>& groups);
  void writeGroupBestEffort(std::vector<ConditionalWrite> writes);
  void forEachGroup(std::size_t count, const std::function<bool(std::size_t)>& fn);

  std::shared_ptr<const StorageRegistry> registry_;
  ManagerOptions options_;
  RecordStore store_;

  std::atomic<Timestamp> clock_{0};
  std::mutex id_mutex_;
  std::mt19937_64 id_rng_;

  std::unique_ptr<AsyncCommitter> async_;

  mutable std::atomic<std::uint64_t> validation_reads_{0};
  std::atomic<std::uint64_t> coordinator_writes_{0};
  std::atomic<std::uint64_t> one_phase_commits_{0};
  std::atomic<std::uint64_t> two_phase_commits_{0};
  std::atomic<std::uint64_t> read_only_commits_{0};
  std::atomic<std::uint64_t> aborts_{0};
  std::atomic<std::uint64_t> rolled_forward_{0};
  std::atomic<std::uint64_t> rolled_back_{0};
};

}  // namespace fedtx
