#include "fedtx/transaction.hpp"

#include <algorithm>
#include <cstdio>
#include <exception>
#include <future>

#include "fedtx/errors.hpp"

namespace fedtx {

std::string_view toString(TxStatus status) {
  switch (status) {
    case TxStatus::kActive: return "ACTIVE";
    case TxStatus::kCommitted: return "COMMITTED";
    case TxStatus::kAborted: return "ABORTED";
  }
  return "?";
}

std::string_view toString(AbortReason reason) {
  switch (reason) {
    case AbortReason::kNone: return "none";
    case AbortReason::kUserAbort: return "user-abort";
    case AbortReason::kConflict: return "conflict";
    case AbortReason::kValidation: return "validation";
    case AbortReason::kCoordinatorAborted: return "coordinator-aborted";
    case AbortReason::kJoinIntegrity: return "join-integrity";
    case AbortReason::kCrashed: return "crashed";
  }
  return "?";
}

FullKey CoordinatorLocation::keyFor(const TxId& tx_id) const {
  return FullKey(storage, ns, table, {Value::text(tx_id)});
}

namespace {

constexpr int kMaxResolveAttempts = 16;

// PREPARED record -> its COMMITTED form. Conditioned on the preparer's txId.
ConditionalWrite committedImage(const VersionedRecord& prepared, Timestamp now) {
  const auto condition = WriteCondition::ifTxIdEquals(prepared.metadata.tx_id);
  if (prepared.metadata.deleting) return ConditionalWrite{prepared.key, {}, condition, WriteKind::kDelete};
  VersionedRecord committed = prepared;
  committed.metadata.state = TxState::kCommitted;
  committed.metadata.committed_at = now;
  committed.metadata.before_image.reset();
  return ConditionalWrite{prepared.key, committed.toColumns(), condition, WriteKind::kPut};
}

// PREPARED record -> its before image (or removal of a fresh insert). Built
// from metadata only, so a torn application part is never written back.
ConditionalWrite rollbackImage(const VersionedRecord& prepared) {
  const auto condition = WriteCondition::ifTxIdEquals(prepared.metadata.tx_id);
  if (!prepared.metadata.before_image) return ConditionalWrite{prepared.key, {}, condition, WriteKind::kDelete};
  const auto& before = *prepared.metadata.before_image;
  TransactionMetadata meta;
  static_cast<VersionMetadata&>(meta) = before.metadata;
  VersionedRecord restored{prepared.key, before.columns, std::move(meta)};
  return ConditionalWrite{prepared.key, restored.toColumns(), condition, WriteKind::kPut};
}

bool sameVersion(const Record& a, const Record& b) {
  auto ma = decodeMetadata(splitColumns(a.columns).second);
  auto mb = decodeMetadata(splitColumns(b.columns).second);
  return ma.tx_id == mb.tx_id && ma.version == mb.version && ma.state == mb.state;
}

bool inPartition(const FullKey& key, const GroupKey& partition) {
  return key.storage() == partition.storage() && key.ns() == partition.ns() && key.table() == partition.table() &&
         partition.partitionKey() && key.partitionKey() == *partition.partitionKey();
}

}  // namespace

struct TransactionManager::PlannedWrite {
  FullKey key;
  VersionedRecord prepared;
  WriteCondition condition;  // against the observed version
};

class TransactionManager::AsyncCommitter {
 public:
  explicit AsyncCommitter(std::size_t capacity) : capacity_(std::max<std::size_t>(1, capacity)) {
    worker_ = std::thread([this] { run(); });
  }

  ~AsyncCommitter() {
    {
      std::lock_guard lock(mutex_);
      stop_ = true;
    }
    changed_.notify_all();
    worker_.join();
  }

  void push(std::function<void()> task) {
    std::unique_lock lock(mutex_);
    changed_.wait(lock, [&] { return queue_.size() < capacity_; });
    queue_.push_back(std::move(task));
    changed_.notify_all();
  }

  void drain() {
    std::unique_lock lock(mutex_);
    changed_.wait(lock, [&] { return queue_.empty() && busy_ == 0; });
  }

 private:
  void run() {
    std::unique_lock lock(mutex_);
    for (;;) {
      changed_.wait(lock, [&] { return stop_ || !queue_.empty(); });
      if (queue_.empty()) return;
      auto task = std::move(queue_.front());
      queue_.pop_front();
      ++busy_;
      changed_.notify_all();
      lock.unlock();
      try {
        task();
      } catch (const std::exception&) {
        // Records stay PREPARED; readers resolve them lazily.
      }
      lock.lock();
      --busy_;
      changed_.notify_all();
    }
  }

  const std::size_t capacity_;
  std::mutex mutex_;
  std::condition_variable changed_;
  std::deque<std::function<void()>> queue_;
  std::size_t busy_ = 0;
  bool stop_ = false;
  std::thread worker_;
};

TransactionManager::TransactionManager(std::shared_ptr<const StorageRegistry> registry, ManagerOptions options)
    : registry_(std::move(registry)),
      options_(std::move(options)),
      store_(registry_, options_.decoupling,
             [this](const FullKey&) { hook(PipelinePoint::kBetweenDecoupledReads, TxId{}); }) {
  if (!registry_->contains(options_.coordinator.storage)) {
    throw Error(ErrorCode::kUnknownStorage, "coordinator storage '" + options_.coordinator.storage + "' is not registered");
  }
  if (options_.tx_id_seed) {
    id_rng_.seed(*options_.tx_id_seed);
  } else {
    std::random_device rd;
    id_rng_.seed((static_cast<std::uint64_t>(rd()) << 32) ^ rd());
  }
  if (options_.async_commit_records) async_ = std::make_unique<AsyncCommitter>(options_.async_queue_capacity);
}

TransactionManager::~TransactionManager() {
  if (async_) async_->drain();
}

TxId TransactionManager::newTxId() {
  std::uint64_t hi = 0;
  std::uint64_t lo = 0;
  {
    std::lock_guard lock(id_mutex_);
    hi = id_rng_();
    lo = id_rng_();
  }
  // RFC 4122 version 4 layout.
  hi = (hi & 0xffffffffffff0fffULL) | 0x0000000000004000ULL;
  lo = (lo & 0x3fffffffffffffffULL) | 0x8000000000000000ULL;
  char buf[37];
  std::snprintf(buf, sizeof(buf), "%08x-%04x-%04x-%04x-%012llx", static_cast<unsigned>(hi >> 32),
                static_cast<unsigned>((hi >> 16) & 0xffff), static_cast<unsigned>(hi & 0xffff),
                static_cast<unsigned>(lo >> 48), static_cast<unsigned long long>(lo & 0xffffffffffffULL));
  return TxId(buf);
}

void TransactionManager::hook(PipelinePoint point, const TxId& tx_id) const {
  if (options_.hook) options_.hook(point, tx_id);
}

void TransactionManager::requireActive(const TxHandle& tx) {
  if (tx.status_ != TxStatus::kActive) {
    throw Error(ErrorCode::kTransactionState, "transaction " + tx.id_ + " is " + std::string(toString(tx.status_)));
  }
}

TxHandle TransactionManager::begin(bool serializable) { return TxHandle(newTxId(), serializable, tick()); }

Observation TransactionManager::observe(const FullKey& key) {
  for (int attempt = 0; attempt < kMaxResolveAttempts; ++attempt) {
    ReadOutcome outcome = store_.read(key);
    if (!outcome.record) return Observation{std::nullopt, outcome.path};
    auto rec = VersionedRecord::parse(key, outcome.record->columns);
    if (rec.metadata.state == TxState::kCommitted) return Observation{std::move(outcome.record), outcome.path};
    recover(rec);
  }
  throw Error(ErrorCode::kRecoveryFailed, key.toString() + " stayed PREPARED after recovery");
}

std::optional<Columns> TransactionManager::get(TxHandle& tx, const FullKey& key) {
  requireActive(tx);
  if (auto w = tx.write_set_.find(key); w != tx.write_set_.end()) {
    if (w->second.kind == WriteKind::kDelete) return std::nullopt;
    return w->second.values;
  }
  auto it = tx.read_set_.find(key);
  if (it == tx.read_set_.end()) {
    try {
      it = tx.read_set_.emplace(key, observe(key)).first;
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kJoinIntegrity) {
        tx.status_ = TxStatus::kAborted;
        tx.reason_ = AbortReason::kJoinIntegrity;
        tx.end_ts_ = tick();
        aborts_.fetch_add(1, std::memory_order_relaxed);
      }
      throw;
    }
  }
  if (!it->second.present()) return std::nullopt;
  return splitColumns(it->second.raw->columns).first;
}

std::vector<Record> TransactionManager::scan(TxHandle& tx, const GroupKey& partition) {
  requireActive(tx);
  ScanOutcome outcome;
  try {
    for (int attempt = 0;; ++attempt) {
      if (attempt == kMaxResolveAttempts) {
        throw Error(ErrorCode::kRecoveryFailed, partition.toString() + " stayed PREPARED after recovery");
      }
      outcome = store_.scan(partition);
      bool resolved_any = false;
      for (const auto& r : outcome.records) {
        auto rec = VersionedRecord::parse(r.key, r.columns);
        if (rec.metadata.state == TxState::kPrepared) {
          recover(rec);
          resolved_any = true;
        }
      }
      if (!resolved_any) break;
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kJoinIntegrity) {
      tx.status_ = TxStatus::kAborted;
      tx.reason_ = AbortReason::kJoinIntegrity;
      tx.end_ts_ = tick();
      aborts_.fetch_add(1, std::memory_order_relaxed);
    }
    throw;
  }

  std::map<FullKey, Columns> merged;
  for (const auto& r : outcome.records) {
    tx.read_set_.try_emplace(r.key, Observation{r, outcome.path});
    merged.emplace(r.key, splitColumns(r.columns).first);
  }
  for (const auto& [key, w] : tx.write_set_) {
    if (!inPartition(key, partition)) continue;
    if (w.kind == WriteKind::kDelete) {
      merged.erase(key);
    } else {
      merged.insert_or_assign(key, w.values);
    }
  }
  tx.scans_.push_back(ScanObservation{partition, outcome.path, std::move(outcome.records)});
  std::vector<Record> out;
  out.reserve(merged.size());
  for (auto& [key, columns] : merged) out.push_back(Record{key, std::move(columns)});
  return out;
}

void TransactionManager::put(TxHandle& tx, const FullKey& key, Columns values) {
  requireActive(tx);
  if (!registry_->contains(key.storage())) {
    throw Error(ErrorCode::kUnknownStorage, "storage '" + key.storage() + "' is not registered");
  }
  for (const auto& [name, _] : values) {
    if (isMetadataColumn(name)) throw Error(ErrorCode::kInvalidArgument, "column name '" + name + "' is reserved");
  }
  tx.write_set_.insert_or_assign(key, BufferedWrite{WriteKind::kPut, std::move(values)});
}

void TransactionManager::remove(TxHandle& tx, const FullKey& key) {
  requireActive(tx);
  if (!registry_->contains(key.storage())) {
    throw Error(ErrorCode::kUnknownStorage, "storage '" + key.storage() + "' is not registered");
  }
  tx.write_set_.insert_or_assign(key, BufferedWrite{WriteKind::kDelete, {}});
}

void TransactionManager::abort(TxHandle& tx) {
  if (tx.status_ == TxStatus::kAborted) return;
  requireActive(tx);
  tx.write_set_.clear();
  tx.status_ = TxStatus::kAborted;
  tx.reason_ = AbortReason::kUserAbort;
  tx.end_ts_ = tick();
  aborts_.fetch_add(1, std::memory_order_relaxed);
}

bool TransactionManager::stillValid(const FullKey& key, const Observation& observed) {
  validation_reads_.fetch_add(readCost(observed.path), std::memory_order_relaxed);
  std::optional<Record> now;
  try {
    now = store_.readVia(observed.path, key);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kJoinIntegrity) return false;
    throw;
  }
  if (!observed.raw || !now) return !observed.raw && !now;
  // Two independent reads may have been torn; only the whole joined record
  // proves the observation was a real state.
  if (observed.path == ReadPath::kDecoupled) return observed.raw->columns == now->columns;
  return sameVersion(*observed.raw, *now);
}

bool TransactionManager::scanStillValid(const ScanObservation& scan, const std::map<FullKey, PlannedWrite>& plan) {
  std::vector<Record> now;
  try {
    now = store_.scanVia(scan.path, scan.partition);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kJoinIntegrity) return false;
    throw;
  }
  auto strip = [&](const std::vector<Record>& records) {
    std::vector<const Record*> out;
    for (const auto& r : records) {
      if (!plan.contains(r.key)) out.push_back(&r);
    }
    return out;
  };
  auto before = strip(scan.raw);
  auto after = strip(now);
  if (before.size() != after.size()) return false;
  for (std::size_t i = 0; i < before.size(); ++i) {
    if (before[i]->key != after[i]->key) return false;
    if (scan.path == ReadPath::kDecoupled ? before[i]->columns != after[i]->columns
                                          : !sameVersion(*before[i], *after[i])) {
      return false;
    }
  }
  return true;
}

std::map<FullKey, TransactionManager::PlannedWrite> TransactionManager::planWrites(TxHandle& tx, Timestamp now) {
  std::map<FullKey, PlannedWrite> plan;
  tx.effects_.clear();
  for (const auto& [key, write] : tx.write_set_) {
    const Observation& observed = tx.read_set_.at(key);
    if (!observed.present() && write.kind == WriteKind::kDelete) continue;

    TransactionMetadata meta;
    meta.tx_id = tx.id_;
    meta.state = TxState::kPrepared;
    meta.prepared_at = now;
    meta.deleting = write.kind == WriteKind::kDelete;
    WriteEffect effect{key, write.kind, 1, {}, 0};
    Columns values = write.values;
    auto condition = WriteCondition::ifNotExists();
    if (observed.present()) {
      VersionedRecord prior = observed.parsed();
      meta.version = prior.metadata.version + 1;
      meta.before_image = BeforeImage{prior.values, static_cast<const VersionMetadata&>(prior.metadata)};
      condition = WriteCondition::ifTxIdEquals(prior.metadata.tx_id);
      effect.prior_tx_id = prior.metadata.tx_id;
      effect.prior_version = prior.metadata.version;
      if (meta.deleting) values = prior.values;
    } else {
      meta.version = 1;
    }
    effect.new_version = meta.version;
    tx.effects_.push_back(effect);
    plan.emplace(key, PlannedWrite{key, VersionedRecord{key, std::move(values), std::move(meta)}, condition});
  }
  return plan;
}

bool TransactionManager::writeCoordinator(const TxId& tx_id, CoordinatorDecision decision) {
  CoordinatorState state{tx_id, decision, tick()};
  const ConditionalWrite w{options_.coordinator.keyFor(tx_id), state.toColumns(), WriteCondition::ifNotExists(),
                           WriteKind::kPut};
  coordinator_writes_.fetch_add(1, std::memory_order_relaxed);
  return registry_->atomicWrite(std::span(&w, 1)).isOk();
}

std::optional<CoordinatorState> TransactionManager::coordinatorState(const TxId& tx_id) const {
  auto r = registry_->read(options_.coordinator.keyFor(tx_id));
  if (!r) return std::nullopt;
  return CoordinatorState::parse(tx_id, r->columns);
}

CommitResult TransactionManager::finish(TxHandle& tx, AbortReason reason, std::string detail) {
  tx.status_ = TxStatus::kAborted;
  tx.reason_ = reason;
  tx.end_ts_ = tick();
  aborts_.fetch_add(1, std::memory_order_relaxed);
  return CommitResult{TxStatus::kAborted, reason, std::move(detail)};
}

void TransactionManager::forEachGroup(std::size_t count, const std::function<bool(std::size_t)>& fn) {
  const std::size_t workers = std::min(std::max<std::size_t>(1, options_.parallelism), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) {
      if (!fn(i)) break;
    }
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};
  std::mutex error_mutex;
  std::exception_ptr first_error;
  std::vector<std::future<void>> running;
  running.reserve(workers);
  for (std::size_t t = 0; t < workers; ++t) {
    running.push_back(std::async(std::launch::async, [&] {
      while (!stop.load()) {
        const std::size_t i = next.fetch_add(1);
        if (i >= count) return;
        try {
          if (!fn(i)) stop = true;
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
          stop = true;
        }
      }
    }));
  }
  for (auto& f : running) f.get();
  if (first_error) std::rethrow_exception(first_error);
}

void TransactionManager::writeGroupBestEffort(std::vector<ConditionalWrite> writes) {
  if (store_.atomicWrite(writes)) return;
  // Someone resolved part of the group already; settle the rest one by one.
  for (const auto& w : writes) store_.atomicWrite(std::span(&w, 1));
}

void TransactionManager::rollBackGroups(const std::vector<Group<PlannedWrite>>& groups,
                                        const std::vector<char>& prepared) {
  forEachGroup(groups.size(), [&](std::size_t i) {
    if (!prepared[i]) return true;
    std::vector<ConditionalWrite> writes;
    for (const auto& pw : groups[i].items) writes.push_back(rollbackImage(pw.prepared));
    writeGroupBestEffort(std::move(writes));
    return true;
  });
}

void TransactionManager::abortPrepared(const TxId& tx_id, const std::vector<Group<PlannedWrite>>& groups,
                                       const std::vector<char>& prepared) {
  if (std::none_of(prepared.begin(), prepared.end(), [](char p) { return p != 0; })) return;
  writeCoordinator(tx_id, CoordinatorDecision::kAborted);
  rollBackGroups(groups, prepared);
}

void TransactionManager::commitRecords(const std::vector<Group<PlannedWrite>>& groups) {
  forEachGroup(groups.size(), [&](std::size_t i) {
    const Timestamp now = tick();
    std::vector<ConditionalWrite> writes;
    for (const auto& pw : groups[i].items) writes.push_back(committedImage(pw.prepared, now));
    writeGroupBestEffort(std::move(writes));
    hook(PipelinePoint::kAfterCommitRecordGroup, groups[i].items.front().prepared.metadata.tx_id);
    return true;
  });
}

CommitResult TransactionManager::commit(TxHandle& tx) {
  requireActive(tx);
  hook(PipelinePoint::kBeforeCommit, tx.id_);
  try {
    return runCommit(tx);
  } catch (const Error& e) {
    if (tx.status_ == TxStatus::kActive) {
      tx.status_ = TxStatus::kAborted;
      tx.reason_ = e.code() == ErrorCode::kInjectedFault ? AbortReason::kCrashed : AbortReason::kNone;
      tx.end_ts_ = tick();
    }
    throw;
  }
}

CommitResult TransactionManager::runCommit(TxHandle& tx) {
  // Blind writes need the current version for their condition and before image.
  try {
    for (const auto& [key, _] : tx.write_set_) {
      if (!tx.read_set_.contains(key)) tx.read_set_.emplace(key, observe(key));
    }
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kJoinIntegrity) throw;
    return finish(tx, AbortReason::kJoinIntegrity, e.what());
  }

  // A torn pair on a written key would pass a TxID-only prepare condition, so
  // such keys are re-read before anything is prepared.
  for (const auto& [key, _] : tx.write_set_) {
    const Observation& observed = tx.read_set_.at(key);
    if (observed.path == ReadPath::kDecoupled && !stillValid(key, observed)) {
      return finish(tx, AbortReason::kValidation, "decoupled read of " + key.toString() + " changed");
    }
  }

  const Timestamp now = tick();
  auto plan = planWrites(tx, now);

  // Keys re-read after prepare. Written keys are covered by prepare conditions.
  std::vector<const std::pair<const FullKey, Observation>*> to_validate;
  for (const auto& entry : tx.read_set_) {
    if (plan.contains(entry.first)) continue;
    const bool decoupled_read = store_.isDecoupled(entry.first) && entry.second.path == ReadPath::kDecoupled;
    if (tx.serializable_ || decoupled_read) to_validate.push_back(&entry);
  }
  const bool validate_scans = tx.serializable_ && !tx.scans_.empty();
  const bool validation_required = !to_validate.empty() || validate_scans;
  auto validate = [&]() -> std::optional<std::string> {
    for (const auto* entry : to_validate) {
      if (!stillValid(entry->first, entry->second)) return "read of " + entry->first.toString() + " changed";
    }
    if (validate_scans) {
      for (const auto& s : tx.scans_) {
        if (!scanStillValid(s, plan)) return "scan of " + s.partition.toString() + " changed";
      }
    }
    return std::nullopt;
  };

  if (plan.empty()) {
    if (validation_required) {
      if (auto failure = validate()) return finish(tx, AbortReason::kValidation, *failure);
    }
    read_only_commits_.fetch_add(1, std::memory_order_relaxed);
    tx.status_ = TxStatus::kCommitted;
    tx.end_ts_ = tick();
    return CommitResult{TxStatus::kCommitted, AbortReason::kNone, {}};
  }

  std::vector<PlannedWrite> items;
  items.reserve(plan.size());
  for (const auto& [_, pw] : plan) items.push_back(pw);
  UnitResolver unit_of = [this](const FullKey& key) {
    return options_.aup_enabled ? registry_->getAtomicityUnit(key) : AtomicityUnit::kRecord;
  };
  auto groups = groupByUnit<PlannedWrite>(items, [](const PlannedWrite& pw) -> const FullKey& { return pw.key; },
                                          unit_of);

  if (options_.one_phase_enabled && onePhaseEligible(groups.size(), tx.serializable_, validation_required)) {
    std::vector<ConditionalWrite> writes;
    for (const auto& pw : groups.front().items) {
      auto w = committedImage(pw.prepared, now);
      w.condition = pw.condition;
      writes.push_back(std::move(w));
    }
    auto result = store_.atomicWrite(writes);
    if (!result) {
      return finish(tx, AbortReason::kConflict,
                    "one-phase condition failed on " + writes[result.failedIndex()].key.toString());
    }
    one_phase_commits_.fetch_add(1, std::memory_order_relaxed);
    tx.status_ = TxStatus::kCommitted;
    tx.end_ts_ = tick();
    return CommitResult{TxStatus::kCommitted, AbortReason::kNone, {}};
  }

  // Prepare-record phase.
  std::vector<char> prepared(groups.size(), 0);
  std::mutex failure_mutex;
  std::optional<std::string> conflict;
  try {
    forEachGroup(groups.size(), [&](std::size_t i) {
      std::vector<ConditionalWrite> writes;
      for (const auto& pw : groups[i].items) {
        writes.push_back(ConditionalWrite{pw.key, pw.prepared.toColumns(), pw.condition, WriteKind::kPut});
      }
      auto result = store_.atomicWrite(writes);
      if (!result) {
        std::lock_guard lock(failure_mutex);
        conflict = "prepare condition failed on " + writes[result.failedIndex()].key.toString();
        return false;
      }
      prepared[i] = 1;
      hook(PipelinePoint::kAfterPrepareGroup, tx.id_);
      return true;
    });
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kInjectedFault) throw;
    abortPrepared(tx.id_, groups, prepared);
    throw;
  }
  if (conflict) {
    abortPrepared(tx.id_, groups, prepared);
    return finish(tx, AbortReason::kConflict, *conflict);
  }

  // Validate-record phase.
  hook(PipelinePoint::kBeforeValidation, tx.id_);
  if (validation_required) {
    if (auto failure = validate()) {
      abortPrepared(tx.id_, groups, prepared);
      return finish(tx, AbortReason::kValidation, *failure);
    }
  }

  // Commit-state phase; the transaction is committed once this lands.
  hook(PipelinePoint::kBeforeCommitState, tx.id_);
  if (!writeCoordinator(tx.id_, CoordinatorDecision::kCommitted)) {
    auto state = coordinatorState(tx.id_);
    if (!state || state->state == CoordinatorDecision::kAborted) {
      rollBackGroups(groups, prepared);
      return finish(tx, AbortReason::kCoordinatorAborted, "a reader aborted " + tx.id_ + " first");
    }
  }
  tx.status_ = TxStatus::kCommitted;
  tx.end_ts_ = tick();
  two_phase_commits_.fetch_add(1, std::memory_order_relaxed);
  hook(PipelinePoint::kAfterCommitState, tx.id_);

  // Commit-record phase.
  if (async_) {
    async_->push([this, groups = std::move(groups)] { commitRecords(groups); });
  } else {
    commitRecords(groups);
  }
  return CommitResult{TxStatus::kCommitted, AbortReason::kNone, {}};
}

Resolution TransactionManager::recover(const VersionedRecord& prepared) {
  const TxId& owner = prepared.metadata.tx_id;
  auto state = coordinatorState(owner);
  if (!state) {
    if (writeCoordinator(owner, CoordinatorDecision::kAborted)) {
      state = CoordinatorState{owner, CoordinatorDecision::kAborted, 0};
    } else {
      state = coordinatorState(owner);
      if (!state) throw Error(ErrorCode::kRecoveryFailed, "coordinator state of " + owner + " vanished");
    }
  }
  if (state->state == CoordinatorDecision::kCommitted) {
    const auto w = committedImage(prepared, tick());
    store_.atomicWriteMetadata(std::span(&w, 1));
    rolled_forward_.fetch_add(1, std::memory_order_relaxed);
    return Resolution::kRolledForward;
  }
  const auto w = rollbackImage(prepared);
  store_.atomicWrite(std::span(&w, 1));
  rolled_back_.fetch_add(1, std::memory_order_relaxed);
  return Resolution::kRolledBack;
}

std::optional<Record> TransactionManager::resolve(const FullKey& key) { return observe(key).raw; }

void TransactionManager::drain() {
  if (async_) async_->drain();
}

ManagerStats TransactionManager::stats() const {
  ManagerStats s;
  s.validation_reads = validation_reads_.load();
  s.coordinator_writes = coordinator_writes_.load();
  s.one_phase_commits = one_phase_commits_.load();
  s.two_phase_commits = two_phase_commits_.load();
  s.read_only_commits = read_only_commits_.load();
  s.aborts = aborts_.load();
  s.rolled_forward = rolled_forward_.load();
  s.rolled_back = rolled_back_.load();
  return s;
}

void TransactionManager::resetStats() {
  validation_reads_ = 0;
  coordinator_writes_ = 0;
  one_phase_commits_ = 0;
  two_phase_commits_ = 0;
  read_only_commits_ = 0;
  aborts_ = 0;
  rolled_forward_ = 0;
  rolled_back_ = 0;
}

}  // namespace fedtx
