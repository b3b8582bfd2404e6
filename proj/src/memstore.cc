#include "fedtx/memstore.hpp"

#include "fedtx/errors.hpp"

namespace fedtx {

namespace {

std::vector<ValueType> tagsOf(const KeyValues& values) {
  std::vector<ValueType> out;
  out.reserve(values.size());
  for (const auto& v : values) out.push_back(v.type());
  return out;
}

void requireNoNulls(const FullKey& key) {
  for (const auto* part : {&key.partitionKey(), &key.clusteringKey()}) {
    for (const auto& v : *part) {
      if (v.isNull()) throw Error(ErrorCode::kInvalidArgument, "null key component in " + key.toString());
    }
  }
}

}  // namespace

class MemStore::Transaction final : public ReadTransaction {
 public:
  Transaction(MemStore& store, GroupKey unit, std::shared_ptr<std::shared_mutex> latch)
      : store_(store), unit_(std::move(unit)), latch_(std::move(latch)), lock_(*latch_) {}

  std::optional<Record> read(const FullKey& key) override {
    ensureOpen();
    if (!unit_.contains(key)) {
      throw Error(ErrorCode::kAtomicityScopeViolation,
                  key.toString() + " is outside read transaction unit " + unit_.toString());
    }
    std::shared_lock rows(store_.rows_mutex_);
    return store_.readLocked(key);
  }

  std::vector<Record> scan(const GroupKey& partition) override {
    ensureOpen();
    if (!partition.partitionKey() || !unit_.isPrefixOf(partition)) {
      throw Error(ErrorCode::kAtomicityScopeViolation,
                  partition.toString() + " is outside read transaction unit " + unit_.toString());
    }
    std::shared_lock rows(store_.rows_mutex_);
    return store_.scanLocked(*partition.ns(), *partition.table(), *partition.partitionKey());
  }

  void commit() override {
    if (lock_.owns_lock()) lock_.unlock();
  }

 private:
  void ensureOpen() const {
    if (!lock_.owns_lock()) throw Error(ErrorCode::kTransactionState, "read transaction already committed");
  }

  MemStore& store_;
  GroupKey unit_;
  std::shared_ptr<std::shared_mutex> latch_;
  std::shared_lock<std::shared_mutex> lock_;
};

MemStore::MemStore(std::string name, MemStoreConfig config)
    : name_(std::move(name)), config_(std::move(config)) {
  config_.capabilities.validate();
}

std::shared_ptr<std::shared_mutex> MemStore::latchFor(const GroupKey& unit) {
  std::lock_guard lock(latch_mutex_);
  auto& latch = latches_[unit.toString()];
  if (!latch) latch = std::make_shared<std::shared_mutex>();
  return latch;
}

void MemStore::checkSignature(const FullKey& key) {
  requireNoNulls(key);
  auto [it, inserted] = signatures_.try_emplace({key.ns(), key.table()},
                                                Signature{tagsOf(key.partitionKey()), tagsOf(key.clusteringKey())});
  if (inserted) return;
  if (it->second.partition_key != tagsOf(key.partitionKey()) ||
      it->second.clustering_key != tagsOf(key.clusteringKey())) {
    throw Error(ErrorCode::kTypeMismatch, "key " + key.toString() + " does not match the schema of " +
                                              key.ns() + "." + key.table());
  }
}

void MemStore::defineTable(const std::string& ns, const std::string& table,
                           std::vector<ValueType> partition_key, std::vector<ValueType> clustering_key) {
  std::unique_lock rows(rows_mutex_);
  signatures_[{ns, table}] = Signature{std::move(partition_key), std::move(clustering_key)};
}

std::optional<Record> MemStore::readLocked(const FullKey& key) const {
  auto it = rows_.find(key);
  if (it == rows_.end()) return std::nullopt;
  return Record{it->first, it->second};
}

std::vector<Record> MemStore::scanLocked(const std::string& ns, const std::string& table,
                                         const KeyValues& partition_key) const {
  std::vector<Record> out;
  const FullKey start(name_, ns, table, partition_key);
  for (auto it = rows_.lower_bound(start); it != rows_.end(); ++it) {
    const FullKey& k = it->first;
    if (k.ns() != ns || k.table() != table || k.partitionKey() != partition_key) break;
    out.push_back(Record{k, it->second});
  }
  return out;
}

std::optional<Record> MemStore::read(const FullKey& key) {
  if (key.storage() != name_) throw Error(ErrorCode::kUnknownStorage, key.toString() + " routed to " + name_);
  std::shared_lock rows(rows_mutex_);
  return readLocked(key);
}

std::vector<Record> MemStore::scan(const GroupKey& partition) {
  if (partition.storage() != name_ || !partition.partitionKey()) {
    throw Error(ErrorCode::kInvalidArgument, "scan needs a partition of " + name_ + ", got " + partition.toString());
  }
  std::shared_lock rows(rows_mutex_);
  return scanLocked(*partition.ns(), *partition.table(), *partition.partitionKey());
}

WriteResult MemStore::atomicWrite(std::span<const ConditionalWrite> writes) {
  if (writes.empty()) return WriteResult::ok();
  const AtomicityUnit unit = config_.capabilities.atomicity_unit;
  for (const auto& w : writes) {
    if (w.key.storage() != name_) {
      throw Error(ErrorCode::kAtomicityScopeViolation, w.key.toString() + " is not stored in " + name_);
    }
  }
  const GroupKey group = deriveGroupKey(writes.front().key, unit);
  for (const auto& w : writes) {
    if (deriveGroupKey(w.key, unit) != group) {
      throw Error(ErrorCode::kAtomicityScopeViolation,
                  "batch spans " + group.toString() + " and " + deriveGroupKey(w.key, unit).toString());
    }
  }

  auto latch = latchFor(group);
  std::unique_lock unit_lock(*latch);
  std::unique_lock rows(rows_mutex_);
  for (const auto& w : writes) checkSignature(w.key);

  // Later writes in the batch see the effect of earlier ones.
  std::map<FullKey, std::optional<Columns>, std::less<>> staged;
  for (std::size_t i = 0; i < writes.size(); ++i) {
    const auto& w = writes[i];
    const Columns* current = nullptr;
    if (auto s = staged.find(w.key); s != staged.end()) {
      current = s->second ? &*s->second : nullptr;
    } else if (auto r = rows_.find(w.key); r != rows_.end()) {
      current = &r->second;
    }
    if (!w.condition.holds(current)) return WriteResult::conditionFailed(i);
    if (w.kind == WriteKind::kPut) {
      staged.insert_or_assign(w.key, w.columns);
    } else {
      staged.insert_or_assign(w.key, std::nullopt);
    }
  }
  for (auto& [key, columns] : staged) {
    if (columns) {
      rows_.insert_or_assign(key, std::move(*columns));
    } else {
      rows_.erase(key);
    }
  }
  return WriteResult::ok();
}

std::unique_ptr<ReadTransaction> MemStore::begin(const GroupKey& unit) {
  if (!config_.capabilities.consistent_readable) {
    throw Error(ErrorCode::kCapabilityUnsupported, name_ + " is not consistent-readable");
  }
  if (unit.storage() != name_ || unit.depth() != config_.capabilities.atomicity_unit) {
    throw Error(ErrorCode::kAtomicityScopeViolation, unit.toString() + " is not an atomicity unit of " + name_);
  }
  return std::make_unique<Transaction>(*this, unit, latchFor(unit));
}

void MemStore::registerView(ViewDefinition view) {
  std::unique_lock lock(view_mutex_);
  views_.insert_or_assign(view.name, std::move(view));
}

std::optional<ViewDefinition> MemStore::viewFor(const std::string& ns, const std::string& table) const {
  std::shared_lock lock(view_mutex_);
  for (const auto& [name, v] : views_) {
    if (v.ns == ns && v.app_table == table) return v;
  }
  return std::nullopt;
}

const ViewDefinition& MemStore::view(const std::string& name) const {
  if (!config_.capabilities.view_joinable) {
    throw Error(ErrorCode::kCapabilityUnsupported, name_ + " is not view-joinable");
  }
  std::shared_lock lock(view_mutex_);
  auto it = views_.find(name);
  if (it == views_.end()) throw Error(ErrorCode::kUnknownView, "no view '" + name + "' on " + name_);
  return it->second;
}

std::optional<Record> MemStore::joinRows(const FullKey& key, const Columns* app, const Columns* meta) {
  if (!app && !meta) return std::nullopt;
  if (!app || !meta) {
    throw Error(ErrorCode::kJoinIntegrity,
                key.toString() + (app ? " has no metadata row" : " has a metadata row but no application row"));
  }
  Record r{key, *app};
  for (const auto& [name, value] : *meta) r.columns.insert_or_assign(name, value);
  return r;
}

std::optional<Record> MemStore::viewRead(const std::string& view_name, const FullKey& key) {
  const ViewDefinition v = view(view_name);
  if (key.ns() != v.ns || key.table() != v.app_table) {
    throw Error(ErrorCode::kInvalidArgument, key.toString() + " is not covered by view " + view_name);
  }
  std::shared_lock rows(rows_mutex_);
  auto app = rows_.find(key);
  auto meta = rows_.find(key.withTable(v.meta_table));
  return joinRows(key, app == rows_.end() ? nullptr : &app->second,
                  meta == rows_.end() ? nullptr : &meta->second);
}

std::vector<Record> MemStore::viewScan(const std::string& view_name, const GroupKey& partition) {
  const ViewDefinition v = view(view_name);
  if (!partition.partitionKey() || partition.ns() != v.ns || partition.table() != v.app_table) {
    throw Error(ErrorCode::kInvalidArgument, partition.toString() + " is not covered by view " + view_name);
  }
  std::shared_lock rows(rows_mutex_);
  auto app = scanLocked(v.ns, v.app_table, *partition.partitionKey());
  auto meta = scanLocked(v.ns, v.meta_table, *partition.partitionKey());
  std::vector<Record> out;
  std::size_t m = 0;
  for (const auto& a : app) {
    const FullKey meta_key = a.key.withTable(v.meta_table);
    if (m < meta.size() && meta[m].key == meta_key) {
      out.push_back(*joinRows(a.key, &a.columns, &meta[m].columns));
      ++m;
    } else {
      joinRows(a.key, &a.columns, nullptr);
    }
  }
  if (m != meta.size()) joinRows(meta[m].key, nullptr, &meta[m].columns);
  return out;
}

std::vector<Record> MemStore::dump() const {
  std::shared_lock rows(rows_mutex_);
  std::vector<Record> out;
  out.reserve(rows_.size());
  for (const auto& [k, c] : rows_) out.push_back(Record{k, c});
  return out;
}

std::size_t MemStore::size() const {
  std::shared_lock rows(rows_mutex_);
  return rows_.size();
}

void MemStore::truncate() {
  std::unique_lock rows(rows_mutex_);
  rows_.clear();
}

MemStoreStack makeMemStore(std::string name, MemStoreConfig config) {
  MemStoreStack stack;
  FaultPlan plan = config.fault_plan;
  stack.store = std::make_shared<MemStore>(std::move(name), std::move(config));
  stack.faults = std::make_shared<FaultInjectingAdapter>(stack.store, std::move(plan));
  stack.counting = std::make_shared<CountingAdapter>(stack.faults);
  return stack;
}

}  // namespace fedtx
