#include "fedtx/decoupling.hpp"

#include "fedtx/errors.hpp"

namespace fedtx {

std::string_view toString(ReadPath path) {
  switch (path) {
    case ReadPath::kNormal: return "normal";
    case ReadPath::kDecoupled: return "decoupled";
    case ReadPath::kInAbstraction: return "in-abstraction";
    case ReadPath::kView: return "view";
  }
  return "?";
}

unsigned readCost(ReadPath path) {
  return (path == ReadPath::kDecoupled || path == ReadPath::kInAbstraction) ? 2 : 1;
}

bool DecoupleConfig::appliesTo(const FullKey& key) const {
  if (!enabled) return false;
  return namespaces.empty() || namespaces.contains(key.ns());
}

FullKey DecoupleConfig::metadataKey(const FullKey& key) const {
  if (locator) {
    FullKey meta = locator(key);
    if (meta.storage() != key.storage()) {
      throw Error(ErrorCode::kInvalidArgument, "metadata locator moved " + key.toString() + " to another storage");
    }
    return meta;
  }
  return key.withTable(key.table() + meta_suffix);
}

DecoupledRecords decouple(std::span<const Record> records, const DecoupleConfig& config) {
  DecoupledRecords out;
  out.app.reserve(records.size());
  out.meta.reserve(records.size());
  for (const auto& r : records) {
    auto [app, meta] = splitColumns(r.columns);
    out.app.push_back(Record{r.key, std::move(app)});
    out.meta.push_back(Record{config.metadataKey(r.key), std::move(meta)});
  }
  return out;
}

std::optional<Record> join(const FullKey& key, const std::optional<Record>& app, const std::optional<Record>& meta) {
  if (!app && !meta) return std::nullopt;
  if (!app || !meta) {
    throw Error(ErrorCode::kJoinIntegrity,
                key.toString() + (app ? " has no metadata row" : " has a metadata row but no application row"));
  }
  Record joined{key, app->columns};
  for (const auto& [name, value] : meta->columns) joined.columns.insert_or_assign(name, value);
  return joined;
}

RecordStore::RecordStore(std::shared_ptr<const StorageRegistry> registry, DecoupleConfig config, ReadHook between_reads)
    : registry_(std::move(registry)), config_(std::move(config)), between_reads_(std::move(between_reads)) {}

bool RecordStore::consistentReadable(const FullKey& key) const {
  if (!isDecoupled(key)) return registry_->capabilities(key.storage()).consistent_readable;
  return registry_->consistentReadable(key, config_.metadataKey(key));
}

std::optional<ViewDefinition> RecordStore::viewOf(const FullKey& key) const {
  if (!registry_->viewJoinable(key)) return std::nullopt;
  auto view = registry_->getDatabase(key).viewFor(key.ns(), key.table());
  if (!view || key.withTable(view->meta_table) != config_.metadataKey(key)) return std::nullopt;
  return view;
}

bool RecordStore::viewJoinable(const FullKey& key) const {
  return isDecoupled(key) && consistentReadable(key) && viewOf(key).has_value();
}

ReadPath RecordStore::pathFor(const FullKey& key) const {
  if (!isDecoupled(key)) return ReadPath::kNormal;
  if (consistentReadable(key)) {
    return viewJoinable(key) ? ReadPath::kView : ReadPath::kInAbstraction;
  }
  return ReadPath::kDecoupled;
}

ReadOutcome RecordStore::read(const FullKey& key) const {
  const ReadPath path = pathFor(key);
  return ReadOutcome{readVia(path, key), path};
}

std::optional<Record> RecordStore::readVia(ReadPath path, const FullKey& key) const {
  switch (path) {
    case ReadPath::kNormal: return readNormally(key);
    case ReadPath::kDecoupled: return readDecoupled(key);
    case ReadPath::kInAbstraction: return readDecoupledInAbstraction(key);
    case ReadPath::kView: return readDecoupledFromView(key);
  }
  return std::nullopt;
}

std::optional<Record> RecordStore::readNormally(const FullKey& key) const { return registry_->read(key); }

std::optional<Record> RecordStore::readDecoupled(const FullKey& key) const {
  auto app = registry_->read(key);
  if (between_reads_) between_reads_(key);
  auto meta = registry_->read(config_.metadataKey(key));
  return join(key, app, meta);
}

std::optional<Record> RecordStore::readDecoupledInAbstraction(const FullKey& key) const {
  if (!consistentReadable(key)) {
    throw Error(ErrorCode::kCapabilityUnsupported, key.toString() + " is not consistently readable");
  }
  const FullKey keys[] = {key, config_.metadataKey(key)};
  auto rows = registry_->getDatabase(key).snapshotRead(keys);
  return join(key, rows[0], rows[1]);
}

std::optional<Record> RecordStore::readDecoupledFromView(const FullKey& key) const {
  auto view = viewOf(key);
  if (!view) throw Error(ErrorCode::kCapabilityUnsupported, key.toString() + " has no joining view");
  return registry_->getDatabase(key).viewRead(view->name, key);
}

GroupKey RecordStore::metaPartition(const GroupKey& partition) const {
  if (config_.locator) {
    throw Error(ErrorCode::kInvalidArgument, "decoupled scans need the table-suffix metadata convention");
  }
  FullKey probe(partition.storage(), *partition.ns(), *partition.table() + config_.meta_suffix,
                *partition.partitionKey());
  return deriveGroupKey(probe, AtomicityUnit::kPartition);
}

namespace {

std::vector<Record> joinSorted(const std::vector<Record>& app, const std::vector<Record>& meta,
                               const std::string& meta_suffix) {
  std::vector<Record> out;
  std::size_t m = 0;
  for (const auto& a : app) {
    const FullKey meta_key = a.key.withTable(a.key.table() + meta_suffix);
    if (m < meta.size() && meta[m].key == meta_key) {
      out.push_back(*join(a.key, a, meta[m]));
      ++m;
    } else {
      join(a.key, a, std::nullopt);
    }
  }
  if (m != meta.size()) join(meta[m].key, std::nullopt, meta[m]);
  return out;
}

}  // namespace

ScanOutcome RecordStore::scan(const GroupKey& partition) const {
  if (!partition.partitionKey() || !partition.ns() || !partition.table()) {
    throw Error(ErrorCode::kInvalidArgument, "scan needs a partition, got " + partition.toString());
  }
  FullKey probe(partition.storage(), *partition.ns(), *partition.table(), *partition.partitionKey());
  const ReadPath path = pathFor(probe);
  return ScanOutcome{scanVia(path, partition), path};
}

std::vector<Record> RecordStore::scanVia(ReadPath path, const GroupKey& partition) const {
  switch (path) {
    case ReadPath::kNormal: return registry_->scan(partition);
    case ReadPath::kDecoupled: {
      auto app = registry_->scan(partition);
      auto meta = registry_->scan(metaPartition(partition));
      return joinSorted(app, meta, config_.meta_suffix);
    }
    case ReadPath::kInAbstraction: {
      auto& db = registry_->get(partition.storage());
      const GroupKey meta_partition = metaPartition(partition);
      FullKey probe(partition.storage(), *partition.ns(), *partition.table(), *partition.partitionKey());
      auto tx = db.begin(deriveGroupKey(probe, registry_->capabilities(partition.storage()).atomicity_unit));
      auto app = tx->scan(partition);
      auto meta = tx->scan(meta_partition);
      tx->commit();
      return joinSorted(app, meta, config_.meta_suffix);
    }
    case ReadPath::kView: {
      FullKey probe(partition.storage(), *partition.ns(), *partition.table(), *partition.partitionKey());
      auto view = viewOf(probe);
      if (!view) throw Error(ErrorCode::kCapabilityUnsupported, partition.toString() + " has no joining view");
      return registry_->get(partition.storage()).viewScan(view->name, partition);
    }
  }
  return {};
}

WriteResult RecordStore::atomicWrite(std::span<const ConditionalWrite> writes) const {
  return writeBatch(writes, false);
}

WriteResult RecordStore::atomicWriteMetadata(std::span<const ConditionalWrite> writes) const {
  return writeBatch(writes, true);
}

WriteResult RecordStore::writeBatch(std::span<const ConditionalWrite> writes, bool metadata_only) const {
  if (writes.empty()) return WriteResult::ok();
  bool any_decoupled = false;
  for (const auto& w : writes) any_decoupled = any_decoupled || isDecoupled(w.key);
  if (!any_decoupled) return registry_->atomicWrite(writes);

  const AtomicityUnit unit = registry_->getAtomicityUnit(writes.front().key);
  // Application parts first, then metadata parts; index_of maps batch
  // positions back to `writes`.
  std::vector<ConditionalWrite> batch;
  std::vector<std::size_t> index_of;
  batch.reserve(writes.size() * 2);
  std::vector<ConditionalWrite> metas;
  std::vector<std::size_t> meta_index;
  for (std::size_t i = 0; i < writes.size(); ++i) {
    const auto& w = writes[i];
    if (!isDecoupled(w.key)) {
      batch.push_back(w);
      index_of.push_back(i);
      continue;
    }
    const FullKey meta_key = config_.metadataKey(w.key);
    if (deriveGroupKey(meta_key, unit) != deriveGroupKey(w.key, unit)) {
      throw Error(ErrorCode::kAtomicityScopeViolation,
                  "metadata " + meta_key.toString() + " is outside the atomicity unit of " + w.key.toString());
    }
    auto [app, meta] = splitColumns(w.columns);
    if (!metadata_only || w.kind == WriteKind::kDelete) {
      batch.push_back(ConditionalWrite{w.key, std::move(app), WriteCondition::unconditional(), w.kind});
      index_of.push_back(i);
    }
    metas.push_back(ConditionalWrite{meta_key, std::move(meta), w.condition, w.kind});
    meta_index.push_back(i);
  }
  for (std::size_t j = 0; j < metas.size(); ++j) {
    batch.push_back(std::move(metas[j]));
    index_of.push_back(meta_index[j]);
  }
  auto result = registry_->atomicWrite(batch);
  if (result) return result;
  return WriteResult::conditionFailed(index_of[result.failedIndex()]);
}

}  // namespace fedtx
