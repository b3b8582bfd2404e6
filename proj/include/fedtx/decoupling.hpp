#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "fedtx/adapter.hpp"
#include "fedtx/registry.hpp"

namespace fedtx {

/// Which route produced a joined record. Validation re-reads use the same
/// route.
enum class ReadPath : std::uint8_t {
  kNormal,         // colocated metadata, one read
  kDecoupled,      // two independent reads, needs validation
  kInAbstraction,  // two reads inside one db-level transaction
  kView,           // one read of a joining view
};

std::string_view toString(ReadPath path);
/// Storage reads issued for one logical read on `path`.
unsigned readCost(ReadPath path);

struct DecoupleConfig {
  bool enabled = false;
  // Namespaces whose metadata lives apart from application rows; empty = all.
  std::set<std::string, std::less<>> namespaces;
  std::string meta_suffix = "_meta";
  // Overrides the suffix convention. Must be injective and keep the storage.
  std::function<FullKey(const FullKey&)> locator;

  bool appliesTo(const FullKey& key) const;
  FullKey metadataKey(const FullKey& key) const;
};

struct DecoupledRecords {
  std::vector<Record> app;
  std::vector<Record> meta;
};

/// Splits full records into application and metadata parts, pairwise by index.
DecoupledRecords decouple(std::span<const Record> records, const DecoupleConfig& config);

/// Joins an application row with its metadata row. Both absent yields
/// nullopt; exactly one absent raises kJoinIntegrity.
std::optional<Record> join(const FullKey& key, const std::optional<Record>& app,
                           const std::optional<Record>& meta);

struct ReadOutcome {
  std::optional<Record> record;
  ReadPath path = ReadPath::kNormal;
};

struct ScanOutcome {
  std::vector<Record> records;
  ReadPath path = ReadPath::kNormal;
};

/// Storage abstraction extended with metadata decoupling. Callers see full
/// records (application + metadata columns) regardless of physical layout.
class RecordStore {
 public:
  // Invoked between the two reads of readDecoupled (test instrumentation).
  using ReadHook = std::function<void(const FullKey&)>;

  RecordStore(std::shared_ptr<const StorageRegistry> registry, DecoupleConfig config, ReadHook between_reads = {});

  const StorageRegistry& registry() const { return *registry_; }
  const DecoupleConfig& config() const { return config_; }

  bool isDecoupled(const FullKey& key) const { return config_.appliesTo(key); }
  bool consistentReadable(const FullKey& key) const;
  bool viewJoinable(const FullKey& key) const;
  ReadPath pathFor(const FullKey& key) const;

  ReadOutcome read(const FullKey& key) const;
  std::optional<Record> readVia(ReadPath path, const FullKey& key) const;

  std::optional<Record> readNormally(const FullKey& key) const;
  std::optional<Record> readDecoupled(const FullKey& key) const;
  std::optional<Record> readDecoupledInAbstraction(const FullKey& key) const;
  std::optional<Record> readDecoupledFromView(const FullKey& key) const;

  ScanOutcome scan(const GroupKey& partition) const;
  std::vector<Record> scanVia(ReadPath path, const GroupKey& partition) const;

  /// Writes full post-images as one batch; decoupled keys become an
  /// application write plus a metadata write carrying the condition. The
  /// reported failure index refers to `writes`.
  WriteResult atomicWrite(std::span<const ConditionalWrite> writes) const;
  /// Like atomicWrite, but PUTs on decoupled keys touch only the metadata
  /// row; the application row is left as stored.
  WriteResult atomicWriteMetadata(std::span<const ConditionalWrite> writes) const;

 private:
  WriteResult writeBatch(std::span<const ConditionalWrite> writes, bool metadata_only) const;
  std::optional<ViewDefinition> viewOf(const FullKey& key) const;
  GroupKey metaPartition(const GroupKey& partition) const;

  std::shared_ptr<const StorageRegistry> registry_;
  DecoupleConfig config_;
  ReadHook between_reads_;
};

}  // namespace fedtx
