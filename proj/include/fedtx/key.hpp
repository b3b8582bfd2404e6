#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fedtx/value.hpp"

namespace fedtx {

using KeyValues = std::vector<Value>;

/// Scope within which a storage applies a batch of writes atomically.
/// Declared in scope order: RECORD < PARTITION < TABLE < NAMESPACE < STORAGE.
enum class AtomicityUnit : std::uint8_t { kRecord, kPartition, kTable, kNamespace, kStorage };

std::string_view toString(AtomicityUnit unit);
AtomicityUnit parseAtomicityUnit(std::string_view text);

/// Broader scope compares greater.
inline bool broaderOrEqual(AtomicityUnit a, AtomicityUnit b) {
  return static_cast<int>(a) >= static_cast<int>(b);
}

/// Primary key of a record: storage/namespace/table plus partition and
/// clustering key components. Immutable.
class FullKey {
 public:
  FullKey(std::string storage, std::string ns, std::string table, KeyValues partition_key,
          KeyValues clustering_key = {});

  const std::string& storage() const noexcept { return storage_; }
  const std::string& ns() const noexcept { return namespace_; }
  const std::string& table() const noexcept { return table_; }
  const KeyValues& partitionKey() const noexcept { return partition_key_; }
  const KeyValues& clusteringKey() const noexcept { return clustering_key_; }

  /// Same primary key, different table.
  FullKey withTable(std::string table) const;

  bool operator==(const FullKey& other) const = default;
  friend std::weak_ordering operator<=>(const FullKey& a, const FullKey& b);

  /// `storage/namespace/table/pk=[..]/ck=[..]`
  std::string toString() const;

 private:
  std::string storage_;
  std::string namespace_;
  std::string table_;
  KeyValues partition_key_;
  KeyValues clustering_key_;
};

int compareKeyValues(const KeyValues& a, const KeyValues& b);
std::string renderKeyValues(const KeyValues& values);

/// Prefix of a FullKey truncated at the depth of an AtomicityUnit. Two writes
/// with equal GroupKeys can be applied in one atomic batch.
class GroupKey {
 public:
  explicit GroupKey(std::string storage);  // STORAGE depth

  AtomicityUnit depth() const noexcept { return depth_; }
  const std::string& storage() const noexcept { return storage_; }
  const std::optional<std::string>& ns() const noexcept { return namespace_; }
  const std::optional<std::string>& table() const noexcept { return table_; }
  const std::optional<KeyValues>& partitionKey() const noexcept { return partition_key_; }
  const std::optional<KeyValues>& clusteringKey() const noexcept { return clustering_key_; }

  bool isPrefixOf(const GroupKey& other) const;
  bool contains(const FullKey& key) const;

  bool operator==(const GroupKey& other) const = default;

  std::string toString() const;

 private:
  friend GroupKey deriveGroupKey(const FullKey& key, AtomicityUnit unit);

  AtomicityUnit depth_ = AtomicityUnit::kStorage;
  std::string storage_;
  std::optional<std::string> namespace_;
  std::optional<std::string> table_;
  std::optional<KeyValues> partition_key_;
  std::optional<KeyValues> clustering_key_;
};

GroupKey deriveGroupKey(const FullKey& key, AtomicityUnit unit);

}  // namespace fedtx
