#include "fedtx/key.hpp"

#include <algorithm>
#include <cctype>

#include "fedtx/errors.hpp"

namespace fedtx {

std::string_view toString(AtomicityUnit unit) {
  switch (unit) {
    case AtomicityUnit::kRecord: return "RECORD";
    case AtomicityUnit::kPartition: return "PARTITION";
    case AtomicityUnit::kTable: return "TABLE";
    case AtomicityUnit::kNamespace: return "NAMESPACE";
    case AtomicityUnit::kStorage: return "STORAGE";
  }
  return "?";
}

AtomicityUnit parseAtomicityUnit(std::string_view text) {
  std::string upper(text);
  for (char& c : upper) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  if (upper == "RECORD") return AtomicityUnit::kRecord;
  if (upper == "PARTITION") return AtomicityUnit::kPartition;
  if (upper == "TABLE") return AtomicityUnit::kTable;
  // "schema" is accepted as a synonym.
  if (upper == "NAMESPACE" || upper == "SCHEMA") return AtomicityUnit::kNamespace;
  if (upper == "STORAGE" || upper == "DATABASE") return AtomicityUnit::kStorage;
  throw Error(ErrorCode::kInvalidArgument, "unknown atomicity unit '" + std::string(text) + "'");
}

FullKey::FullKey(std::string storage, std::string ns, std::string table, KeyValues partition_key,
                 KeyValues clustering_key)
    : storage_(std::move(storage)),
      namespace_(std::move(ns)),
      table_(std::move(table)),
      partition_key_(std::move(partition_key)),
      clustering_key_(std::move(clustering_key)) {
  if (partition_key_.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "partition key must not be empty");
  }
}

FullKey FullKey::withTable(std::string table) const {
  return FullKey(storage_, namespace_, std::move(table), partition_key_, clustering_key_);
}

int compareKeyValues(const KeyValues& a, const KeyValues& b) {
  const auto n = std::min(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (int c = compare(a[i], b[i]); c != 0) return c;
  }
  return a.size() < b.size() ? -1 : (a.size() > b.size() ? 1 : 0);
}

std::weak_ordering operator<=>(const FullKey& a, const FullKey& b) {
  if (auto c = a.storage_ <=> b.storage_; c != 0) return c;
  if (auto c = a.namespace_ <=> b.namespace_; c != 0) return c;
  if (auto c = a.table_ <=> b.table_; c != 0) return c;
  if (int c = compareKeyValues(a.partition_key_, b.partition_key_); c != 0) {
    return c < 0 ? std::weak_ordering::less : std::weak_ordering::greater;
  }
  int c = compareKeyValues(a.clustering_key_, b.clustering_key_);
  return c < 0 ? std::weak_ordering::less
               : (c > 0 ? std::weak_ordering::greater : std::weak_ordering::equivalent);
}

std::string renderKeyValues(const KeyValues& values) {
  std::string out = "[";
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ",";
    out += values[i].toString();
  }
  out += "]";
  return out;
}

std::string FullKey::toString() const {
  return storage_ + "/" + namespace_ + "/" + table_ + "/pk=" + renderKeyValues(partition_key_) +
         "/ck=" + renderKeyValues(clustering_key_);
}

GroupKey::GroupKey(std::string storage) : storage_(std::move(storage)) {}

GroupKey deriveGroupKey(const FullKey& key, AtomicityUnit unit) {
  GroupKey g(key.storage());
  g.depth_ = unit;
  if (unit == AtomicityUnit::kStorage) return g;
  g.namespace_ = key.ns();
  if (unit == AtomicityUnit::kNamespace) return g;
  g.table_ = key.table();
  if (unit == AtomicityUnit::kTable) return g;
  g.partition_key_ = key.partitionKey();
  if (unit == AtomicityUnit::kPartition) return g;
  g.clustering_key_ = key.clusteringKey();
  return g;
}

bool GroupKey::isPrefixOf(const GroupKey& other) const {
  if (!broaderOrEqual(depth_, other.depth_)) return false;
  if (storage_ != other.storage_) return false;
  if (namespace_ && namespace_ != other.namespace_) return false;
  if (table_ && table_ != other.table_) return false;
  if (partition_key_ && partition_key_ != other.partition_key_) return false;
  if (clustering_key_ && clustering_key_ != other.clustering_key_) return false;
  return true;
}

bool GroupKey::contains(const FullKey& key) const {
  return isPrefixOf(deriveGroupKey(key, AtomicityUnit::kRecord));
}

std::string GroupKey::toString() const {
  std::string out = storage_;
  if (namespace_) out += "/" + *namespace_;
  if (table_) out += "/" + *table_;
  if (partition_key_) out += "/pk=" + renderKeyValues(*partition_key_);
  if (clustering_key_) out += "/ck=" + renderKeyValues(*clustering_key_);
  return out;
}

}  // namespace fedtx
