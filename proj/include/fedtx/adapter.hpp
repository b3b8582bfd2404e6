#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fedtx/key.hpp"
#include "fedtx/metadata.hpp"
#include "fedtx/value.hpp"

namespace fedtx {

struct Record {
  FullKey key;
  Columns columns;

  bool operator==(const Record&) const = default;
};

enum class WriteKind : std::uint8_t { kPut, kDelete };

class WriteCondition {
 public:
  enum class Kind : std::uint8_t { kUnconditional, kIfNotExists, kIfTxIdEquals };

  static WriteCondition unconditional() { return WriteCondition(Kind::kUnconditional, {}); }
  static WriteCondition ifNotExists() { return WriteCondition(Kind::kIfNotExists, {}); }
  // Throws kInvalidArgument on an empty expected id.
  static WriteCondition ifTxIdEquals(TxId expected);

  Kind kind() const noexcept { return kind_; }
  const TxId& expectedTxId() const noexcept { return expected_; }

  // Evaluated against the current stored columns (nullptr when absent).
  bool holds(const Columns* current) const;

  bool operator==(const WriteCondition&) const = default;

 private:
  WriteCondition(Kind kind, TxId expected) : kind_(kind), expected_(std::move(expected)) {}

  Kind kind_;
  TxId expected_;
};

/// One element of an atomic batch: the full post-image of a stored record.
struct ConditionalWrite {
  FullKey key;
  Columns columns;
  WriteCondition condition = WriteCondition::unconditional();
  WriteKind kind = WriteKind::kPut;
};

inline GroupKey deriveGroupKey(const ConditionalWrite& write, AtomicityUnit unit) {
  return deriveGroupKey(write.key, unit);
}

class WriteResult {
 public:
  static WriteResult ok() { return WriteResult(std::nullopt); }
  static WriteResult conditionFailed(std::size_t index) { return WriteResult(index); }

  bool isOk() const noexcept { return !failed_index_; }
  explicit operator bool() const noexcept { return isOk(); }
  std::size_t failedIndex() const { return failed_index_.value(); }

 private:
  explicit WriteResult(std::optional<std::size_t> i) : failed_index_(i) {}
  std::optional<std::size_t> failed_index_;
};

struct AdapterCapabilities {
  AtomicityUnit atomicity_unit = AtomicityUnit::kRecord;
  bool consistent_readable = false;
  bool view_joinable = false;

  // view joinability implies consistent readability
  void validate() const;
};

/// Application table joined with its metadata table on primary key.
struct ViewDefinition {
  std::string name;
  std::string ns;
  std::string app_table;
  std::string meta_table;
};

/// Db-level read transaction scoped to one atomicity unit. All reads observe
/// one consistent point.
class ReadTransaction {
 public:
  virtual ~ReadTransaction() = default;
  virtual std::optional<Record> read(const FullKey& key) = 0;
  virtual std::vector<Record> scan(const GroupKey& partition) = 0;
  virtual void commit() = 0;
};

/// Storage adapter contract. Implementations are internally synchronized.
class Adapter {
 public:
  virtual ~Adapter() = default;

  virtual const std::string& name() const = 0;
  virtual AdapterCapabilities capabilities() const = 0;

  virtual std::optional<Record> read(const FullKey& key) = 0;
  // `partition` must carry a partition key; results in clustering-key order.
  virtual std::vector<Record> scan(const GroupKey& partition) = 0;
  // All writes must share one GroupKey at this adapter's unit, otherwise
  // kAtomicityScopeViolation. All-or-nothing; conditions checked in order.
  virtual WriteResult atomicWrite(std::span<const ConditionalWrite> writes) = 0;

  // Optional capabilities; the defaults throw kCapabilityUnsupported.
  virtual std::unique_ptr<ReadTransaction> begin(const GroupKey& unit);
  virtual std::optional<ViewDefinition> viewFor(const std::string& ns, const std::string& table) const;
  virtual std::optional<Record> viewRead(const std::string& view, const FullKey& key);
  virtual std::vector<Record> viewScan(const std::string& view, const GroupKey& partition);

  /// Reads every key at one linearization point through begin(). Keys must
  /// share this adapter's atomicity unit.
  std::vector<std::optional<Record>> snapshotRead(std::span<const FullKey> keys);
};

}  // namespace fedtx
