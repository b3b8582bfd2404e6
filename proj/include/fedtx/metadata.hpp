#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

#include "fedtx/key.hpp"
#include "fedtx/value.hpp"

namespace fedtx {

using TxId = std::string;
using Timestamp = std::uint64_t;

enum class TxState : std::uint8_t { kPrepared, kCommitted };
enum class CoordinatorDecision : std::uint8_t { kCommitted, kAborted };

std::string_view toString(TxState state);
std::string_view toString(CoordinatorDecision decision);

// Reserved column names. Application columns may not start with kTxPrefix or
// kBeforePrefix.
inline constexpr std::string_view kTxPrefix = "tx_";
inline constexpr std::string_view kBeforePrefix = "before_";
inline constexpr std::string_view kTxIdColumn = "tx_id";
inline constexpr std::string_view kTxVersionColumn = "tx_version";
inline constexpr std::string_view kTxStateColumn = "tx_state";
inline constexpr std::string_view kTxPreparedAtColumn = "tx_prepared_at";
inline constexpr std::string_view kTxCommittedAtColumn = "tx_committed_at";
inline constexpr std::string_view kTxDeletingColumn = "tx_deleting";

bool isMetadataColumn(std::string_view name);

/// Per-version transaction metadata (the DWAL fields of one version).
struct VersionMetadata {
  TxId tx_id;
  std::uint64_t version = 0;
  TxState state = TxState::kCommitted;
  Timestamp prepared_at = 0;
  std::optional<Timestamp> committed_at;
  // PREPARED tombstone: committing it removes the record.
  bool deleting = false;

  bool operator==(const VersionMetadata&) const = default;
};

struct BeforeImage {
  Columns columns;
  VersionMetadata metadata;

  bool operator==(const BeforeImage&) const = default;
};

struct TransactionMetadata : VersionMetadata {
  std::optional<BeforeImage> before_image;

  bool operator==(const TransactionMetadata&) const = default;

  // COMMITTED implies committed_at; before image only on PREPARED records and
  // only for versions above 1.
  bool wellFormed() const;
};

/// Serialized metadata columns (tx_* and before_*).
Columns encodeMetadata(const TransactionMetadata& metadata);
/// Throws Error(kInvalidArgument) if the tx_* columns are missing or malformed.
TransactionMetadata decodeMetadata(const Columns& columns);

/// Splits flat stored columns into (application, metadata).
std::pair<Columns, Columns> splitColumns(const Columns& all);

/// A stored record with its metadata parsed out.
struct VersionedRecord {
  FullKey key;
  Columns values;
  TransactionMetadata metadata;

  Columns toColumns() const;
  static VersionedRecord parse(FullKey key, const Columns& stored);
};

/// Write-once transaction outcome kept in the coordinator table.
struct CoordinatorState {
  TxId tx_id;
  CoordinatorDecision state = CoordinatorDecision::kCommitted;
  Timestamp created_at = 0;

  bool operator==(const CoordinatorState&) const = default;

  Columns toColumns() const;
  static CoordinatorState parse(TxId tx_id, const Columns& columns);
};

}  // namespace fedtx
