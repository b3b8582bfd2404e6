#include "fedtx/metadata.hpp"

#include "fedtx/errors.hpp"

namespace fedtx {

std::string_view toString(TxState state) {
  return state == TxState::kPrepared ? "PREPARED" : "COMMITTED";
}

std::string_view toString(CoordinatorDecision decision) {
  return decision == CoordinatorDecision::kCommitted ? "COMMITTED" : "ABORTED";
}

bool isMetadataColumn(std::string_view name) {
  return name.starts_with(kTxPrefix) || name.starts_with(kBeforePrefix);
}

bool TransactionMetadata::wellFormed() const {
  if (state == TxState::kCommitted && !committed_at) return false;
  if (state == TxState::kCommitted) return !before_image.has_value();
  return before_image.has_value() == (version > 1);
}

namespace {

void encodeVersion(const VersionMetadata& m, std::string_view prefix, Columns& out) {
  auto name = [&](std::string_view col) { return std::string(prefix) + std::string(col); };
  out[name(kTxIdColumn)] = Value::text(m.tx_id);
  out[name(kTxVersionColumn)] = Value(static_cast<std::int64_t>(m.version));
  out[name(kTxStateColumn)] = Value::text(std::string(toString(m.state)));
  out[name(kTxPreparedAtColumn)] = Value(static_cast<std::int64_t>(m.prepared_at));
  if (m.committed_at) {
    out[name(kTxCommittedAtColumn)] = Value(static_cast<std::int64_t>(*m.committed_at));
  }
  if (m.deleting) out[name(kTxDeletingColumn)] = Value(true);
}

const Value& require(const Columns& columns, const std::string& name) {
  auto it = columns.find(name);
  if (it == columns.end()) {
    throw Error(ErrorCode::kInvalidArgument, "missing metadata column '" + name + "'");
  }
  return it->second;
}

VersionMetadata decodeVersion(const Columns& columns, std::string_view prefix) {
  auto name = [&](std::string_view col) { return std::string(prefix) + std::string(col); };
  VersionMetadata m;
  m.tx_id = require(columns, name(kTxIdColumn)).asText();
  m.version = static_cast<std::uint64_t>(require(columns, name(kTxVersionColumn)).asInt());
  const auto& state = require(columns, name(kTxStateColumn)).asText();
  if (state == "PREPARED") {
    m.state = TxState::kPrepared;
  } else if (state == "COMMITTED") {
    m.state = TxState::kCommitted;
  } else {
    throw Error(ErrorCode::kInvalidArgument, "bad tx_state '" + state + "'");
  }
  m.prepared_at = static_cast<Timestamp>(require(columns, name(kTxPreparedAtColumn)).asInt());
  if (auto it = columns.find(name(kTxCommittedAtColumn)); it != columns.end()) {
    m.committed_at = static_cast<Timestamp>(it->second.asInt());
  }
  if (auto it = columns.find(name(kTxDeletingColumn)); it != columns.end()) {
    m.deleting = it->second.asBool();
  }
  return m;
}

}  // namespace

Columns encodeMetadata(const TransactionMetadata& metadata) {
  Columns out;
  encodeVersion(metadata, "", out);
  if (metadata.before_image) {
    encodeVersion(metadata.before_image->metadata, kBeforePrefix, out);
    for (const auto& [name, value] : metadata.before_image->columns) {
      out[std::string(kBeforePrefix) + name] = value;
    }
  }
  return out;
}

TransactionMetadata decodeMetadata(const Columns& columns) {
  TransactionMetadata m;
  static_cast<VersionMetadata&>(m) = decodeVersion(columns, "");
  const std::string before_tx_id = std::string(kBeforePrefix) + std::string(kTxIdColumn);
  if (columns.contains(before_tx_id)) {
    BeforeImage image;
    image.metadata = decodeVersion(columns, kBeforePrefix);
    for (const auto& [name, value] : columns) {
      if (!name.starts_with(kBeforePrefix)) continue;
      std::string_view rest = std::string_view(name).substr(kBeforePrefix.size());
      if (rest.starts_with(kTxPrefix)) continue;
      image.columns.emplace(std::string(rest), value);
    }
    m.before_image = std::move(image);
  }
  return m;
}

std::pair<Columns, Columns> splitColumns(const Columns& all) {
  std::pair<Columns, Columns> out;
  for (const auto& [name, value] : all) {
    (isMetadataColumn(name) ? out.second : out.first).emplace(name, value);
  }
  return out;
}

Columns VersionedRecord::toColumns() const {
  Columns out = encodeMetadata(metadata);
  for (const auto& [name, value] : values) out.emplace(name, value);
  return out;
}

VersionedRecord VersionedRecord::parse(FullKey key, const Columns& stored) {
  auto [app, meta] = splitColumns(stored);
  return VersionedRecord{std::move(key), std::move(app), decodeMetadata(meta)};
}

Columns CoordinatorState::toColumns() const {
  return Columns{{"state", Value::text(std::string(toString(state)))},
                 {"created_at", Value(static_cast<std::int64_t>(created_at))}};
}

CoordinatorState CoordinatorState::parse(TxId tx_id, const Columns& columns) {
  CoordinatorState s;
  s.tx_id = std::move(tx_id);
  const auto& state = require(columns, "state").asText();
  if (state == "COMMITTED") {
    s.state = CoordinatorDecision::kCommitted;
  } else if (state == "ABORTED") {
    s.state = CoordinatorDecision::kAborted;
  } else {
    throw Error(ErrorCode::kInvalidArgument, "bad coordinator state '" + state + "'");
  }
  s.created_at = static_cast<Timestamp>(require(columns, "created_at").asInt());
  return s;
}

}  // namespace fedtx
