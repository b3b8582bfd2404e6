#include "fedtx/adapter.hpp"

#include "fedtx/errors.hpp"

namespace fedtx {

WriteCondition WriteCondition::ifTxIdEquals(TxId expected) {
  if (expected.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "IF_TXID_EQUALS needs a non-empty txId");
  }
  return WriteCondition(Kind::kIfTxIdEquals, std::move(expected));
}

bool WriteCondition::holds(const Columns* current) const {
  switch (kind_) {
    case Kind::kUnconditional: return true;
    case Kind::kIfNotExists: return current == nullptr;
    case Kind::kIfTxIdEquals: {
      if (current == nullptr) return false;
      auto it = current->find(kTxIdColumn);
      return it != current->end() && it->second.type() == ValueType::kText &&
             it->second.asText() == expected_;
    }
  }
  return false;
}

void AdapterCapabilities::validate() const {
  if (view_joinable && !consistent_readable) {
    throw Error(ErrorCode::kInvalidArgument, "view_joinable requires consistent_readable");
  }
}

std::unique_ptr<ReadTransaction> Adapter::begin(const GroupKey&) {
  throw Error(ErrorCode::kCapabilityUnsupported, name() + " has no db-level transactions");
}

std::optional<ViewDefinition> Adapter::viewFor(const std::string&, const std::string&) const {
  return std::nullopt;
}

std::optional<Record> Adapter::viewRead(const std::string& view, const FullKey&) {
  throw Error(ErrorCode::kCapabilityUnsupported, name() + " has no view '" + view + "'");
}

std::vector<Record> Adapter::viewScan(const std::string& view, const GroupKey&) {
  throw Error(ErrorCode::kCapabilityUnsupported, name() + " has no view '" + view + "'");
}

std::vector<std::optional<Record>> Adapter::snapshotRead(std::span<const FullKey> keys) {
  std::vector<std::optional<Record>> out;
  if (keys.empty()) return out;
  const auto caps = capabilities();
  if (!caps.consistent_readable) {
    throw Error(ErrorCode::kCapabilityUnsupported, name() + " is not consistent-readable");
  }
  const GroupKey unit = deriveGroupKey(keys.front(), caps.atomicity_unit);
  for (const auto& key : keys) {
    if (deriveGroupKey(key, caps.atomicity_unit) != unit) {
      throw Error(ErrorCode::kAtomicityScopeViolation,
                  "snapshot read spans " + unit.toString() + " and " + key.toString());
    }
  }
  auto tx = begin(unit);
  out.reserve(keys.size());
  for (const auto& key : keys) out.push_back(tx->read(key));
  tx->commit();
  return out;
}

}  // namespace fedtx
