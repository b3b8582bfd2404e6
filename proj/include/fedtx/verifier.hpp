#pragma once

#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "fedtx/adapter.hpp"
#include "fedtx/transaction.hpp"

namespace fedtx {

// Keys are FullKey::toString(). A write is identified by the writing txId,
// which is unique per key because a transaction writes each key at most once.
// An empty writer means "absent".
using WriterMap = std::map<std::string, TxId>;

struct ReadObservation {
  std::string key;
  TxId writer;
  std::uint64_t version = 0;

  bool operator==(const ReadObservation&) const = default;
};

struct WriteObservation {
  std::string key;
  std::uint64_t version = 0;
  TxId prior_writer;
  bool deleted = false;

  bool operator==(const WriteObservation&) const = default;
};

struct TxSummary {
  TxId tx_id;
  bool committed = false;
  Timestamp begin = 0;
  Timestamp commit = 0;
  std::vector<ReadObservation> reads;
  std::vector<WriteObservation> writes;

  bool operator==(const TxSummary&) const = default;
};

struct History {
  WriterMap initial;
  std::vector<TxSummary> transactions;
  WriterMap final_state;

  bool operator==(const History&) const = default;
};

struct SerializabilityResult {
  bool ok = true;
  std::vector<TxId> order;               // a witness order when ok
  std::vector<std::string> constraints;  // a minimal unsatisfiable set otherwise

  explicit operator bool() const { return ok; }
};

inline constexpr std::size_t kSerializabilitySearchBound = 8;

/// Strict serializability of the committed transactions: some order that
/// respects real-time precedence reproduces every read and the final state.
SerializabilityResult checkSerializable(const History& history);

enum class AuditOutcome : std::uint8_t { kOk, kPartialWrite, kPreparedResidue };
std::string_view toString(AuditOutcome outcome);

struct AuditResult {
  AuditOutcome outcome = AuditOutcome::kOk;
  TxId tx_id;
  std::vector<std::string> keys;

  bool ok() const { return outcome == AuditOutcome::kOk; }
};

/// `dump` holds joined stored records (application + metadata columns).
/// `history` should hold every transaction that planned writes, committed or
/// not. Lineage is followed through PUTs only: a deleted key ends its chain,
/// so histories with deletes can report false PartialWrites.
AuditResult auditAtomicity(const std::vector<Record>& dump, const History& history);

/// Latest writer per key in a joined dump. PREPARED records count as written.
WriterMap writersOf(const std::vector<Record>& dump);

TxSummary summarize(const TxHandle& tx);

std::string toJsonLines(const History& history);
History parseJsonLines(const std::string& text);

/// Collects summaries from concurrent workers.
class HistoryRecorder {
 public:
  void setInitial(WriterMap initial);
  void setFinal(WriterMap final_state);
  void record(const TxHandle& tx);
  void record(TxSummary summary);
  History history() const;

 private:
  mutable std::mutex mutex_;
  History history_;
};

}  // namespace fedtx
