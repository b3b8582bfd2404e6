#include "fedtx/verifier.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include <json.hpp>

#include "fedtx/errors.hpp"

namespace fedtx {

namespace {

std::string label(const TxId& id) { return id.empty() ? std::string("<absent>") : id; }

// Constraints the serial replay has to satisfy. Each one can be switched off
// to shrink a violation down to a minimal unsatisfiable set.
struct Constraint {
  enum Kind : std::uint8_t { kRead, kRealTime, kFinal } kind;
  std::size_t a = 0;  // reader / earlier tx
  std::size_t b = 0;  // read index / later tx
  std::string key;    // kFinal
  TxId writer;        // kFinal
};

class SerialSearch {
 public:
  SerialSearch(const History& history, std::vector<const TxSummary*> txs) : history_(history), txs_(std::move(txs)) {
    for (std::size_t i = 0; i < txs_.size(); ++i) {
      for (std::size_t r = 0; r < txs_[i]->reads.size(); ++r) constraints_.push_back({Constraint::kRead, i, r, {}, {}});
    }
    for (std::size_t i = 0; i < txs_.size(); ++i) {
      for (std::size_t j = 0; j < txs_.size(); ++j) {
        if (i != j && txs_[i]->commit < txs_[j]->begin) constraints_.push_back({Constraint::kRealTime, i, j, {}, {}});
      }
    }
    std::set<std::string> keys;
    for (const auto& [k, _] : history.initial) keys.insert(k);
    for (const auto& [k, _] : history.final_state) keys.insert(k);
    for (const auto* tx : txs_) {
      for (const auto& w : tx->writes) keys.insert(w.key);
    }
    for (const auto& k : keys) {
      auto it = history.final_state.find(k);
      constraints_.push_back({Constraint::kFinal, 0, 0, k, it == history.final_state.end() ? TxId{} : it->second});
    }
    enabled_.assign(constraints_.size(), 1);
  }

  bool solve() {
    reads_.assign(txs_.size(), {});
    preds_.assign(txs_.size(), {});
    finals_.clear();
    for (std::size_t c = 0; c < constraints_.size(); ++c) {
      if (!enabled_[c]) continue;
      const auto& con = constraints_[c];
      switch (con.kind) {
        case Constraint::kRead: reads_[con.a].push_back(con.b); break;
        case Constraint::kRealTime: preds_[con.b].push_back(con.a); break;
        case Constraint::kFinal: finals_.push_back(c); break;
      }
    }
    WriterMap state = history_.initial;
    std::vector<char> placed(txs_.size(), 0);
    order_.clear();
    return dfs(state, placed);
  }

  std::vector<TxId> order() const {
    std::vector<TxId> out;
    for (auto i : order_) out.push_back(txs_[i]->tx_id);
    return out;
  }

  std::vector<std::string> minimalUnsatisfiable() {
    for (std::size_t c = 0; c < constraints_.size(); ++c) {
      enabled_[c] = 0;
      if (solve()) enabled_[c] = 1;
    }
    std::vector<std::string> out;
    for (std::size_t c = 0; c < constraints_.size(); ++c) {
      if (enabled_[c]) out.push_back(describe(constraints_[c]));
    }
    return out;
  }

 private:
  static TxId lookup(const WriterMap& state, const std::string& key) {
    auto it = state.find(key);
    return it == state.end() ? TxId{} : it->second;
  }

  bool dfs(WriterMap& state, std::vector<char>& placed) {
    if (order_.size() == txs_.size()) {
      return std::all_of(finals_.begin(), finals_.end(), [&](std::size_t c) {
        return lookup(state, constraints_[c].key) == constraints_[c].writer;
      });
    }
    for (std::size_t i = 0; i < txs_.size(); ++i) {
      if (placed[i]) continue;
      if (!std::all_of(preds_[i].begin(), preds_[i].end(), [&](std::size_t p) { return placed[p] != 0; })) continue;
      const TxSummary& tx = *txs_[i];
      bool reads_match = std::all_of(reads_[i].begin(), reads_[i].end(), [&](std::size_t r) {
        return lookup(state, tx.reads[r].key) == tx.reads[r].writer;
      });
      if (!reads_match) continue;

      std::vector<std::pair<std::string, std::optional<TxId>>> undo;
      for (const auto& w : tx.writes) {
        auto it = state.find(w.key);
        undo.emplace_back(w.key, it == state.end() ? std::nullopt : std::optional<TxId>(it->second));
        if (w.deleted) {
          state.erase(w.key);
        } else {
          state[w.key] = tx.tx_id;
        }
      }
      placed[i] = 1;
      order_.push_back(i);
      if (dfs(state, placed)) return true;
      order_.pop_back();
      placed[i] = 0;
      for (auto it = undo.rbegin(); it != undo.rend(); ++it) {
        if (it->second) {
          state[it->first] = *it->second;
        } else {
          state.erase(it->first);
        }
      }
    }
    return false;
  }

  std::string describe(const Constraint& c) const {
    switch (c.kind) {
      case Constraint::kRead: {
        const auto& r = txs_[c.a]->reads[c.b];
        return txs_[c.a]->tx_id + " reads " + r.key + " from " + label(r.writer);
      }
      case Constraint::kRealTime:
        return txs_[c.a]->tx_id + " commits before " + txs_[c.b]->tx_id + " begins";
      case Constraint::kFinal:
        return "final " + c.key + " written by " + label(c.writer);
    }
    return {};
  }

  const History& history_;
  std::vector<const TxSummary*> txs_;
  std::vector<Constraint> constraints_;
  std::vector<char> enabled_;
  std::vector<std::vector<std::size_t>> reads_;
  std::vector<std::vector<std::size_t>> preds_;
  std::vector<std::size_t> finals_;
  std::vector<std::size_t> order_;
};

std::optional<TransactionMetadata> metadataOf(const Record& r) {
  auto meta = splitColumns(r.columns).second;
  if (!meta.contains(kTxIdColumn)) return std::nullopt;
  return decodeMetadata(meta);
}

}  // namespace

SerializabilityResult checkSerializable(const History& history) {
  std::vector<const TxSummary*> committed;
  for (const auto& tx : history.transactions) {
    if (tx.committed) committed.push_back(&tx);
  }
  if (committed.size() > kSerializabilitySearchBound) {
    throw Error(ErrorCode::kSearchBoundExceeded, std::to_string(committed.size()) + " committed transactions exceed the bound of " +
                                                     std::to_string(kSerializabilitySearchBound));
  }
  SerialSearch search(history, std::move(committed));
  SerializabilityResult result;
  if (search.solve()) {
    result.order = search.order();
    return result;
  }
  result.ok = false;
  result.constraints = search.minimalUnsatisfiable();
  return result;
}

std::string_view toString(AuditOutcome outcome) {
  switch (outcome) {
    case AuditOutcome::kOk: return "Ok";
    case AuditOutcome::kPartialWrite: return "PartialWrite";
    case AuditOutcome::kPreparedResidue: return "PreparedResidue";
  }
  return "?";
}

AuditResult auditAtomicity(const std::vector<Record>& dump, const History& history) {
  std::map<TxId, std::vector<std::string>> residue;
  std::map<std::string, TxId> current;
  for (const auto& r : dump) {
    auto meta = metadataOf(r);
    if (!meta) continue;
    const auto key = r.key.toString();
    if (meta->state == TxState::kPrepared) residue[meta->tx_id].push_back(key);
    current[key] = meta->tx_id;
  }
  if (!residue.empty()) {
    auto& [tx_id, keys] = *residue.begin();
    return AuditResult{AuditOutcome::kPreparedResidue, tx_id, keys};
  }

  std::map<std::pair<TxId, std::string>, const WriteObservation*> writes;
  for (const auto& tx : history.transactions) {
    for (const auto& w : tx.writes) writes[{tx.tx_id, w.key}] = &w;
  }

  // Walk each key's lineage back through prior writers.
  std::map<std::string, std::set<TxId>> reflected;
  std::set<TxId> visible;
  for (const auto& [key, writer] : current) {
    auto& chain = reflected[key];
    TxId at = writer;
    while (!at.empty() && !chain.contains(at)) {
      chain.insert(at);
      visible.insert(at);
      auto it = writes.find({at, key});
      if (it == writes.end()) break;
      at = it->second->prior_writer;
    }
  }

  for (const auto& tx : history.transactions) {
    if (!visible.contains(tx.tx_id)) continue;
    std::vector<std::string> missing;
    for (const auto& w : tx.writes) {
      if (w.deleted) continue;
      auto it = reflected.find(w.key);
      if (it == reflected.end() || !it->second.contains(tx.tx_id)) missing.push_back(w.key);
    }
    if (!missing.empty()) return AuditResult{AuditOutcome::kPartialWrite, tx.tx_id, std::move(missing)};
  }
  return {};
}

WriterMap writersOf(const std::vector<Record>& dump) {
  WriterMap out;
  for (const auto& r : dump) {
    if (auto meta = metadataOf(r)) out[r.key.toString()] = meta->tx_id;
  }
  return out;
}

TxSummary summarize(const TxHandle& tx) {
  TxSummary s;
  s.tx_id = tx.id();
  s.committed = tx.status() == TxStatus::kCommitted;
  s.begin = tx.beginTs();
  s.commit = tx.endTs();
  for (const auto& [key, obs] : tx.readSet()) {
    ReadObservation r{key.toString(), {}, 0};
    if (obs.present()) {
      auto meta = obs.parsed().metadata;
      r.writer = meta.tx_id;
      r.version = meta.version;
    }
    s.reads.push_back(std::move(r));
  }
  for (const auto& e : tx.effects()) {
    s.writes.push_back(WriteObservation{e.key.toString(), e.new_version, e.prior_tx_id, e.kind == WriteKind::kDelete});
  }
  return s;
}

using nlohmann::json;

std::string toJsonLines(const History& history) {
  std::ostringstream out;
  for (const auto& [key, writer] : history.initial) {
    out << json{{"type", "initial"}, {"key", key}, {"writer", writer}}.dump() << '\n';
  }
  for (const auto& tx : history.transactions) {
    json reads = json::array();
    for (const auto& r : tx.reads) reads.push_back({{"key", r.key}, {"writer", r.writer}, {"version", r.version}});
    json writes = json::array();
    for (const auto& w : tx.writes) {
      writes.push_back({{"key", w.key}, {"version", w.version}, {"prior_writer", w.prior_writer}, {"deleted", w.deleted}});
    }
    out << json{{"type", "tx"},        {"tx_id", tx.tx_id}, {"committed", tx.committed}, {"begin", tx.begin},
                {"commit", tx.commit}, {"reads", reads},    {"writes", writes}}
               .dump()
        << '\n';
  }
  for (const auto& [key, writer] : history.final_state) {
    out << json{{"type", "final"}, {"key", key}, {"writer", writer}}.dump() << '\n';
  }
  return out.str();
}

History parseJsonLines(const std::string& text) {
  History h;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = json::parse(line);
      const auto type = j.at("type").get<std::string>();
      if (type == "initial") {
        h.initial[j.at("key").get<std::string>()] = j.at("writer").get<std::string>();
      } else if (type == "final") {
        h.final_state[j.at("key").get<std::string>()] = j.at("writer").get<std::string>();
      } else if (type == "tx") {
        TxSummary tx;
        tx.tx_id = j.at("tx_id").get<std::string>();
        tx.committed = j.at("committed").get<bool>();
        tx.begin = j.at("begin").get<Timestamp>();
        tx.commit = j.at("commit").get<Timestamp>();
        for (const auto& r : j.at("reads")) {
          tx.reads.push_back({r.at("key").get<std::string>(), r.at("writer").get<std::string>(),
                              r.at("version").get<std::uint64_t>()});
        }
        for (const auto& w : j.at("writes")) {
          tx.writes.push_back({w.at("key").get<std::string>(), w.at("version").get<std::uint64_t>(),
                               w.at("prior_writer").get<std::string>(), w.at("deleted").get<bool>()});
        }
        h.transactions.push_back(std::move(tx));
      } else {
        throw Error(ErrorCode::kInvalidArgument, "unknown line type '" + type + "'");
      }
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kInvalidArgument, "history line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return h;
}

void HistoryRecorder::setInitial(WriterMap initial) {
  std::lock_guard lock(mutex_);
  history_.initial = std::move(initial);
}

void HistoryRecorder::setFinal(WriterMap final_state) {
  std::lock_guard lock(mutex_);
  history_.final_state = std::move(final_state);
}

void HistoryRecorder::record(const TxHandle& tx) { record(summarize(tx)); }

void HistoryRecorder::record(TxSummary summary) {
  std::lock_guard lock(mutex_);
  history_.transactions.push_back(std::move(summary));
}

History HistoryRecorder::history() const {
  std::lock_guard lock(mutex_);
  return history_;
}

}  // namespace fedtx
