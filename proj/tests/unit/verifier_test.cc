#include <algorithm>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "fedtx/errors.hpp"
#include "fixtures.hpp"

namespace fedtx {
namespace {

using testing::Cluster;
using testing::cols;
using testing::key;

TxSummary tx(TxId id, Timestamp begin, Timestamp commit, std::vector<ReadObservation> reads,
             std::vector<WriteObservation> writes, bool committed = true) {
  return TxSummary{std::move(id), committed, begin, commit, std::move(reads), std::move(writes)};
}

ReadObservation rd(std::string k, TxId writer) { return ReadObservation{std::move(k), std::move(writer), 0}; }
WriteObservation wr(std::string k, TxId prior = {}, bool deleted = false) {
  return WriteObservation{std::move(k), 0, std::move(prior), deleted};
}

TEST(Serializable, EmptyAndDisjoint) {
  EXPECT_TRUE(checkSerializable(History{}).ok);
  History h;
  h.initial = {{"x", "init"}, {"y", "init"}};
  h.transactions = {tx("a", 1, 4, {rd("x", "init")}, {wr("x", "init")}),
                    tx("b", 2, 3, {rd("y", "init")}, {wr("y", "init")})};
  h.final_state = {{"x", "a"}, {"y", "b"}};
  const auto r = checkSerializable(h);
  ASSERT_TRUE(r.ok);
  EXPECT_EQ(r.order.size(), 2u);
}

TEST(Serializable, WriteSkewIsAViolation) {
  History h;
  h.initial = {{"x", "init"}, {"y", "init"}};
  h.transactions = {tx("a", 1, 3, {rd("x", "init"), rd("y", "init")}, {wr("x", "init")}),
                    tx("b", 2, 4, {rd("x", "init"), rd("y", "init")}, {wr("y", "init")})};
  h.final_state = {{"x", "a"}, {"y", "b"}};
  const auto r = checkSerializable(h);
  EXPECT_FALSE(r.ok);
  EXPECT_FALSE(r.constraints.empty());
  EXPECT_LE(r.constraints.size(), 4u);
}

TEST(Serializable, AbortedTransactionsAreIgnored) {
  History h;
  h.initial = {{"x", "init"}};
  h.transactions = {tx("a", 1, 2, {rd("x", "ghost")}, {wr("x", "init")}, false)};
  h.final_state = {{"x", "init"}};
  EXPECT_TRUE(checkSerializable(h).ok);
}

TEST(Serializable, RealTimeOrderBinds) {
  // b reads the initial x although a committed before b began.
  History h;
  h.initial = {{"x", "init"}};
  h.transactions = {tx("a", 1, 2, {}, {wr("x", "init")}), tx("b", 3, 4, {rd("x", "init")}, {})};
  h.final_state = {{"x", "a"}};
  EXPECT_FALSE(checkSerializable(h).ok);
  // Overlapping, it is fine: b then a.
  h.transactions[1].begin = 1;
  EXPECT_TRUE(checkSerializable(h).ok);
}

TEST(Serializable, FinalStateBinds) {
  History h;
  h.initial = {{"x", "init"}};
  h.transactions = {tx("a", 1, 2, {}, {wr("x", "init")})};
  h.final_state = {{"x", "init"}};
  EXPECT_FALSE(checkSerializable(h).ok);
  h.final_state = {};
  EXPECT_FALSE(checkSerializable(h).ok);
  h.transactions[0].writes[0].deleted = true;
  EXPECT_TRUE(checkSerializable(h).ok);
}

TEST(Serializable, SearchBound) {
  History h;
  for (std::size_t i = 0; i <= kSerializabilitySearchBound; ++i) {
    h.transactions.push_back(tx("t" + std::to_string(i), 1, 2, {}, {}));
  }
  try {
    checkSerializable(h);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSearchBoundExceeded);
  }
  h.transactions.pop_back();
  EXPECT_TRUE(checkSerializable(h).ok);
}

// Brute force over every permutation.
bool bruteForce(const History& h) {
  std::vector<const TxSummary*> txs;
  for (const auto& t : h.transactions) {
    if (t.committed) txs.push_back(&t);
  }
  std::vector<std::size_t> order(txs.size());
  std::iota(order.begin(), order.end(), 0);
  do {
    bool ok = true;
    for (std::size_t i = 0; ok && i < order.size(); ++i) {
      for (std::size_t j = i + 1; ok && j < order.size(); ++j) {
        ok = !(txs[order[j]]->commit < txs[order[i]]->begin);
      }
    }
    WriterMap state = h.initial;
    for (std::size_t i = 0; ok && i < order.size(); ++i) {
      const auto* t = txs[order[i]];
      for (const auto& r : t->reads) {
        auto it = state.find(r.key);
        ok = ok && (it == state.end() ? TxId{} : it->second) == r.writer;
      }
      for (const auto& w : t->writes) {
        if (w.deleted) {
          state.erase(w.key);
        } else {
          state[w.key] = t->tx_id;
        }
      }
    }
    if (ok && state == h.final_state) return true;
  } while (std::next_permutation(order.begin(), order.end()));
  return false;
}

TEST(SerializableProperty, AgreesWithBruteForce) {
  std::mt19937_64 rng(11);
  const std::vector<std::string> keys = {"x", "y", "z"};
  std::size_t ok = 0;
  for (int trial = 0; trial < 3000; ++trial) {
    History h;
    std::vector<TxId> writers = {""};
    for (const auto& k : keys) {
      if (rng() % 3) h.initial[k] = "init";
    }
    const std::size_t n = 1 + rng() % 4;
    for (std::size_t i = 0; i < n; ++i) writers.push_back("t" + std::to_string(i));
    writers.push_back("init");
    for (std::size_t i = 0; i < n; ++i) {
      TxSummary t;
      t.tx_id = "t" + std::to_string(i);
      t.committed = rng() % 6 != 0;
      t.begin = rng() % 10;
      t.commit = t.begin + 1 + rng() % 5;
      for (const auto& k : keys) {
        const auto roll = rng() % 5;
        if (roll == 0) t.reads.push_back(rd(k, writers[rng() % writers.size()]));
        if (roll == 1) t.writes.push_back(wr(k, {}, rng() % 4 == 0));
      }
      h.transactions.push_back(std::move(t));
    }
    // Half the time the final state comes from a real serial run.
    if (rng() % 2) {
      for (const auto& k : keys) {
        auto w = writers[rng() % writers.size()];
        if (!w.empty()) h.final_state[k] = w;
      }
    } else {
      h.final_state = h.initial;
      for (const auto& t : h.transactions) {
        if (!t.committed) continue;
        for (const auto& w : t.writes) {
          if (w.deleted) {
            h.final_state.erase(w.key);
          } else {
            h.final_state[w.key] = t.tx_id;
          }
        }
      }
    }
    const auto verdict = checkSerializable(h);
    ASSERT_EQ(verdict.ok, bruteForce(h)) << toJsonLines(h);
    ok += verdict.ok;
  }
  EXPECT_GT(ok, 100u);
  EXPECT_LT(ok, 2900u);
}

TEST(SerializableProperty, ViolationCoreIsMinimal) {
  History h;
  h.initial = {{"x", "init"}, {"y", "init"}};
  h.transactions = {tx("a", 1, 3, {rd("x", "init"), rd("y", "init")}, {wr("x", "init")}),
                    tx("b", 2, 4, {rd("x", "init"), rd("y", "init")}, {wr("y", "init")}),
                    tx("bystander", 5, 6, {}, {})};
  h.final_state = {{"x", "a"}, {"y", "b"}};
  const auto r = checkSerializable(h);
  ASSERT_FALSE(r.ok);
  // The skew needs both readers; the unrelated transaction is not part of it.
  for (const auto& c : r.constraints) EXPECT_EQ(c.find("bystander"), std::string::npos) << c;
  EXPECT_TRUE(std::any_of(r.constraints.begin(), r.constraints.end(), [](const auto& c) { return c.find("a ") == 0; }));
  EXPECT_TRUE(std::any_of(r.constraints.begin(), r.constraints.end(), [](const auto& c) { return c.find("b ") == 0; }));
}

TEST(JsonLines, RoundTrip) {
  History h;
  h.initial = {{"x", "init"}};
  h.transactions = {tx("a", 1, 3, {ReadObservation{"x", "init", 1}}, {WriteObservation{"x", 2, "init", false}}),
                    tx("b", 2, 4, {}, {WriteObservation{"y", 1, "", true}}, false)};
  h.final_state = {{"x", "a"}};
  const auto text = toJsonLines(h);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 4);
  EXPECT_EQ(parseJsonLines(text), h);
  EXPECT_THROW(parseJsonLines("{\"type\":\"nope\"}\n"), Error);
  EXPECT_THROW(parseJsonLines("not json\n"), Error);
}

Record storedRecord(const FullKey& k, std::int64_t v, TxId writer, TxState state = TxState::kCommitted) {
  TransactionMetadata m;
  m.tx_id = std::move(writer);
  m.version = 1;
  m.state = state;
  m.prepared_at = 1;
  if (state == TxState::kCommitted) m.committed_at = 2;
  return Record{k, VersionedRecord{k, cols(v), m}.toColumns()};
}

TEST(Audit, FabricatedPartialWrite) {
  const auto x = key("s", "n", "t", 1);
  const auto y = key("s", "n", "t", 2);
  History h;
  h.initial = {{x.toString(), "init"}, {y.toString(), "init"}};
  h.transactions = {tx("a", 1, 2, {}, {wr(x.toString(), "init"), wr(y.toString(), "init")})};
  const auto torn = auditAtomicity({storedRecord(x, 1, "a"), storedRecord(y, 0, "init")}, h);
  EXPECT_EQ(torn.outcome, AuditOutcome::kPartialWrite);
  EXPECT_EQ(torn.tx_id, "a");
  EXPECT_EQ(torn.keys, std::vector<std::string>{y.toString()});

  EXPECT_TRUE(auditAtomicity({storedRecord(x, 1, "a"), storedRecord(y, 1, "a")}, h).ok());
  EXPECT_TRUE(auditAtomicity({storedRecord(x, 0, "init"), storedRecord(y, 0, "init")}, h).ok());
  // A later writer that overwrote y on top of a keeps a's lineage intact.
  h.transactions.push_back(tx("b", 3, 4, {}, {wr(y.toString(), "a")}));
  EXPECT_TRUE(auditAtomicity({storedRecord(x, 1, "a"), storedRecord(y, 2, "b")}, h).ok());
}

TEST(Audit, PreparedResidue) {
  const auto x = key("s", "n", "t", 1);
  const auto r = auditAtomicity({storedRecord(x, 1, "a", TxState::kPrepared)}, History{});
  EXPECT_EQ(r.outcome, AuditOutcome::kPreparedResidue);
  EXPECT_EQ(r.tx_id, "a");
}

struct CrashAt {
  PipelinePoint point;
  bool armed = false;
};

TEST(Audit, CrashBetweenPrepareGroupsThenRecovery) {
  for (auto point : {PipelinePoint::kAfterPrepareGroup, PipelinePoint::kAfterCommitState}) {
    CrashAt crash{point};
    ManagerOptions o;
    o.parallelism = 1;
    o.hook = [&crash](PipelinePoint p, const TxId&) {
      if (crash.armed && p == crash.point) {
        crash.armed = false;
        throw Error(ErrorCode::kInjectedFault, "crash");
      }
    };
    auto cluster = Cluster::make(
        {{"s0", {AtomicityUnit::kStorage, false, false}, {}}, {"s1", {AtomicityUnit::kStorage, false, false}, {}}},
        o);
    auto& tm = cluster.tm();
    const std::vector<FullKey> keys = {key("s0", "n", "t", 1), key("s1", "n", "t", 1)};
    testing::load(tm, {{keys[0], cols(0)}, {keys[1], cols(0)}});
    HistoryRecorder rec;
    rec.setInitial(writersOf(testing::joinedDump(tm, keys)));
    crash.armed = true;
    auto t = tm.begin();
    for (const auto& k : keys) tm.put(t, k, cols(1));
    EXPECT_THROW(tm.commit(t), Error);
    rec.record(t);
    const auto before = auditAtomicity(testing::joinedDump(tm, keys), rec.history());
    EXPECT_EQ(before.outcome, AuditOutcome::kPreparedResidue);
    EXPECT_EQ(before.tx_id, t.id());
    for (const auto& k : keys) tm.resolve(k);
    EXPECT_TRUE(auditAtomicity(testing::joinedDump(tm, keys), rec.history()).ok());
    const auto state = testing::committedState(tm, keys);
    const auto expected = point == PipelinePoint::kAfterPrepareGroup ? cols(0) : cols(1);
    EXPECT_EQ(state.at(keys[0]), expected);
    EXPECT_EQ(state.at(keys[1]), expected);
  }
}

TEST(Summaries, FromHandle) {
  auto cluster = Cluster::make({{"s0", {AtomicityUnit::kStorage, false, false}, {}}});
  auto& tm = cluster.tm();
  const auto x = key("s0", "n", "t", 1);
  const auto y = key("s0", "n", "t", 2);
  testing::load(tm, {{x, cols(0)}});
  const auto loader = writersOf(testing::joinedDump(tm, {x})).at(x.toString());
  auto t = tm.begin();
  tm.get(t, x);
  tm.get(t, y);
  tm.put(t, x, cols(1));
  ASSERT_TRUE(tm.commit(t).committed());
  const auto s = summarize(t);
  EXPECT_TRUE(s.committed);
  EXPECT_LT(s.begin, s.commit);
  EXPECT_EQ(s.reads, (std::vector<ReadObservation>{{x.toString(), loader, 1}, {y.toString(), "", 0}}));
  EXPECT_EQ(s.writes, (std::vector<WriteObservation>{{x.toString(), 2, loader, false}}));
}

}  // namespace
}  // namespace fedtx
