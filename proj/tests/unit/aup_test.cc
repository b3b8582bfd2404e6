#include <random>
#include <set>

#include <gtest/gtest.h>

#include "fedtx/errors.hpp"
#include "fedtx/grouping.hpp"
#include "fixtures.hpp"

namespace fedtx {
namespace {

using testing::Cluster;
using testing::cols;
using testing::key;

ConditionalWrite w(FullKey k) { return ConditionalWrite{std::move(k), {}, WriteCondition::unconditional(), WriteKind::kPut}; }

UnitResolver fixed(AtomicityUnit u) {
  return [u](const FullKey&) { return u; };
}

TEST(GroupByAtomicityUnit, TwoStoragesFourWritesEach) {
  std::vector<ConditionalWrite> writes;
  for (int i = 0; i < 4; ++i) {
    writes.push_back(w(key("a", "n", "t", i)));
    writes.push_back(w(key("b", "n", "u", i)));
  }
  auto groups = groupByAtomicityUnit(writes, fixed(AtomicityUnit::kStorage));
  ASSERT_EQ(groups.size(), 2u);
  EXPECT_EQ(groups[0].key.toString(), "a");
  EXPECT_EQ(groups[1].key.toString(), "b");
  EXPECT_EQ(groups[0].items.size(), 4u);
  EXPECT_EQ(groups[1].items.size(), 4u);
}

TEST(GroupByAtomicityUnit, PartitionsSplitGroups) {
  const std::vector<ConditionalWrite> writes = {w(key("a", "n", "t", 1, 1)), w(key("a", "n", "t", 1, 2)),
                                                w(key("a", "n", "t", 2, 1))};
  auto groups = groupByAtomicityUnit(writes, fixed(AtomicityUnit::kPartition));
  ASSERT_EQ(groups.size(), 2u);
  EXPECT_EQ(groups[0].items.size(), 2u);
  EXPECT_EQ(groups[1].items.size(), 1u);
}

TEST(GroupByAtomicityUnit, EmptyAndUnknownStorage) {
  EXPECT_TRUE(groupByAtomicityUnit({}, fixed(AtomicityUnit::kStorage)).empty());
  StorageRegistry registry;
  const std::vector<ConditionalWrite> writes = {w(key("nowhere", "n", "t", 1))};
  try {
    groupByAtomicityUnit(writes, [&](const FullKey& k) { return registry.getAtomicityUnit(k); });
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUnknownStorage);
  }
}

TEST(OnePhaseEligible, Examples) {
  EXPECT_TRUE(onePhaseEligible(1, false, false));
  EXPECT_FALSE(onePhaseEligible(2, false, false));
  EXPECT_FALSE(onePhaseEligible(1, true, false));
  EXPECT_FALSE(onePhaseEligible(1, false, true));
  EXPECT_FALSE(onePhaseEligible(0, false, false));
}

TEST(GroupingProperty, IsAPartitionUnderDerivedKeys) {
  std::mt19937_64 rng(3);
  const AtomicityUnit units[] = {AtomicityUnit::kRecord, AtomicityUnit::kPartition, AtomicityUnit::kTable,
                                 AtomicityUnit::kNamespace, AtomicityUnit::kStorage};
  for (int trial = 0; trial < 500; ++trial) {
    std::map<std::string, AtomicityUnit> unit_of = {{"a", units[rng() % 5]}, {"b", units[rng() % 5]}};
    std::vector<ConditionalWrite> writes;
    std::set<std::string> distinct;
    for (std::size_t i = 0, n = rng() % 12; i < n; ++i) {
      auto k = key(rng() % 2 ? "a" : "b", rng() % 2 ? "n" : "m", rng() % 2 ? "t" : "u",
                   static_cast<std::int64_t>(rng() % 3), static_cast<std::int64_t>(rng() % 3));
      if (!distinct.insert(k.toString()).second) continue;
      writes.push_back(w(k));
    }
    auto resolver = [&](const FullKey& k) { return unit_of.at(k.storage()); };
    auto groups = groupByAtomicityUnit(writes, resolver);
    std::size_t total = 0;
    std::set<std::string> seen;
    std::string previous;
    for (const auto& g : groups) {
      EXPECT_FALSE(g.items.empty());
      EXPECT_LT(previous, g.key.toString());
      previous = g.key.toString();
      for (const auto& item : g.items) {
        EXPECT_EQ(deriveGroupKey(item, resolver(item.key)), g.key);
        EXPECT_TRUE(seen.insert(item.key.toString()).second);
      }
      total += g.items.size();
    }
    EXPECT_EQ(total, writes.size());
  }
}

// Pipeline cost: 2 * groups + 1 db transactions for a multi-group commit.
TEST(AupPipelineProperty, DbTransactionsPerCommit) {
  ManagerOptions o;
  o.parallelism = 1;
  auto cluster = Cluster::make({{"a", {AtomicityUnit::kStorage, false, false}, {}},
                                {"b", {AtomicityUnit::kPartition, false, false}, {}},
                                {"c", {AtomicityUnit::kRecord, false, false}, {}}},
                               o);
  std::mt19937_64 rng(17);
  for (int t = 0; t < 300; ++t) {
    auto tx = cluster.tm().begin();
    std::vector<ConditionalWrite> writes;
    std::set<std::string> distinct;
    for (std::size_t i = 0, n = 1 + rng() % 6; i < n; ++i) {
      const char* s[] = {"a", "b", "c"};
      auto k = key(s[rng() % 3], "n", "t", static_cast<std::int64_t>(rng() % 3), static_cast<std::int64_t>(rng() % 2));
      cluster.tm().put(tx, k, cols(t));
      if (distinct.insert(k.toString()).second) writes.push_back(w(k));
    }
    const auto expected_groups =
        groupByAtomicityUnit(writes, [&](const FullKey& k) { return cluster.registry->getAtomicityUnit(k); }).size();
    cluster.resetCounters();
    // Implicit reads are not db transactions; only batches count here.
    ASSERT_TRUE(cluster.tm().commit(tx).committed());
    const auto c = cluster.totals();
    if (expected_groups == 1) {
      EXPECT_EQ(c.db_transactions, 1u);
      EXPECT_EQ(cluster.at("coordinator").counters().atomic_write_batches, 0u);
    } else {
      EXPECT_EQ(c.db_transactions, 2 * expected_groups + 1);
      EXPECT_EQ(cluster.at("coordinator").counters().atomic_write_batches, 1u);
    }
  }
}

TEST(AupPrepareFailure, IssuedGroupsRollBackAndLaterOnesAreCancelled) {
  ManagerOptions o;
  o.parallelism = 1;
  auto cluster = Cluster::make({{"a", {AtomicityUnit::kStorage, false, false}, {}},
                                {"b", {AtomicityUnit::kStorage, false, false}, {}},
                                {"c", {AtomicityUnit::kStorage, false, false}, {}}},
                               o);
  auto& tm = cluster.tm();
  const auto ka = key("a", "n", "t", 1);
  const auto kb = key("b", "n", "t", 1);
  const auto kc = key("c", "n", "t", 1);
  testing::load(tm, {{ka, cols(1)}});
  testing::load(tm, {{kb, cols(1)}});
  testing::load(tm, {{kc, cols(1)}});
  const auto before = testing::joinedDump(tm, {ka, kb, kc});

  auto tx = tm.begin();
  for (const auto& k : {ka, kb, kc}) {
    tm.get(tx, k);
    tm.put(tx, k, cols(2));
  }
  // A rival update of b makes the second prepare group fail.
  auto rival = tm.begin();
  tm.put(rival, kb, cols(5));
  ASSERT_TRUE(tm.commit(rival).committed());
  const auto after_rival = testing::joinedDump(tm, {ka, kb, kc});

  cluster.resetCounters();
  auto result = tm.commit(tx);
  EXPECT_FALSE(result.committed());
  EXPECT_EQ(result.reason, AbortReason::kConflict);
  EXPECT_EQ(testing::joinedDump(tm, {ka, kb, kc}), after_rival);
  EXPECT_NE(after_rival, before);
  // a: prepare + rollback; b: failed prepare; c: never issued.
  EXPECT_EQ(cluster.at("a").counters().atomic_write_batches, 2u);
  EXPECT_EQ(cluster.at("b").counters().atomic_write_batches, 1u);
  EXPECT_EQ(cluster.at("c").counters().atomic_write_batches, 0u);
  EXPECT_EQ(tm.coordinatorState(tx.id())->state, CoordinatorDecision::kAborted);
}

}  // namespace
}  // namespace fedtx
