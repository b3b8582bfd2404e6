#include <random>

#include <gtest/gtest.h>

#include "fedtx/errors.hpp"
#include "fedtx/key.hpp"
#include "fedtx/metadata.hpp"
#include "fedtx/value.hpp"

namespace fedtx {
namespace {

const FullKey kSample("s1", "ns", "t", {Value(5)}, {Value(2)});

TEST(Value, EqualityIsTagAware) {
  EXPECT_EQ(Value(1), Value(std::int64_t{1}));
  EXPECT_NE(Value(1), Value(true));
  EXPECT_NE(Value::text("1"), Value(1));
  EXPECT_NE(Value::text("ab"), Value::blob("ab"));
  EXPECT_EQ(Value::null(), Value());
}

TEST(Value, OrderingWithinTag) {
  EXPECT_LT(Value(-3), Value(2));
  EXPECT_LT(Value(false), Value(true));
  EXPECT_LT(Value::text("ab"), Value::text("b"));
  EXPECT_LT(Value::blob(std::string("\x01", 1)), Value::blob(std::string("\xff", 1)));
  EXPECT_EQ(compare(Value::null(), Value::null()), 0);
}

TEST(Value, CrossTagCompareIsAnError) {
  try {
    (void)compare(Value(1), Value::text("1"));
    FAIL() << "expected TypeMismatch";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kTypeMismatch);
  }
  EXPECT_THROW((void)Value(1).asText(), Error);
  EXPECT_THROW((void)Value::text("x").asInt(), Error);
}

TEST(Value, Rendering) {
  EXPECT_EQ(Value(42).toString(), "42");
  EXPECT_EQ(Value::text("a\"b").toString(), "\"a\\\"b\"");
  EXPECT_EQ(Value::blob("\x01\xab").toString(), "0x01ab");
  EXPECT_EQ(Value(true).toString(), "true");
  EXPECT_EQ(Value::null().toString(), "null");
}

TEST(FullKey, RequiresPartitionKey) {
  EXPECT_THROW(FullKey("s", "n", "t", {}), Error);
}

TEST(FullKey, CanonicalText) {
  EXPECT_EQ(kSample.toString(), "s1/ns/t/pk=[5]/ck=[2]");
  EXPECT_EQ(FullKey("s", "n", "t", {Value::text("a"), Value(1)}).toString(), "s/n/t/pk=[\"a\",1]/ck=[]");
}

TEST(FullKey, OrdersByClusteringKeyWithinPartition) {
  FullKey a("s", "n", "t", {Value(1)}, {Value(1)});
  FullKey b("s", "n", "t", {Value(1)}, {Value(2)});
  FullKey c("s", "n", "t", {Value(2)}, {Value(0)});
  EXPECT_LT(a, b);
  EXPECT_LT(b, c);
  EXPECT_EQ(a.withTable("u").table(), "u");
  EXPECT_EQ(a.withTable("u").partitionKey(), a.partitionKey());
}

TEST(AtomicityUnit, ScopeOrderAndParsing) {
  EXPECT_TRUE(broaderOrEqual(AtomicityUnit::kStorage, AtomicityUnit::kNamespace));
  EXPECT_TRUE(broaderOrEqual(AtomicityUnit::kNamespace, AtomicityUnit::kTable));
  EXPECT_TRUE(broaderOrEqual(AtomicityUnit::kTable, AtomicityUnit::kPartition));
  EXPECT_TRUE(broaderOrEqual(AtomicityUnit::kPartition, AtomicityUnit::kRecord));
  EXPECT_FALSE(broaderOrEqual(AtomicityUnit::kRecord, AtomicityUnit::kPartition));
  EXPECT_EQ(parseAtomicityUnit("SCHEMA"), AtomicityUnit::kNamespace);
  EXPECT_EQ(parseAtomicityUnit("NAMESPACE"), AtomicityUnit::kNamespace);
  EXPECT_EQ(parseAtomicityUnit("DATABASE"), AtomicityUnit::kStorage);
  for (auto u : {AtomicityUnit::kRecord, AtomicityUnit::kPartition, AtomicityUnit::kTable, AtomicityUnit::kNamespace,
                 AtomicityUnit::kStorage}) {
    EXPECT_EQ(parseAtomicityUnit(toString(u)), u);
  }
  EXPECT_THROW(parseAtomicityUnit("ROW"), Error);
}

TEST(GroupKey, DerivationExamples) {
  EXPECT_EQ(deriveGroupKey(kSample, AtomicityUnit::kStorage), GroupKey("s1"));
  EXPECT_EQ(deriveGroupKey(kSample, AtomicityUnit::kStorage).toString(), "s1");
  EXPECT_EQ(deriveGroupKey(kSample, AtomicityUnit::kNamespace).toString(), "s1/ns");
  EXPECT_EQ(deriveGroupKey(kSample, AtomicityUnit::kTable).toString(), "s1/ns/t");
  EXPECT_EQ(deriveGroupKey(kSample, AtomicityUnit::kPartition).toString(), "s1/ns/t/pk=[5]");
  const auto record = deriveGroupKey(kSample, AtomicityUnit::kRecord);
  EXPECT_EQ(record.toString(), "s1/ns/t/pk=[5]/ck=[2]");
  EXPECT_EQ(*record.partitionKey(), KeyValues{Value(5)});
  EXPECT_EQ(*record.clusteringKey(), KeyValues{Value(2)});
}

// Random keys over a small domain so that collisions are frequent.
FullKey randomKey(std::mt19937_64& rng) {
  const char* storages[] = {"a", "b"};
  const char* names[] = {"x", "y"};
  KeyValues ck;
  if (rng() % 2) ck.push_back(Value(static_cast<std::int64_t>(rng() % 3)));
  return FullKey(storages[rng() % 2], names[rng() % 2], names[rng() % 2], {Value(static_cast<std::int64_t>(rng() % 3))},
                 ck);
}

const AtomicityUnit kUnits[] = {AtomicityUnit::kRecord, AtomicityUnit::kPartition, AtomicityUnit::kTable,
                                AtomicityUnit::kNamespace, AtomicityUnit::kStorage};

TEST(GroupKeyProperty, BroaderUnitGivesPrefix) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 2000; ++i) {
    const auto k = randomKey(rng);
    for (auto u1 : kUnits) {
      for (auto u2 : kUnits) {
        if (!broaderOrEqual(u1, u2)) continue;
        EXPECT_TRUE(deriveGroupKey(k, u1).isPrefixOf(deriveGroupKey(k, u2))) << k.toString();
      }
      EXPECT_TRUE(deriveGroupKey(k, u1).contains(k));
    }
  }
}

// Oracle: compare the key components down to the unit's depth directly.
bool agreeToDepth(const FullKey& a, const FullKey& b, AtomicityUnit u) {
  if (a.storage() != b.storage()) return false;
  if (u == AtomicityUnit::kStorage) return true;
  if (a.ns() != b.ns()) return false;
  if (u == AtomicityUnit::kNamespace) return true;
  if (a.table() != b.table()) return false;
  if (u == AtomicityUnit::kTable) return true;
  if (a.partitionKey() != b.partitionKey()) return false;
  if (u == AtomicityUnit::kPartition) return true;
  return a.clusteringKey() == b.clusteringKey();
}

TEST(GroupKeyProperty, EqualIffComponentsAgreeToDepth) {
  std::mt19937_64 rng(12);
  for (int i = 0; i < 5000; ++i) {
    const auto a = randomKey(rng);
    const auto b = randomKey(rng);
    for (auto u : kUnits) {
      EXPECT_EQ(deriveGroupKey(a, u) == deriveGroupKey(b, u), agreeToDepth(a, b, u))
          << a.toString() << " " << b.toString() << " " << toString(u);
      EXPECT_EQ(deriveGroupKey(a, u).toString() == deriveGroupKey(b, u).toString(), agreeToDepth(a, b, u));
    }
  }
}

TransactionMetadata sampleMetadata(bool prepared) {
  TransactionMetadata m;
  m.tx_id = "t2";
  m.version = 2;
  m.state = prepared ? TxState::kPrepared : TxState::kCommitted;
  m.prepared_at = 10;
  if (!prepared) m.committed_at = 12;
  if (prepared) {
    m.before_image = BeforeImage{Columns{{"v", Value(1)}, {"name", Value::text("old")}},
                                 VersionMetadata{"t1", 1, TxState::kCommitted, 3, 4, false}};
  }
  return m;
}

TEST(Metadata, RoundTripsThroughColumns) {
  for (bool prepared : {false, true}) {
    const auto m = sampleMetadata(prepared);
    EXPECT_TRUE(m.wellFormed());
    const auto encoded = encodeMetadata(m);
    for (const auto& [name, _] : encoded) EXPECT_TRUE(isMetadataColumn(name)) << name;
    EXPECT_EQ(decodeMetadata(encoded), m);
  }
}

TEST(Metadata, BeforeImagePresentOnlyForUpdates) {
  auto m = sampleMetadata(true);
  m.version = 1;
  EXPECT_FALSE(m.wellFormed());
  m = sampleMetadata(true);
  m.before_image.reset();
  EXPECT_FALSE(m.wellFormed());
  m = sampleMetadata(false);
  m.committed_at.reset();
  EXPECT_FALSE(m.wellFormed());
}

TEST(Metadata, MissingColumnsAreRejected) {
  EXPECT_THROW(decodeMetadata(Columns{{"tx_id", Value::text("t")}}), Error);
  EXPECT_THROW(decodeMetadata(Columns{}), Error);
}

TEST(VersionedRecord, SplitsApplicationAndMetadata) {
  VersionedRecord r{kSample, Columns{{"v", Value(7)}}, sampleMetadata(false)};
  const auto stored = r.toColumns();
  auto [app, meta] = splitColumns(stored);
  EXPECT_EQ(app, (Columns{{"v", Value(7)}}));
  EXPECT_EQ(decodeMetadata(meta), r.metadata);
  EXPECT_EQ(VersionedRecord::parse(kSample, stored).values, r.values);
}

TEST(CoordinatorState, RoundTrip) {
  CoordinatorState s{"tx", CoordinatorDecision::kAborted, 9};
  EXPECT_EQ(CoordinatorState::parse("tx", s.toColumns()), s);
  CoordinatorState c{"tx", CoordinatorDecision::kCommitted, 3};
  EXPECT_EQ(CoordinatorState::parse("tx", c.toColumns()), c);
}

}  // namespace
}  // namespace fedtx
