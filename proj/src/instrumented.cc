#include "fedtx/instrumented.hpp"

#include <sstream>

#include "fedtx/errors.hpp"

namespace fedtx {

OpCounters& OpCounters::operator+=(const OpCounters& other) {
  reads += other.reads;
  scans += other.scans;
  atomic_write_batches += other.atomic_write_batches;
  written_records += other.written_records;
  db_transactions += other.db_transactions;
  return *this;
}

std::string OpCounters::report() const {
  std::ostringstream out;
  out << "reads=" << reads << "\n"
      << "scans=" << scans << "\n"
      << "atomicWriteBatches=" << atomic_write_batches << "\n"
      << "writtenRecords=" << written_records << "\n"
      << "dbTransactions=" << db_transactions << "\n";
  return out.str();
}

class CountingAdapter::Transaction final : public ReadTransaction {
 public:
  Transaction(CountingAdapter& owner, std::unique_ptr<ReadTransaction> inner)
      : owner_(owner), inner_(std::move(inner)) {}

  std::optional<Record> read(const FullKey& key) override {
    owner_.reads_.fetch_add(1, std::memory_order_relaxed);
    return inner_->read(key);
  }
  std::vector<Record> scan(const GroupKey& partition) override {
    owner_.scans_.fetch_add(1, std::memory_order_relaxed);
    return inner_->scan(partition);
  }
  void commit() override { inner_->commit(); }

 private:
  CountingAdapter& owner_;
  std::unique_ptr<ReadTransaction> inner_;
};

CountingAdapter::CountingAdapter(std::shared_ptr<Adapter> inner) : inner_(std::move(inner)) {}

std::optional<Record> CountingAdapter::read(const FullKey& key) {
  reads_.fetch_add(1, std::memory_order_relaxed);
  return inner_->read(key);
}

std::vector<Record> CountingAdapter::scan(const GroupKey& partition) {
  scans_.fetch_add(1, std::memory_order_relaxed);
  return inner_->scan(partition);
}

WriteResult CountingAdapter::atomicWrite(std::span<const ConditionalWrite> writes) {
  batches_.fetch_add(1, std::memory_order_relaxed);
  db_transactions_.fetch_add(1, std::memory_order_relaxed);
  written_.fetch_add(writes.size(), std::memory_order_relaxed);
  return inner_->atomicWrite(writes);
}

std::unique_ptr<ReadTransaction> CountingAdapter::begin(const GroupKey& unit) {
  auto tx = inner_->begin(unit);
  db_transactions_.fetch_add(1, std::memory_order_relaxed);
  return std::make_unique<Transaction>(*this, std::move(tx));
}

std::optional<ViewDefinition> CountingAdapter::viewFor(const std::string& ns, const std::string& table) const {
  return inner_->viewFor(ns, table);
}

std::optional<Record> CountingAdapter::viewRead(const std::string& view, const FullKey& key) {
  reads_.fetch_add(1, std::memory_order_relaxed);
  return inner_->viewRead(view, key);
}

std::vector<Record> CountingAdapter::viewScan(const std::string& view, const GroupKey& partition) {
  scans_.fetch_add(1, std::memory_order_relaxed);
  return inner_->viewScan(view, partition);
}

OpCounters CountingAdapter::counters() const {
  OpCounters c;
  c.reads = reads_.load();
  c.scans = scans_.load();
  c.atomic_write_batches = batches_.load();
  c.written_records = written_.load();
  c.db_transactions = db_transactions_.load();
  return c;
}

void CountingAdapter::reset() {
  reads_ = 0;
  scans_ = 0;
  batches_ = 0;
  written_ = 0;
  db_transactions_ = 0;
}

FaultInjectingAdapter::FaultInjectingAdapter(std::shared_ptr<Adapter> inner, FaultPlan plan)
    : inner_(std::move(inner)) {
  injectFault(std::move(plan));
}

void FaultInjectingAdapter::injectFault(FaultPlan plan) {
  for (std::size_t i = 1; i < plan.size(); ++i) {
    if (plan[i].operation_index <= plan[i - 1].operation_index) {
      throw Error(ErrorCode::kInvalidArgument, "fault plan indices must be strictly increasing");
    }
  }
  std::lock_guard lock(mutex_);
  plan_ = std::move(plan);
  next_fault_ = 0;
  op_index_ = 0;
}

std::uint64_t FaultInjectingAdapter::faultsRaised() const {
  std::lock_guard lock(mutex_);
  return raised_;
}

WriteResult FaultInjectingAdapter::atomicWrite(std::span<const ConditionalWrite> writes) {
  std::optional<FaultKind> fault;
  std::uint64_t index = 0;
  {
    std::lock_guard lock(mutex_);
    index = op_index_++;
    if (next_fault_ < plan_.size() && plan_[next_fault_].operation_index == index) {
      fault = plan_[next_fault_++].kind;
      ++raised_;
    }
  }
  if (!fault) return inner_->atomicWrite(writes);
  const std::string where = name() + " atomicWrite #" + std::to_string(index);
  if (*fault == FaultKind::kCrashBeforeBatch) {
    throw Error(ErrorCode::kInjectedFault, "crash before " + where);
  }
  inner_->atomicWrite(writes);
  throw Error(ErrorCode::kInjectedFault, "crash after " + where);
}

}  // namespace fedtx
