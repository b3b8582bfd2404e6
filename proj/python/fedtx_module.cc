// Python bindings: memstore federations, transactions, the history checker
// and the benchmark driver.
#include <memory>
#include <string>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "fedtx/bench.hpp"
#include "fedtx/errors.hpp"
#include "fedtx/memstore.hpp"
#include "fedtx/transaction.hpp"
#include "fedtx/verifier.hpp"

namespace py = pybind11;
using namespace fedtx;

namespace {

Value toValue(const py::handle& h) {
  if (h.is_none()) return Value::null();
  if (py::isinstance<py::bool_>(h)) return Value(h.cast<bool>());
  if (py::isinstance<py::int_>(h)) return Value(h.cast<std::int64_t>());
  if (py::isinstance<py::str>(h)) return Value::text(h.cast<std::string>());
  if (py::isinstance<py::bytes>(h)) return Value::blob(h.cast<std::string>());
  throw py::type_error("unsupported value type " + std::string(py::str(h.get_type())));
}

py::object fromValue(const Value& v) {
  switch (v.type()) {
    case ValueType::kNull: return py::none();
    case ValueType::kBoolean: return py::bool_(v.asBool());
    case ValueType::kInteger: return py::int_(v.asInt());
    case ValueType::kText: return py::str(v.asText());
    case ValueType::kBlob: return py::bytes(v.asBlob().bytes);
  }
  return py::none();
}

KeyValues toKeyValues(const py::iterable& items) {
  KeyValues out;
  for (const auto& h : items) out.push_back(toValue(h));
  return out;
}

py::list fromKeyValues(const KeyValues& values) {
  py::list out;
  for (const auto& v : values) out.append(fromValue(v));
  return out;
}

Columns toColumns(const py::dict& d) {
  Columns out;
  for (const auto& [k, v] : d) out.emplace(k.cast<std::string>(), toValue(v));
  return out;
}

py::dict fromColumns(const Columns& c) {
  py::dict out;
  for (const auto& [k, v] : c) out[py::str(k)] = fromValue(v);
  return out;
}

py::dict fromCounters(const OpCounters& c) {
  py::dict d;
  d["reads"] = c.reads;
  d["scans"] = c.scans;
  d["atomic_write_batches"] = c.atomic_write_batches;
  d["written_records"] = c.written_records;
  d["db_transactions"] = c.db_transactions;
  return d;
}

struct State {
  std::map<std::string, MemStoreStack> stores;
  std::shared_ptr<StorageRegistry> registry = std::make_shared<StorageRegistry>();
  std::unique_ptr<TransactionManager> manager;

  TransactionManager& tm() {
    if (!manager) throw Error(ErrorCode::kTransactionState, "federation not started");
    return *manager;
  }
};

class Federation {
 public:
  Federation() : state_(std::make_shared<State>()) {}

  void addMemstore(const std::string& name, const std::string& unit, bool consistent_readable, bool view_joinable,
                   const std::vector<std::pair<std::string, std::string>>& views, const std::string& meta_suffix) {
    if (state_->manager) throw Error(ErrorCode::kTransactionState, "federation already started");
    AdapterCapabilities caps{parseAtomicityUnit(unit), consistent_readable, view_joinable};
    caps.validate();
    auto stack = makeMemStore(name, MemStoreConfig{caps, 0, {}});
    for (const auto& [ns, table] : views) {
      stack.store->registerView(ViewDefinition{table + "_view", ns, table, table + meta_suffix});
    }
    state_->registry->add(stack.top());
    state_->stores.emplace(name, std::move(stack));
  }

  void start(const std::string& coordinator, bool aup, bool one_phase, const std::optional<std::vector<std::string>>& decoupled,
             std::size_t parallelism, bool async_commit_records, std::optional<std::uint64_t> seed) {
    if (state_->manager) throw Error(ErrorCode::kTransactionState, "federation already started");
    ManagerOptions o;
    o.coordinator.storage = coordinator;
    o.aup_enabled = aup;
    o.one_phase_enabled = one_phase;
    if (decoupled) {
      o.decoupling.enabled = true;
      o.decoupling.namespaces.insert(decoupled->begin(), decoupled->end());
    }
    o.parallelism = parallelism;
    o.async_commit_records = async_commit_records;
    o.tx_id_seed = seed;
    if (!state_->stores.contains(coordinator)) {
      addMemstore(coordinator, "STORAGE", false, false, {}, "_meta");
    }
    state_->manager = std::make_unique<TransactionManager>(state_->registry, std::move(o));
  }

  std::shared_ptr<State> state() const { return state_; }

  py::dict counters() const {
    py::dict d;
    for (const auto& [name, s] : state_->stores) d[py::str(name)] = fromCounters(s.counters());
    return d;
  }

  void resetCounters() {
    for (const auto& [_, s] : state_->stores) s.counting->reset();
    if (state_->manager) state_->manager->resetStats();
  }

  py::dict stats() const {
    const auto s = state_->tm().stats();
    py::dict d;
    d["validation_reads"] = s.validation_reads;
    d["coordinator_writes"] = s.coordinator_writes;
    d["one_phase_commits"] = s.one_phase_commits;
    d["two_phase_commits"] = s.two_phase_commits;
    d["read_only_commits"] = s.read_only_commits;
    d["aborts"] = s.aborts;
    d["rolled_forward"] = s.rolled_forward;
    d["rolled_back"] = s.rolled_back;
    return d;
  }

  void injectCrash(const std::string& storage, std::uint64_t index, bool after) {
    state_->stores.at(storage).injectFault(
        FaultPlan{FaultSpec{index, after ? FaultKind::kCrashAfterBatch : FaultKind::kCrashBeforeBatch}});
  }

  void clearFaults() {
    for (const auto& [_, s] : state_->stores) s.injectFault({});
  }

  std::size_t size(const std::string& storage) const { return state_->stores.at(storage).store->size(); }

 private:
  std::shared_ptr<State> state_;
};

class Transaction {
 public:
  Transaction(std::shared_ptr<State> state, bool serializable)
      : state_(std::move(state)), handle_(state_->tm().begin(serializable)) {}

  std::string id() const { return handle_.id(); }
  std::string status() const { return std::string(toString(handle_.status())); }
  std::string reason() const { return std::string(toString(handle_.abortReason())); }

  std::optional<py::dict> get(const FullKey& key) {
    auto r = state_->tm().get(handle_, key);
    if (!r) return std::nullopt;
    return fromColumns(*r);
  }

  py::list scan(const FullKey& key) {
    py::list out;
    for (const auto& r : state_->tm().scan(handle_, deriveGroupKey(key, AtomicityUnit::kPartition))) {
      out.append(py::make_tuple(r.key, fromColumns(r.columns)));
    }
    return out;
  }

  void put(const FullKey& key, const py::dict& values) { state_->tm().put(handle_, key, toColumns(values)); }
  void remove(const FullKey& key) { state_->tm().remove(handle_, key); }

  bool commit() {
    CommitResult r;
    {
      py::gil_scoped_release release;
      r = state_->tm().commit(handle_);
    }
    return r.committed();
  }

  void abort() { state_->tm().abort(handle_); }

  std::string summary() const {
    History h;
    h.transactions.push_back(summarize(handle_));
    return toJsonLines(h);
  }

 private:
  std::shared_ptr<State> state_;
  TxHandle handle_;
};

py::dict reportDict(const bench::Report& r) {
  py::dict d;
  d["config"] = r.config;
  d["attempted"] = r.attempted;
  d["committed"] = r.committed;
  d["aborted"] = r.aborted;
  d["abandoned"] = r.abandoned;
  d["total"] = fromCounters(r.total);
  py::dict per;
  for (const auto& [name, c] : r.per_storage) per[py::str(name)] = fromCounters(c);
  d["per_storage"] = per;
  d["p50_us"] = r.latency.p50_us;
  d["p99_us"] = r.latency.p99_us;
  d["validation_reads"] = r.manager.validation_reads;
  d["coordinator_writes"] = r.manager.coordinator_writes;
  return d;
}

}  // namespace

PYBIND11_MODULE(fedtx, m) {
  m.doc() = "Federated OCC transactions over in-memory storages";

  // Kept for the life of the process, like any extension type.
  static PyObject* error_type = PyErr_NewException("fedtx.Error", PyExc_RuntimeError, nullptr);
  m.attr("Error") = py::handle(error_type);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = py::reinterpret_borrow<py::object>(error_type)(e.what());
      exc.attr("code") = std::string(toString(e.code()));
      PyErr_SetObject(error_type, exc.ptr());
    }
  });

  py::class_<FullKey>(m, "Key")
      .def(py::init([](std::string storage, std::string ns, std::string table, const py::iterable& pk,
                       const py::iterable& ck) {
             return FullKey(std::move(storage), std::move(ns), std::move(table), toKeyValues(pk), toKeyValues(ck));
           }),
           py::arg("storage"), py::arg("namespace"), py::arg("table"), py::arg("partition"),
           py::arg("clustering") = py::list())
      .def_property_readonly("storage", &FullKey::storage)
      .def_property_readonly("namespace", &FullKey::ns)
      .def_property_readonly("table", &FullKey::table)
      .def_property_readonly("partition", [](const FullKey& k) { return fromKeyValues(k.partitionKey()); })
      .def_property_readonly("clustering", [](const FullKey& k) { return fromKeyValues(k.clusteringKey()); })
      .def("__eq__", [](const FullKey& a, const FullKey& b) { return a == b; })
      .def("__lt__", [](const FullKey& a, const FullKey& b) { return a < b; })
      .def("__hash__", [](const FullKey& k) { return py::hash(py::str(k.toString())); })
      .def("__str__", &FullKey::toString)
      .def("__repr__", [](const FullKey& k) { return "Key(" + k.toString() + ")"; });

  py::class_<Federation>(m, "Federation")
      .def(py::init<>())
      .def("add_memstore", &Federation::addMemstore, py::arg("name"), py::arg("atomicity_unit") = "STORAGE",
           py::arg("consistent_readable") = false, py::arg("view_joinable") = false,
           py::arg("views") = std::vector<std::pair<std::string, std::string>>{}, py::arg("meta_suffix") = "_meta")
      .def("start", &Federation::start, py::arg("coordinator") = "coordinator", py::arg("aup") = true,
           py::arg("one_phase") = true, py::arg("decoupled_namespaces") = py::none(), py::arg("parallelism") = 8,
           py::arg("async_commit_records") = false, py::arg("seed") = py::none())
      .def("begin", [](Federation& f, bool serializable) { return Transaction(f.state(), serializable); },
           py::arg("serializable") = false)
      .def("resolve",
           [](Federation& f, const FullKey& k) -> std::optional<py::dict> {
             auto r = f.state()->tm().resolve(k);
             if (!r) return std::nullopt;
             return fromColumns(splitColumns(r->columns).first);
           })
      .def("drain", [](Federation& f) { f.state()->tm().drain(); })
      .def("counters", &Federation::counters)
      .def("reset_counters", &Federation::resetCounters)
      .def("stats", &Federation::stats)
      .def("inject_crash", &Federation::injectCrash, py::arg("storage"), py::arg("index"), py::arg("after") = false)
      .def("clear_faults", &Federation::clearFaults)
      .def("size", &Federation::size);

  py::class_<Transaction>(m, "Transaction")
      .def_property_readonly("id", &Transaction::id)
      .def_property_readonly("status", &Transaction::status)
      .def_property_readonly("abort_reason", &Transaction::reason)
      .def("get", &Transaction::get)
      .def("scan", &Transaction::scan, "rows of the key's partition")
      .def("put", &Transaction::put)
      .def("remove", &Transaction::remove)
      .def("commit", &Transaction::commit)
      .def("abort", &Transaction::abort)
      .def("summary", &Transaction::summary, "JSON lines of this transaction");

  m.def(
      "check_serializable",
      [](const std::string& jsonl) {
        const auto r = checkSerializable(parseJsonLines(jsonl));
        py::dict d;
        d["ok"] = r.ok;
        d["order"] = r.order;
        d["constraints"] = r.constraints;
        return d;
      },
      py::arg("history"));

  m.def(
      "run_bench",
      [](const std::string& config_json, bool load_only) {
        bench::Bench b(bench::parseConfig(config_json));
        bench::Report report;
        {
          py::gil_scoped_release release;
          report = b.loadPhase();
          if (!load_only) report = b.runWorkload();
        }
        return reportDict(report);
      },
      py::arg("config"), py::arg("load_only") = false);

  m.def(
      "render_bench",
      [](const std::string& config_json, const std::string& format) {
        if (format != "text" && format != "csv") throw Error(ErrorCode::kConfig, "unknown format " + format);
        bench::Bench b(bench::parseConfig(config_json));
        b.loadPhase();
        return bench::render(b.runWorkload(), format == "csv" ? bench::ReportFormat::kCsv : bench::ReportFormat::kText);
      },
      py::arg("config"), py::arg("format") = "text");
}
