#include "fedtx/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <mutex>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "fedtx/errors.hpp"

namespace fedtx::bench {

std::string_view toString(Workload w) { return w == Workload::kF ? "F" : "C"; }

std::string_view toString(DecouplingMode m) {
  switch (m) {
    case DecouplingMode::kNone: return "NONE";
    case DecouplingMode::kUnoptimized: return "UNOPTIMIZED";
    case DecouplingMode::kConsistentReadable: return "CONSISTENT_READABLE";
    case DecouplingMode::kViewJoinable: return "VIEW_JOINABLE";
  }
  return "?";
}

namespace {

using nlohmann::json;

[[noreturn]] void configError(const std::string& message) { throw Error(ErrorCode::kConfig, message); }

void rejectUnknown(const json& object, std::initializer_list<std::string_view> allowed, const std::string& where) {
  for (const auto& [name, _] : object.items()) {
    if (std::find(allowed.begin(), allowed.end(), name) == allowed.end()) {
      configError("unknown field '" + name + "' in " + where);
    }
  }
}

template <typename T>
void take(const json& object, const char* field, T& out) {
  if (auto it = object.find(field); it != object.end()) {
    try {
      out = it->get<T>();
    } catch (const json::exception&) {
      configError(std::string("field '") + field + "' has the wrong type");
    }
  }
}

DecouplingMode parseDecoupling(const std::string& text) {
  if (text == "NONE") return DecouplingMode::kNone;
  if (text == "UNOPTIMIZED") return DecouplingMode::kUnoptimized;
  if (text == "CONSISTENT_READABLE") return DecouplingMode::kConsistentReadable;
  if (text == "VIEW_JOINABLE") return DecouplingMode::kViewJoinable;
  configError("unknown decoupling mode '" + text + "'");
}

std::uint64_t percentile(std::vector<std::uint64_t>& sorted, double q) {
  if (sorted.empty()) return 0;
  // Nearest-rank.
  auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(sorted.size())));
  return sorted[std::clamp<std::size_t>(rank, 1, sorted.size()) - 1];
}

std::string randomPayload(std::mt19937_64& rng, std::uint32_t bytes) {
  static constexpr char kAlphabet[] = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789";
  std::uniform_int_distribution<std::size_t> pick(0, sizeof(kAlphabet) - 2);
  std::string s(bytes, '\0');
  for (auto& c : s) c = kAlphabet[pick(rng)];
  return s;
}

}  // namespace

void WorkloadConfig::validate() const {
  if (ops_per_tx < 1) configError("ops_per_tx must be at least 1");
  if (storages.empty()) configError("at least one storage is required");
  if (record_count < 1) configError("record_count must be at least 1");
  if (threads < 1) configError("threads must be at least 1");
  std::set<std::string> names;
  for (const auto& s : storages) {
    if (s.name.empty()) configError("storage name must not be empty");
    if (!names.insert(s.name).second) configError("duplicate storage '" + s.name + "'");
    if (s.view_joinable && !s.consistent_readable) {
      configError("storage '" + s.name + "': view_joinable requires consistent_readable");
    }
  }
  if (coordinator.empty()) configError("coordinator must name a storage");
  // Each storage receives at least one op per transaction, on distinct keys.
  const std::uint64_t per_storage = (ops_per_tx + storages.size() - 1) / storages.size();
  if (record_count < per_storage) configError("record_count must be at least the per-storage ops of a transaction");
}

WorkloadConfig parseConfig(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    configError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) configError("config must be an object");
  rejectUnknown(j,
                {"name", "workload", "ops_per_tx", "record_count", "payload_bytes", "threads", "duration_ops",
                 "distribution", "seed", "aup_enabled", "one_phase_enabled", "decoupling", "serializable",
                 "storages", "coordinator"},
                "config");

  WorkloadConfig c;
  take(j, "name", c.name);
  std::string workload = "F";
  take(j, "workload", workload);
  if (workload == "F") {
    c.workload = Workload::kF;
  } else if (workload == "C") {
    c.workload = Workload::kC;
  } else {
    configError("workload must be F or C");
  }
  std::int64_t ops = c.ops_per_tx;
  take(j, "ops_per_tx", ops);
  if (ops < 1 || ops > 1'000'000) configError("ops_per_tx must be a positive integer");
  c.ops_per_tx = static_cast<std::uint32_t>(ops);
  take(j, "record_count", c.record_count);
  take(j, "payload_bytes", c.payload_bytes);
  take(j, "threads", c.threads);
  take(j, "duration_ops", c.duration_ops);
  std::string distribution = "UNIFORM";
  take(j, "distribution", distribution);
  if (distribution != "UNIFORM") configError("only the UNIFORM distribution is supported");
  take(j, "seed", c.seed);
  take(j, "aup_enabled", c.aup_enabled);
  take(j, "one_phase_enabled", c.one_phase_enabled);
  std::string decoupling = "NONE";
  take(j, "decoupling", decoupling);
  c.decoupling = parseDecoupling(decoupling);
  take(j, "serializable", c.serializable);
  take(j, "coordinator", c.coordinator);

  if (auto it = j.find("storages"); it != j.end()) {
    if (!it->is_array()) configError("storages must be a list");
    c.storages.clear();
    for (const auto& s : *it) {
      if (!s.is_object()) configError("each storage must be an object");
      rejectUnknown(s, {"name", "atomicity_unit", "consistent_readable", "view_joinable"}, "storage");
      StorageSpec spec;
      take(s, "name", spec.name);
      std::string unit = "STORAGE";
      take(s, "atomicity_unit", unit);
      try {
        spec.atomicity_unit = parseAtomicityUnit(unit);
      } catch (const Error&) {
        configError("unknown atomicity unit '" + unit + "'");
      }
      take(s, "consistent_readable", spec.consistent_readable);
      take(s, "view_joinable", spec.view_joinable);
      c.storages.push_back(std::move(spec));
    }
  }
  c.validate();
  return c;
}

WorkloadConfig loadConfigFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) configError("cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parseConfig(buf.str());
}

std::string render(const Report& r, ReportFormat format) {
  std::ostringstream out;
  if (format == ReportFormat::kCsv) {
    out << kCsvHeader << '\n'
        << r.config << ',' << r.committed << ',' << r.aborted << ',' << r.total.reads << ',' << r.total.scans << ','
        << r.total.atomic_write_batches << ',' << r.total.written_records << ',' << r.total.db_transactions << ','
        << r.latency.p50_us << ',' << r.latency.p99_us << '\n';
    return out.str();
  }
  out << "config=" << r.config << '\n'
      << "attempted=" << r.attempted << '\n'
      << "committed=" << r.committed << '\n'
      << "aborted=" << r.aborted << '\n'
      << "abandoned=" << r.abandoned << '\n'
      << r.total.report()
      << "validationReads=" << r.manager.validation_reads << '\n'
      << "coordinatorWrites=" << r.manager.coordinator_writes << '\n'
      << "onePhaseCommits=" << r.manager.one_phase_commits << '\n'
      << "twoPhaseCommits=" << r.manager.two_phase_commits << '\n'
      << "p50us=" << r.latency.p50_us << '\n'
      << "p99us=" << r.latency.p99_us << '\n';
  for (const auto& [name, counters] : r.per_storage) {
    std::istringstream lines(counters.report());
    std::string line;
    while (std::getline(lines, line)) out << "storage." << name << '.' << line << '\n';
  }
  return out.str();
}

Bench::Bench(WorkloadConfig config) : config_(std::move(config)) {
  config_.validate();
  registry_ = std::make_shared<StorageRegistry>();

  auto capabilitiesFor = [&](const StorageSpec& s) {
    AdapterCapabilities caps{s.atomicity_unit, s.consistent_readable, s.view_joinable};
    switch (config_.decoupling) {
      case DecouplingMode::kNone: break;
      case DecouplingMode::kUnoptimized: caps.consistent_readable = caps.view_joinable = false; break;
      case DecouplingMode::kConsistentReadable:
        caps.consistent_readable = true;
        caps.view_joinable = false;
        break;
      case DecouplingMode::kViewJoinable: caps.consistent_readable = caps.view_joinable = true; break;
    }
    return caps;
  };

  const std::string app_table(kTable);
  const std::string meta_table = app_table + "_meta";
  for (const auto& s : config_.storages) {
    auto stack = makeMemStore(s.name, MemStoreConfig{capabilitiesFor(s), config_.seed, {}});
    if (config_.decoupling == DecouplingMode::kViewJoinable) {
      stack.store->registerView(ViewDefinition{app_table + "_view", std::string(kNamespace), app_table, meta_table});
    }
    registry_->add(stack.top());
    stores_.emplace(s.name, std::move(stack));
  }
  if (!stores_.contains(config_.coordinator)) {
    auto stack = makeMemStore(config_.coordinator,
                              MemStoreConfig{AdapterCapabilities{AtomicityUnit::kStorage, false, false}, config_.seed, {}});
    registry_->add(stack.top());
    stores_.emplace(config_.coordinator, std::move(stack));
  }

  ManagerOptions options;
  options.coordinator.storage = config_.coordinator;
  options.decoupling.enabled = config_.decoupling != DecouplingMode::kNone;
  options.decoupling.namespaces = {std::string(kNamespace)};
  options.aup_enabled = config_.aup_enabled;
  options.one_phase_enabled = config_.one_phase_enabled;
  options.tx_id_seed = config_.seed;
  // Sequential group batches keep single-threaded runs deterministic.
  options.parallelism = 1;
  manager_ = std::make_unique<TransactionManager>(registry_, std::move(options));
}

FullKey Bench::keyFor(const std::string& storage, std::uint64_t index) const {
  return FullKey(storage, std::string(kNamespace), std::string(kTable), {Value::text("user" + std::to_string(index))});
}

OpCounters Bench::totalCounters() const {
  OpCounters total;
  for (const auto& [_, s] : stores_) total += s.counters();
  return total;
}

void Bench::resetCounters() {
  for (const auto& [_, s] : stores_) s.counting->reset();
  manager_->resetStats();
}

Report Bench::snapshot() const {
  Report r;
  r.config = config_.name;
  for (const auto& [name, s] : stores_) {
    r.per_storage[name] = s.counters();
    r.total += r.per_storage[name];
  }
  r.manager = manager_->stats();
  return r;
}

Report Bench::loadPhase() {
  for (const auto& [_, s] : stores_) s.store->truncate();
  resetCounters();

  constexpr std::uint64_t kLoadBatch = 100;
  std::mt19937_64 rng(config_.seed);
  Report r;
  for (const auto& spec : config_.storages) {
    for (std::uint64_t first = 0; first < config_.record_count; first += kLoadBatch) {
      const std::uint64_t last = std::min(config_.record_count, first + kLoadBatch);
      for (;;) {
        auto tx = manager_->begin(false);
        for (std::uint64_t i = first; i < last; ++i) {
          manager_->put(tx, keyFor(spec.name, i), Columns{{std::string(kPayloadColumn), Value::text(randomPayload(rng, config_.payload_bytes))}});
        }
        ++r.attempted;
        if (manager_->commit(tx).committed()) {
          ++r.committed;
          break;
        }
        ++r.aborted;
      }
    }
  }
  manager_->drain();
  Report out = snapshot();
  out.attempted = r.attempted;
  out.committed = r.committed;
  out.aborted = r.aborted;
  resetCounters();
  return out;
}

Report Bench::runWorkload() {
  std::atomic<std::uint64_t> budget{config_.duration_ops};
  std::mutex merge_mutex;
  std::vector<std::uint64_t> latencies;
  std::uint64_t committed = 0;
  std::uint64_t aborted = 0;
  std::uint64_t abandoned = 0;
  std::exception_ptr failure;

  auto worker = [&](std::uint32_t index) {
    std::mt19937_64 rng(config_.seed * 7919 + index + 1);
    std::vector<std::uint64_t> local_latencies;
    std::uint64_t local_committed = 0;
    std::uint64_t local_aborted = 0;
    std::uint64_t local_abandoned = 0;
    auto take_attempt = [&] {
      auto left = budget.load();
      while (left > 0 && !budget.compare_exchange_weak(left, left - 1)) {
      }
      return left > 0;
    };

    try {
      const std::size_t storages = config_.storages.size();
      std::uniform_int_distribution<std::uint64_t> pick(0, config_.record_count - 1);
      while (take_attempt()) {
        // Keys are drawn once per logical transaction and kept across retries.
        std::vector<FullKey> keys;
        for (std::size_t s = 0; s < storages; ++s) {
          const std::uint32_t ops = config_.ops_per_tx / storages + (s < config_.ops_per_tx % storages ? 1 : 0);
          std::set<std::uint64_t> chosen;
          while (chosen.size() < ops) chosen.insert(pick(rng));
          for (auto i : chosen) keys.push_back(keyFor(config_.storages[s].name, i));
        }
        for (bool first = true;; first = false) {
          if (!first && !take_attempt()) {
            ++local_abandoned;
            break;
          }
          auto tx = manager_->begin(config_.serializable);
          for (const auto& key : keys) {
            manager_->get(tx, key);
            if (config_.workload == Workload::kF) {
              manager_->put(tx, key,
                            Columns{{std::string(kPayloadColumn), Value::text(randomPayload(rng, config_.payload_bytes))}});
            }
          }
          const auto start = std::chrono::steady_clock::now();
          const auto result = manager_->commit(tx);
          const auto elapsed = std::chrono::steady_clock::now() - start;
          local_latencies.push_back(
              static_cast<std::uint64_t>(std::chrono::duration_cast<std::chrono::microseconds>(elapsed).count()));
          if (result.committed()) {
            ++local_committed;
            break;
          }
          ++local_aborted;
        }
      }
    } catch (...) {
      std::lock_guard lock(merge_mutex);
      if (!failure) failure = std::current_exception();
      budget = 0;
    }
    std::lock_guard lock(merge_mutex);
    latencies.insert(latencies.end(), local_latencies.begin(), local_latencies.end());
    committed += local_committed;
    aborted += local_aborted;
    abandoned += local_abandoned;
  };

  if (config_.threads == 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    for (std::uint32_t t = 0; t < config_.threads; ++t) pool.emplace_back(worker, t);
    for (auto& t : pool) t.join();
  }
  manager_->drain();
  if (failure) std::rethrow_exception(failure);

  Report r = snapshot();
  r.committed = committed;
  r.aborted = aborted;
  r.abandoned = abandoned;
  r.attempted = committed + aborted;
  std::sort(latencies.begin(), latencies.end());
  r.latency = LatencySummary{percentile(latencies, 0.50), percentile(latencies, 0.99)};
  return r;
}

}  // namespace fedtx::bench
