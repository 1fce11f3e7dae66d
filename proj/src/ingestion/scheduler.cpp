#include "citykb/ingestion/scheduler.hpp"

namespace citykb::ingest {

Scheduler::Scheduler(std::vector<DatasetDescriptor> datasets, Task task, Clock& clock, Sink sink)
    : task_(std::move(task)), clock_(clock), sink_(std::move(sink)) {
  auto start = clock_.now();
  for (auto& d : datasets) {
    auto slot = std::make_unique<Slot>();
    slot->descriptor = std::move(d);
    slot->nextDue = start;
    slots_.push_back(std::move(slot));
  }
}

Scheduler::~Scheduler() { waitIdle(); }

std::size_t Scheduler::poll() {
  std::lock_guard lock(mu_);
  auto now = clock_.now();
  std::size_t started = 0;
  for (auto& slot : slots_) {
    auto period = slot->descriptor.periodSeconds;
    if (period <= 0 || now < slot->nextDue) continue;
    while (slot->nextDue <= now) slot->nextDue += period;
    if (slot->running) {
      ++slot->stats.overlapsAvoided;
      continue;
    }
    if (slot->worker.joinable()) slot->worker.join();
    slot->running = true;
    clock_.taskStarted();
    slot->worker = std::thread([this, s = slot.get()] { execute(*s); });
    ++started;
  }
  return started;
}

void Scheduler::execute(Slot& slot) {
  int inFlight = ++slot.concurrent;
  IngestReport report;
  bool failed = false;
  try {
    report = task_(slot.descriptor);
  } catch (const std::exception& e) {
    report.datasetId = slot.descriptor.id;
    report.failure = e.what();
    failed = true;
  }
  --slot.concurrent;
  {
    std::lock_guard lock(mu_);
    ++slot.stats.runs;
    if (failed) ++slot.stats.failures;
    slot.stats.maxConcurrent = std::max(slot.stats.maxConcurrent, inFlight);
    slot.stats.lastReport = report;
    slot.running = false;
  }
  if (sink_) sink_(report);
  clock_.taskFinished();
}

void Scheduler::run(const std::atomic<bool>& stop) {
  while (!stop) {
    poll();
    clock_.sleepFor(1);
  }
}

void Scheduler::waitIdle() {
  std::vector<std::thread*> workers;
  {
    std::lock_guard lock(mu_);
    for (auto& s : slots_) workers.push_back(&s->worker);
  }
  for (auto* w : workers) {
    if (w->joinable()) w->join();
  }
}

std::map<std::string, DatasetStats> Scheduler::stats() const {
  std::lock_guard lock(mu_);
  std::map<std::string, DatasetStats> out;
  for (const auto& s : slots_) out[s->descriptor.id] = s->stats;
  return out;
}

}  // namespace citykb::ingest
