#pragma once

#include <atomic>
#include <functional>
#include <map>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "citykb/ingestion/clock.hpp"
#include "citykb/ingestion/ingest.hpp"

namespace citykb::ingest {

struct DatasetStats {
  std::size_t runs = 0;
  std::size_t failures = 0;
  // Due slots dropped because the previous run was still going.
  std::size_t overlapsAvoided = 0;
  // Highest number of simultaneous runs observed; 1 unless exclusion broke.
  int maxConcurrent = 0;
  std::optional<IngestReport> lastReport;
};

// Periodic ingestion driver. A dataset with period P runs at start, start+P,
// start+2P, ...; runs of one dataset never overlap, different datasets run
// on their own threads. A failing run is counted and retried at its next
// slot. Datasets with period 0 are manual-trigger only.
class Scheduler {
 public:
  using Task = std::function<IngestReport(const DatasetDescriptor&)>;
  using Sink = std::function<void(const IngestReport&)>;

  Scheduler(std::vector<DatasetDescriptor> datasets, Task task, Clock& clock, Sink sink = {});
  ~Scheduler();
  Scheduler(const Scheduler&) = delete;
  Scheduler& operator=(const Scheduler&) = delete;

  // Starts every dataset whose slot has arrived. Returns the number started.
  std::size_t poll();
  // poll() once per second of clock time until `stop` is set.
  void run(const std::atomic<bool>& stop);
  // Joins all runs in flight.
  void waitIdle();

  std::map<std::string, DatasetStats> stats() const;

 private:
  struct Slot {
    DatasetDescriptor descriptor;
    std::int64_t nextDue = 0;
    bool running = false;
    std::atomic<int> concurrent{0};
    std::thread worker;
    DatasetStats stats;
  };

  void execute(Slot& slot);

  Task task_;
  Clock& clock_;
  Sink sink_;
  mutable std::mutex mu_;
  std::vector<std::unique_ptr<Slot>> slots_;
};

}  // namespace citykb::ingest
