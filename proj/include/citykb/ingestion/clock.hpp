#pragma once

#include <condition_variable>
#include <cstdint>
#include <mutex>
#include <vector>

namespace citykb::ingest {

// Time source in whole seconds. Scheduled tasks report start/finish so a
// simulated clock can wait until every task is idle or asleep.
class Clock {
 public:
  virtual ~Clock() = default;
  virtual std::int64_t now() const = 0;
  virtual void sleepFor(std::int64_t seconds) = 0;
  virtual void taskStarted() {}
  virtual void taskFinished() {}
};

class SystemClock : public Clock {
 public:
  std::int64_t now() const override;
  void sleepFor(std::int64_t seconds) override;
};

// Simulated clock. Time moves only through advance(); sleeping tasks wake
// when the clock reaches their deadline.
class ManualClock : public Clock {
 public:
  explicit ManualClock(std::int64_t start = 0) : now_(start) {}

  std::int64_t now() const override;
  void sleepFor(std::int64_t seconds) override;
  void taskStarted() override;
  void taskFinished() override;

  // Waits for quiescence, then moves time forward one second at a time,
  // waking due sleepers and waiting for quiescence after each step.
  void advance(std::int64_t seconds);
  // Blocks until every started task has finished or is sleeping.
  void waitQuiescent();

 private:
  struct Sleeper {
    std::int64_t deadline;
    bool woken = false;
  };

  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::int64_t now_;
  int active_ = 0;
  int sleeping_ = 0;
  std::vector<Sleeper*> sleepers_;
};

}  // namespace citykb::ingest
