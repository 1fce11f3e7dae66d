#include "citykb/ingestion/clock.hpp"

#include <algorithm>
#include <chrono>
#include <thread>

namespace citykb::ingest {

std::int64_t SystemClock::now() const {
  return std::chrono::duration_cast<std::chrono::seconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

void SystemClock::sleepFor(std::int64_t seconds) {
  std::this_thread::sleep_for(std::chrono::seconds(seconds));
}

std::int64_t ManualClock::now() const {
  std::lock_guard lock(mu_);
  return now_;
}

void ManualClock::sleepFor(std::int64_t seconds) {
  std::unique_lock lock(mu_);
  if (seconds <= 0) return;
  Sleeper self{now_ + seconds};
  sleepers_.push_back(&self);
  ++sleeping_;
  cv_.notify_all();
  cv_.wait(lock, [&] { return self.woken; });
}

void ManualClock::taskStarted() {
  std::lock_guard lock(mu_);
  ++active_;
}

void ManualClock::taskFinished() {
  std::lock_guard lock(mu_);
  --active_;
  cv_.notify_all();
}

void ManualClock::waitQuiescent() {
  std::unique_lock lock(mu_);
  cv_.wait(lock, [&] { return active_ == sleeping_; });
}

void ManualClock::advance(std::int64_t seconds) {
  for (std::int64_t i = 0; i < seconds; ++i) {
    std::unique_lock lock(mu_);
    cv_.wait(lock, [&] { return active_ == sleeping_; });
    ++now_;
    // Wake-up accounting happens here so quiescence cannot be observed
    // between the notification and the sleeper resuming.
    auto due = std::partition(sleepers_.begin(), sleepers_.end(),
                              [&](Sleeper* s) { return s->deadline > now_; });
    for (auto it = due; it != sleepers_.end(); ++it) {
      (*it)->woken = true;
      --sleeping_;
    }
    sleepers_.erase(due, sleepers_.end());
    cv_.notify_all();
    cv_.wait(lock, [&] { return active_ == sleeping_; });
  }
}

}  // namespace citykb::ingest
