#include "scheduler.hpp"

#include <exception>
#include <thread>

namespace fedtx::testing {

namespace {
thread_local BatonScheduler* tl_scheduler = nullptr;
thread_local int tl_index = -1;
}  // namespace

void BatonScheduler::handOff(std::unique_lock<std::mutex>&) {
  std::vector<int> live;
  for (int i = 0; i < static_cast<int>(done_.size()); ++i) {
    if (!done_[i]) live.push_back(i);
  }
  const int next = live.empty() ? -1 : live[std::uniform_int_distribution<std::size_t>(0, live.size() - 1)(rng_)];
  if (next != current_) ++switches_;
  current_ = next;
  turn_.notify_all();
}

void BatonScheduler::yield() {
  if (tl_scheduler != this) return;
  std::unique_lock lock(mutex_);
  handOff(lock);
  turn_.wait(lock, [&] { return current_ == tl_index; });
}

void BatonScheduler::run(std::vector<std::function<void()>> bodies) {
  std::exception_ptr failure;
  std::vector<std::thread> threads;
  {
    std::unique_lock lock(mutex_);
    done_.assign(bodies.size(), 0);
    current_ = -1;
  }
  for (int i = 0; i < static_cast<int>(bodies.size()); ++i) {
    threads.emplace_back([&, i] {
      tl_scheduler = this;
      tl_index = i;
      {
        std::unique_lock lock(mutex_);
        turn_.wait(lock, [&] { return current_ == i; });
      }
      try {
        bodies[i]();
      } catch (...) {
        std::lock_guard lock(mutex_);
        if (!failure) failure = std::current_exception();
      }
      std::unique_lock lock(mutex_);
      done_[i] = 1;
      handOff(lock);
      tl_scheduler = nullptr;
    });
  }
  {
    std::unique_lock lock(mutex_);
    handOff(lock);
  }
  for (auto& t : threads) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace fedtx::testing
