#pragma once

#include <chrono>
#include <condition_variable>
#include <cstddef>
#include <deque>
#include <mutex>
#include <optional>
#include <thread>

namespace jointkf::detail {

/// Blocking single-producer single-consumer hand-off with fixed capacity.
template <typename T>
class BoundedQueue {
 public:
  explicit BoundedQueue(std::size_t capacity) : capacity_(capacity < 1 ? 1 : capacity) {}

  /// False when the queue is full; the item is not enqueued.
  bool try_push(const T& item) {
    {
      std::lock_guard lock(mutex_);
      if (items_.size() >= capacity_) return false;
      items_.push_back(item);
    }
    not_empty_.notify_one();
    return true;
  }

  void push(const T& item) {
    {
      std::unique_lock lock(mutex_);
      not_full_.wait(lock, [&] { return items_.size() < capacity_; });
      items_.push_back(item);
    }
    not_empty_.notify_one();
  }

  /// Empty once the queue is closed and drained. Polls (yielding) for up to
  /// `spin` before blocking, which keeps hand-off latency below a scheduler tick.
  std::optional<T> pop(std::chrono::nanoseconds spin = std::chrono::nanoseconds::zero()) {
    const auto deadline = std::chrono::steady_clock::now() + spin;
    while (spin.count() > 0 && std::chrono::steady_clock::now() < deadline) {
      {
        std::lock_guard lock(mutex_);
        if (!items_.empty() || closed_) break;
      }
      std::this_thread::yield();
    }
    std::optional<T> item;
    {
      std::unique_lock lock(mutex_);
      not_empty_.wait(lock, [&] { return !items_.empty() || closed_; });
      if (items_.empty()) return std::nullopt;
      item = items_.front();
      items_.pop_front();
    }
    not_full_.notify_one();
    return item;
  }

  void close() {
    {
      std::lock_guard lock(mutex_);
      closed_ = true;
    }
    not_empty_.notify_all();
  }

 private:
  std::size_t capacity_;
  std::deque<T> items_;
  bool closed_ = false;
  std::mutex mutex_;
  std::condition_variable not_empty_;
  std::condition_variable not_full_;
};

}  // namespace jointkf::detail
