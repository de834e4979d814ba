// Copyright 2026 The Meshfuzz Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Linear stage pipelines over bounded queues. Every item visits every stage
// exactly once, in stage order; a stage may run a pool of workers, and an
// ordered stage sees items strictly in index order.

#ifndef MESHFUZZ_PIPELINE_H_
#define MESHFUZZ_PIPELINE_H_

#include <algorithm>
#include <atomic>
#include <condition_variable>
#include <cstddef>
#include <deque>
#include <exception>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace meshfuzz {

template <typename T>
class BoundedQueue {
 public:
  explicit BoundedQueue(size_t capacity) : capacity_(capacity ? capacity : 1) {}

  // Blocks while full. Returns false if the queue was closed.
  bool Push(T value) {
    std::unique_lock lock(mu_);
    not_full_.wait(lock, [&] { return closed_ || items_.size() < capacity_; });
    if (closed_) return false;
    items_.push_back(std::move(value));
    not_empty_.notify_one();
    return true;
  }

  // Blocks while empty; nullopt once closed and drained.
  std::optional<T> Pop() {
    std::unique_lock lock(mu_);
    not_empty_.wait(lock, [&] { return closed_ || !items_.empty(); });
    if (items_.empty()) return std::nullopt;
    T value = std::move(items_.front());
    items_.pop_front();
    not_full_.notify_one();
    return value;
  }

  void Close() {
    std::lock_guard lock(mu_);
    closed_ = true;
    not_empty_.notify_all();
    not_full_.notify_all();
  }

  size_t size() const {
    std::lock_guard lock(mu_);
    return items_.size();
  }

 private:
  const size_t capacity_;
  mutable std::mutex mu_;
  std::condition_variable not_empty_, not_full_;
  std::deque<T> items_;
  bool closed_ = false;
};

template <typename T>
struct StageSpec {
  std::string name;
  std::function<void(T &)> fn;
  size_t workers = 1;
  bool ordered = false;  // requires workers == 1
};

// Runs all items through all stages on the calling thread.
template <typename T>
void RunSequential(std::vector<T> &items, const std::vector<StageSpec<T>> &stages) {
  for (auto &item : items) {
    for (const auto &stage : stages) stage.fn(item);
  }
}

// One thread per worker; queues of `depth` between stages. Rethrows the
// first exception escaping a stage function after every thread has joined.
template <typename T>
void RunPipelined(std::vector<T> &items, const std::vector<StageSpec<T>> &stages,
                  size_t depth) {
  if (stages.empty() || items.empty()) return;
  const size_t k = stages.size();
  std::vector<std::unique_ptr<BoundedQueue<size_t>>> queues;
  for (size_t i = 0; i < k; ++i) queues.push_back(std::make_unique<BoundedQueue<size_t>>(depth));

  std::mutex err_mu;
  std::exception_ptr first_error;
  auto guarded = [&](const StageSpec<T> &stage, size_t idx) {
    try {
      stage.fn(items[idx]);
    } catch (...) {
      std::lock_guard lock(err_mu);
      if (!first_error) first_error = std::current_exception();
    }
  };

  std::vector<std::thread> threads;
  std::vector<size_t> workers(k);
  std::vector<std::unique_ptr<std::atomic<size_t>>> live;
  for (size_t s = 0; s < k; ++s) {
    workers[s] = stages[s].ordered ? 1 : std::max<size_t>(1, stages[s].workers);
    live.push_back(std::make_unique<std::atomic<size_t>>(workers[s]));
  }
  for (size_t s = 0; s < k; ++s) {
    BoundedQueue<size_t> *in = queues[s].get();
    BoundedQueue<size_t> *out = s + 1 < k ? queues[s + 1].get() : nullptr;
    std::atomic<size_t> *alive = live[s].get();
    const StageSpec<T> *stage = &stages[s];
    auto finish = [out, alive] {
      if (alive->fetch_sub(1) == 1 && out) out->Close();
    };
    if (stage->ordered) {
      threads.emplace_back([&, in, out, stage, finish] {
        std::map<size_t, bool> pending;
        size_t next = 0;
        while (auto idx = in->Pop()) {
          pending[*idx] = true;
          while (!pending.empty() && pending.begin()->first == next) {
            pending.erase(pending.begin());
            guarded(*stage, next);
            if (out) out->Push(next);
            ++next;
          }
        }
        finish();
      });
    } else {
      for (size_t w = 0; w < workers[s]; ++w) {
        threads.emplace_back([&, in, out, stage, finish] {
          while (auto idx = in->Pop()) {
            guarded(*stage, *idx);
            if (out) out->Push(*idx);
          }
          finish();
        });
      }
    }
  }
  for (size_t i = 0; i < items.size(); ++i) queues[0]->Push(i);
  queues[0]->Close();
  for (auto &t : threads) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace meshfuzz

#endif  // MESHFUZZ_PIPELINE_H_
