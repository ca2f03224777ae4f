/*
 * Copyright 2026 The probsdf Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#include "parallel.hpp"

#include <algorithm>
#include <atomic>
#include <condition_variable>
#include <exception>
#include <memory>
#include <mutex>
#include <thread>
#include <vector>

namespace probsdf::parallel {
namespace {

thread_local bool tls_in_worker = false;

class Pool {
 public:
  explicit Pool(int n) {
    for (int i = 1; i < n; ++i) threads_.emplace_back([this] { loop(); });
  }

  ~Pool() {
    {
      std::lock_guard<std::mutex> lock(mu_);
      stop_ = true;
    }
    cv_.notify_all();
    for (auto& t : threads_) t.join();
  }

  int size() const { return static_cast<int>(threads_.size()) + 1; }

  void run(std::size_t n_chunks, const std::function<void(std::size_t)>& job) {
    {
      std::lock_guard<std::mutex> lock(mu_);
      job_ = &job;
      n_chunks_ = n_chunks;
      next_.store(0);
      pending_ = threads_.size();
      error_ = nullptr;
      ++generation_;
    }
    cv_.notify_all();
    work();
    std::unique_lock<std::mutex> lock(mu_);
    done_cv_.wait(lock, [this] { return pending_ == 0; });
    job_ = nullptr;
    if (error_) std::rethrow_exception(error_);
  }

 private:
  void work() {
    tls_in_worker = true;
    for (;;) {
      std::size_t c = next_.fetch_add(1);
      if (c >= n_chunks_) break;
      try {
        (*job_)(c);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu_);
        if (!error_) error_ = std::current_exception();
      }
    }
    tls_in_worker = false;
  }

  void loop() {
    std::uint64_t seen = 0;
    for (;;) {
      {
        std::unique_lock<std::mutex> lock(mu_);
        cv_.wait(lock, [&] { return stop_ || generation_ != seen; });
        if (stop_) return;
        seen = generation_;
      }
      work();
      {
        std::lock_guard<std::mutex> lock(mu_);
        --pending_;
      }
      done_cv_.notify_one();
    }
  }

  std::vector<std::thread> threads_;
  std::mutex mu_;
  std::condition_variable cv_, done_cv_;
  const std::function<void(std::size_t)>* job_ = nullptr;
  std::size_t n_chunks_ = 0;
  std::atomic<std::size_t> next_{0};
  std::size_t pending_ = 0;
  std::uint64_t generation_ = 0;
  bool stop_ = false;
  std::exception_ptr error_;
};

std::mutex g_pool_mu;
std::unique_ptr<Pool> g_pool;
int g_workers = 1;

}  // namespace

void set_workers(int n) {
  std::lock_guard<std::mutex> lock(g_pool_mu);
  n = std::max(1, n);
  if (n == g_workers && (n == 1 || g_pool)) return;
  g_pool.reset();
  g_workers = n;
  if (n > 1) g_pool = std::make_unique<Pool>(n);
}

int workers() { return g_workers; }

void parallel_for(std::size_t count, std::size_t grain,
                  const std::function<void(std::size_t, std::size_t)>& fn) {
  if (count == 0) return;
  grain = std::max<std::size_t>(grain, 1);
  const std::size_t n_chunks = (count + grain - 1) / grain;
  if (g_workers <= 1 || n_chunks == 1 || tls_in_worker || !g_pool) {
    for (std::size_t c = 0; c < n_chunks; ++c)
      fn(c * grain, std::min(count, (c + 1) * grain));
    return;
  }
  std::lock_guard<std::mutex> lock(g_pool_mu);
  g_pool->run(n_chunks, [&](std::size_t c) {
    fn(c * grain, std::min(count, (c + 1) * grain));
  });
}

double chunked_sum(std::size_t count,
                   const std::function<double(std::size_t, std::size_t)>& fn) {
  const std::size_t n_chunks = (count + kReduceChunk - 1) / kReduceChunk;
  std::vector<double> partial(n_chunks, 0.0);
  parallel_for(count, kReduceChunk, [&](std::size_t b, std::size_t e) {
    partial[b / kReduceChunk] = fn(b, e);
  });
  double s = 0.0;
  for (double p : partial) s += p;
  return s;
}

}  // namespace probsdf::parallel
