// Copyright 2026 The rwn Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace rwn {

inline unsigned default_workers() {
  return std::max(1u, std::thread::hardware_concurrency());
}

// Runs body(begin, end, worker) over `workers` contiguous chunks of
// [0, count). Chunk boundaries depend only on (count, workers); callers
// write results into per-index slots, so the outcome never depends on
// scheduling. The first exception thrown by any chunk is rethrown.
template <typename Body>
void parallel_chunks(std::size_t count, unsigned workers, Body&& body) {
  workers = std::max(1u, workers);
  if (workers == 1 || count < 2) {
    body(std::size_t{0}, count, 0u);
    return;
  }
  const auto chunks = static_cast<unsigned>(
      std::min<std::size_t>(workers, count));
  std::vector<std::thread> threads;
  threads.reserve(chunks);
  std::exception_ptr failure;
  std::mutex failure_mutex;
  for (unsigned w = 0; w < chunks; ++w) {
    const std::size_t begin = count * w / chunks;
    const std::size_t end = count * (w + 1) / chunks;
    threads.emplace_back([&, begin, end, w] {
      try {
        body(begin, end, w);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  if (failure) std::rethrow_exception(failure);
}

template <typename Body>
void parallel_for(std::size_t count, unsigned workers, Body&& body) {
  parallel_chunks(count, workers,
                  [&](std::size_t begin, std::size_t end, unsigned) {
                    for (std::size_t i = begin; i < end; ++i) body(i);
                  });
}

}  // namespace rwn
