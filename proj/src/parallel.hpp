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
#pragma once

#include <cstddef>
#include <functional>

namespace probsdf::parallel {

/// Number of workers used by parallel_for (including the calling thread).
void set_workers(int n);
int workers();

/// Runs fn(begin, end) over fixed chunks of [0, count). Chunk boundaries depend
/// only on count and grain, never on the worker count. Calls issued from inside
/// a worker run serially.
void parallel_for(std::size_t count, std::size_t grain,
                  const std::function<void(std::size_t, std::size_t)>& fn);

/// Sum of fn(begin, end) over fixed 4096-element chunks, accumulated in chunk
/// order. Bitwise identical for any worker count.
double chunked_sum(std::size_t count,
                   const std::function<double(std::size_t, std::size_t)>& fn);

constexpr std::size_t kReduceChunk = 4096;

}  // namespace probsdf::parallel
