// Copyright 2026 The RadioBench Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef RADIOBENCH_PARALLEL_HPP_
#define RADIOBENCH_PARALLEL_HPP_

#include <cstddef>
#include <cstdint>
#include <exception>
#include <limits>
#include <mutex>

namespace radiobench::par {

// Every data-parallel kernel in the library takes an Exec tag. kSerial is the
// reference path kept for testing; kParallel distributes independent indices
// over OpenMP threads. Kernels write disjoint outputs per index and reduce in
// index order, so both paths produce bit-identical results.
enum class Exec { kSerial, kParallel };

// Caps the worker count used by kParallel kernels. n <= 0 restores the
// OpenMP default.
void set_num_threads(int n);
int num_threads();

namespace detail {

// Exceptions cannot cross an OpenMP region. Keeps the one thrown by the
// lowest index so the reported error does not depend on scheduling.
class FirstError {
 public:
  template <typename F>
  void run(std::size_t i, F& fn) {
    try {
      fn(i);
    } catch (...) {
      std::lock_guard<std::mutex> lock(mu_);
      if (i < index_) {
        index_ = i;
        error_ = std::current_exception();
      }
    }
  }
  void rethrow() {
    if (error_) std::rethrow_exception(error_);
  }

 private:
  std::mutex mu_;
  std::size_t index_ = std::numeric_limits<std::size_t>::max();
  std::exception_ptr error_;
};

}  // namespace detail

// Both loops rethrow the exception of the lowest failing index after all
// iterations finish; the serial path stops at the first one.
template <typename F>
void for_each_index(std::size_t n, Exec exec, F&& fn) {
  if (exec == Exec::kSerial || n < 2) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  detail::FirstError err;
  const auto count = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(static) num_threads(num_threads())
  for (std::int64_t i = 0; i < count; ++i) err.run(static_cast<std::size_t>(i), fn);
  err.rethrow();
}

// Dynamic scheduling for uneven work (training runs, restarts). Results must
// still be written to per-index slots.
template <typename F>
void for_each_task(std::size_t n, Exec exec, F&& fn) {
  if (exec == Exec::kSerial || n < 2) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  detail::FirstError err;
  const auto count = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(dynamic, 1) num_threads(num_threads())
  for (std::int64_t i = 0; i < count; ++i) err.run(static_cast<std::size_t>(i), fn);
  err.rethrow();
}

}  // namespace radiobench::par

#endif  // RADIOBENCH_PARALLEL_HPP_
