// Copyright 2026 The parind-lab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <optional>
#include <thread>
#include <vector>

namespace parind::lab {

/// Evaluates fn(0..count-1) on up to `workers` threads and returns the results in index order.
/// The first exception by index is rethrown after all workers finish.
template <class T, class F>
std::vector<T> ordered_map(size_t count, unsigned workers, F fn) {
    std::vector<std::optional<T>> slots(count);
    std::vector<std::exception_ptr> errors(count);
    std::atomic<size_t> next{0};
    auto work = [&] {
        for (size_t i = next++; i < count; i = next++) {
            try {
                slots[i].emplace(fn(i));
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const size_t threads = std::min<size_t>(std::max(1u, workers), count);
    if (threads <= 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (size_t t = 0; t < threads; t++) {
            pool.emplace_back(work);
        }
    }
    std::vector<T> out;
    out.reserve(count);
    for (size_t i = 0; i < count; i++) {
        if (errors[i]) {
            std::rethrow_exception(errors[i]);
        }
        out.push_back(std::move(*slots[i]));
    }
    return out;
}

}  // namespace parind::lab
