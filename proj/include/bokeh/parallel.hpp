// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <functional>

namespace bokeh {

/// Worker count used by parallel_for; 0 selects hardware concurrency.
void set_thread_count(int n);
int thread_count() noexcept;

/// Runs fn(i) for i in [0, count). Each index must write only to its own
/// output slot; results then do not depend on the worker count. The first
/// exception thrown by any task is rethrown after all workers join.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn);

}  // namespace bokeh
