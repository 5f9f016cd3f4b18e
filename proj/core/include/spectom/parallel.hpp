#pragma once

#include <cstddef>
#include <functional>

namespace spectom {

//! Number of worker threads used by parallel_for. 0 = hardware concurrency.
void set_thread_count(int n);
int thread_count();

//! Runs fn(i) for i in [0, n). Each index must write only its own outputs;
//! results are required to be independent of scheduling, so the serial and
//! threaded paths are interchangeable.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace spectom
