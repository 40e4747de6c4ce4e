#pragma once

#include <cstddef>
#include <functional>

namespace esc_dag {

/// std::thread::hardware_concurrency(), at least 1.
int hardware_workers();

/// Runs body(i) for i in [0, count) on up to `workers` threads. Work items are
/// claimed dynamically; results must be written to per-index slots. If any
/// item throws, the exception of the lowest failing index is rethrown after
/// all workers finish.
void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& body);

}  // namespace esc_dag
