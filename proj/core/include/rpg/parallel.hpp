#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace rpg {

/// Worker-thread cap: RPG_THREADS if set to a positive integer, otherwise the
/// hardware concurrency (at least 1).
unsigned worker_threads();

/// Evaluates fn(0..count-1), possibly concurrently, and returns the results in
/// index order so any later reduction is independent of the thread count.
std::vector<double> parallel_map(std::size_t count, const std::function<double(std::size_t)>& fn);

}  // namespace rpg
