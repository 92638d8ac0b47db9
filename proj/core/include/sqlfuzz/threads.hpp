#pragma once

#include <atomic>
#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace sqlfuzz {

/// Runs `count` independent jobs, possibly in parallel. job(i) must be safe
/// to call concurrently for distinct i.
using ParallelMap = std::function<void(std::size_t count, const std::function<void(std::size_t)>& job)>;

/// Serial fallback.
ParallelMap serial_map();

/// Fan-out over `threads` workers with an atomic work index. Results land in
/// caller-owned slots, so scheduling order never affects the outcome.
ParallelMap pooled_map(unsigned threads);

}  // namespace sqlfuzz
