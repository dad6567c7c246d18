#pragma once

#include <cstddef>
#include <functional>

namespace afnet::geo {

/// Worker count: AFNET_THREADS when set (a positive integer, otherwise
/// ValidationError), else the hardware concurrency.
std::size_t worker_count();

/// Runs fn(0) .. fn(count - 1) on at most `workers` threads (0 means
/// worker_count()). Blocks until all finish; the first exception thrown by
/// any call is rethrown after the rest complete.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn, std::size_t workers = 0);

}  // namespace afnet::geo
