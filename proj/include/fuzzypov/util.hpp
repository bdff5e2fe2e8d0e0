#pragma once

#include <charconv>
#include <cstddef>
#include <functional>
#include <string>

namespace fuzzypov {

// Shortest decimal form that round-trips the exact double value.
std::string format_double(double value);

// Runs fn(i) for i in [0, count). With jobs > 1 the range is split across
// threads in fixed chunks; callers must write to disjoint slots so results
// do not depend on the schedule.
void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& fn);

}  // namespace fuzzypov
