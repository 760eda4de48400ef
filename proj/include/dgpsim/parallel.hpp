#pragma once

#include <cstddef>
#include <functional>

namespace dgpsim {

// Calls body(i) for every i in [0, count). With threads <= 1 this is a plain
// loop; otherwise the range is split across a TBB arena of that size. Bodies
// must only write state owned by index i.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& body);

}  // namespace dgpsim
