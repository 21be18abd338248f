#pragma once

#include <cstddef>
#include <functional>

namespace qkica {

// Worker count from KICA_THREADS, falling back to 1.
int default_threads();

// Runs body(i) for i in [0, n) on up to `threads` workers with a static
// partition. Exceptions from workers are rethrown on the caller.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& body);

} // namespace qkica
