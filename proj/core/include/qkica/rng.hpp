#pragma once

#include <cstdint>
#include <initializer_list>

namespace qkica {

std::uint64_t mix64(std::uint64_t x) noexcept;

// Counter-based generator. Draw n depends only on (seed, stream, n), so
// results do not depend on evaluation order or worker count.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed, std::initializer_list<std::uint64_t> stream = {}) noexcept;

    std::uint64_t next_u64() noexcept;
    // Open interval (0, 1).
    double uniform() noexcept;
    double uniform(double lo, double hi) noexcept;
    double normal() noexcept;

    void seek(std::uint64_t counter) noexcept { counter_ = counter; }
    std::uint64_t counter() const noexcept { return counter_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

} // namespace qkica
