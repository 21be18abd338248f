#include "qkica/rng.hpp"

#include <cmath>
#include <numbers>

namespace qkica {

namespace {
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
}

std::uint64_t mix64(std::uint64_t x) noexcept {
    x ^= x >> 30;
    x *= 0xBF58476D1CE4E5B9ULL;
    x ^= x >> 27;
    x *= 0x94D049BB133111EBULL;
    x ^= x >> 31;
    return x;
}

CounterRng::CounterRng(std::uint64_t seed, std::initializer_list<std::uint64_t> stream) noexcept
    : key_(mix64(seed + kGolden)) {
    for (std::uint64_t s : stream) key_ = mix64(key_ ^ mix64(s + kGolden));
}

std::uint64_t CounterRng::next_u64() noexcept {
    const std::uint64_t c = counter_++;
    return mix64(key_ ^ mix64(c * kGolden + 0x632BE59BD9B4E019ULL));
}

double CounterRng::uniform() noexcept {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double CounterRng::uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

double CounterRng::normal() noexcept {
    const double u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

} // namespace qkica
