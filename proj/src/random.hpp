#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace maavi::detail {

// Seeded generator whose derived draws do not depend on the standard library's
// distribution implementations, so generated instances are stable across toolchains.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    std::size_t below(std::size_t n) {
        auto k = static_cast<std::size_t>(uniform() * static_cast<double>(n));
        return k < n ? k : n - 1;
    }

    bool coin(double p) { return uniform() < p; }

private:
    std::mt19937_64 engine_;
};

} // namespace maavi::detail
