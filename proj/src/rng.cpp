#include "sqtom/rng.hpp"

#include <cmath>

namespace sqtom {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t index) {
    std::uint64_t s = master;
    std::uint64_t z = splitmix64(s);
    s ^= stream * 0xD1B54A32D192ED03ull;
    z ^= splitmix64(s);
    s ^= (index + 1) * 0x8CB92BA72F3D8DD7ull;
    z ^= splitmix64(s);
    return z;
}

double draw_normal(Rng& rng) {
    const double u1 = uniform01(rng);
    const double u2 = uniform01(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
}

}  // namespace sqtom
