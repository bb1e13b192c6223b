#include "lotenet/rng.hpp"

#include <cmath>

namespace lotenet {

namespace {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

}  // namespace

Rng Rng::derive(std::uint64_t seed, std::initializer_list<std::uint64_t> ids) {
    std::uint64_t state = seed;
    std::uint64_t mixed = splitmix64(state);
    for (std::uint64_t id : ids) {
        state = mixed ^ (id + 0x9e3779b97f4a7c15ull);
        mixed = splitmix64(state);
    }
    return Rng(mixed);
}

std::uint64_t Rng::next_u64() { return splitmix64(state_); }

std::uint64_t Rng::next_below(std::uint64_t n) {
    // Lemire multiply-shift; the 2^-64 bias is irrelevant here.
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
}

double Rng::next_unit() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::next_normal() {
    if (has_cached_normal_) {
        has_cached_normal_ = false;
        return cached_normal_;
    }
    double u1 = next_unit();
    double u2 = next_unit();
    // Keep u1 away from 0 so log() is finite.
    u1 = u1 + 0x1.0p-53;
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * 3.14159265358979323846 * u2;
    cached_normal_ = r * std::sin(theta);
    has_cached_normal_ = true;
    return r * std::cos(theta);
}

void Rng::shuffle(std::vector<std::size_t>& items) {
    if (items.size() < 2) return;
    for (std::size_t i = items.size() - 1; i > 0; --i) {
        const std::size_t j = static_cast<std::size_t>(next_below(i + 1));
        std::swap(items[i], items[j]);
    }
}

}  // namespace lotenet
