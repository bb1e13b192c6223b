#pragma once

#include <cstdint>
#include <initializer_list>
#include <vector>

namespace lotenet {

/// Deterministic counter-based random generator (splitmix64 core).
///
/// The engine never uses std:: distributions: their output is
/// implementation-defined, which would break bit-reproducible runs.
/// Independent streams are derived by hashing (seed, stream ids), so results
/// do not depend on call order across streams.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    /// Derive an independent stream from a base seed and a list of stream
    /// ids, e.g. derive(seed, {epoch}) or derive(seed, {layer, row, col}).
    static Rng derive(std::uint64_t seed, std::initializer_list<std::uint64_t> ids);

    std::uint64_t next_u64();

    /// Uniform integer in [0, n). n must be >= 1.
    std::uint64_t next_below(std::uint64_t n);

    /// Uniform double in [0, 1).
    double next_unit();

    /// Standard normal via Box-Muller (one value cached per pair).
    double next_normal();

    /// Fisher-Yates shuffle of an index vector.
    void shuffle(std::vector<std::size_t>& items);

private:
    std::uint64_t state_;
    bool has_cached_normal_ = false;
    double cached_normal_ = 0.0;
};

}  // namespace lotenet
