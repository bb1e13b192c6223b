#pragma once

#include <atomic>
#include <cstdint>

namespace lotenet::macs {

/// Global multiply-accumulate counter. Contraction kernels add their exact
/// MAC count (one atomic add per kernel call, so the overhead is noise).
/// The total is an exact integer regardless of threading, which makes it a
/// deterministic work measure for logs and scaling tests.
inline std::atomic<std::uint64_t>& counter() {
    static std::atomic<std::uint64_t> value{0};
    return value;
}

inline void add(std::uint64_t n) { counter().fetch_add(n, std::memory_order_relaxed); }

inline std::uint64_t total() { return counter().load(std::memory_order_relaxed); }

/// Measures MACs across a region: construct, run work, call elapsed().
class Scope {
public:
    Scope() : start_(total()) {}
    std::uint64_t elapsed() const { return total() - start_; }

private:
    std::uint64_t start_;
};

}  // namespace lotenet::macs
