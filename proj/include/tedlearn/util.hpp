#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <thread>
#include <vector>

namespace tedlearn {

// Tolerance rule used for all co-optimality ties: two table entries are tied
// when |a-b| <= tol * max(1, |a|, |b|).
inline bool nearly_equal(double a, double b, double tol = 1e-12) {
    return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

inline double hinge(double z) { return z > 0.0 ? z : 0.0; }

/// Deterministic RNG wrapper; every seeded entry point owns one.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double uniform() {  // in [0, 1)
        return (engine_() >> 11) * (1.0 / 9007199254740992.0);
    }
    // inclusive bounds
    int uniform_int(int lo, int hi) {
        return lo + static_cast<int>(engine_() % static_cast<std::uint64_t>(hi - lo + 1));
    }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
};

// Runs fn(i) for i in [0, n). Work items must be independent; results must be
// written to disjoint, preallocated slots so the schedule cannot affect output.
inline void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
    std::size_t workers = std::min<std::size_t>(n, std::thread::hardware_concurrency());
    if (workers <= 1 || n < 16) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
        });
    }
    for (auto& t : pool) t.join();
}

// 17 significant digits: lossless text round-trip for IEEE doubles.
std::string format_double(double value, int significant_digits = 17);

}  // namespace tedlearn
