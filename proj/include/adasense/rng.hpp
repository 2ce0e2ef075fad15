// rng.hpp
#pragma once
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <numbers>
#include <vector>
#include <algorithm>
#include <unordered_set>

namespace adasense {

// Counter-based random stream. A stream is identified by a 64-bit key derived
// from (master seed, coordinates...); draw j of the stream is a pure function
// of (key, j), so results never depend on scheduling or on how many draws
// other streams consumed.
class Rng {
public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t master_seed) : key_(mix(master_seed ^ 0x6a09e667f3bcc909ULL)) {}

    Rng(std::uint64_t master_seed, std::initializer_list<std::uint64_t> coords) : Rng(master_seed) {
        for (auto c : coords) key_ = mix(key_ ^ mix(c + 0x9e3779b97f4a7c15ULL));
    }

    // Child stream keyed by additional coordinates; does not advance *this.
    [[nodiscard]] Rng derive(std::initializer_list<std::uint64_t> coords) const {
        Rng r = *this;
        r.counter_ = 0;
        r.has_spare_ = false;
        for (auto c : coords) r.key_ = mix(r.key_ ^ mix(c + 0xbb67ae8584caa73bULL));
        return r;
    }

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() { return mix(key_ + (++counter_) * 0x9e3779b97f4a7c15ULL); }

    // Uniform on [0,1) with 53 random bits.
    double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    // Uniform on (0,1].
    double uniform_pos() { return static_cast<double>(((*this)() >> 11) + 1) * 0x1.0p-53; }

    // Uniform integer in [0, bound) by rejection (no modulo bias).
    std::uint64_t below(std::uint64_t bound) {
        if (bound <= 1) return 0;
        const std::uint64_t limit = max() - (max() % bound + 1) % bound;
        std::uint64_t x;
        do { x = (*this)(); } while (x > limit);
        return x % bound;
    }

    // Standard normal via Box-Muller; the second variate is cached.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = uniform_pos();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

    bool bernoulli(double p) { return uniform() < p; }

    std::uint64_t draws() const { return counter_; }

private:
    static constexpr std::uint64_t mix(std::uint64_t z) {
        // splitmix64 finalizer
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t key_;
    std::uint64_t counter_ = 0;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

// Uniform random permutation of {0..n-1} (Fisher-Yates).
inline std::vector<std::uint32_t> random_permutation(std::size_t n, Rng& rng) {
    std::vector<std::uint32_t> p(n);
    for (std::size_t i = 0; i < n; ++i) p[i] = static_cast<std::uint32_t>(i);
    for (std::size_t i = n; i > 1; --i) {
        auto j = static_cast<std::size_t>(rng.below(i));
        std::swap(p[i - 1], p[j]);
    }
    return p;
}

// k distinct values from {0..n-1}, uniformly, sorted ascending.
// Floyd's algorithm for sparse draws, partial Fisher-Yates otherwise.
inline std::vector<std::uint32_t> sample_without_replacement(std::size_t n, std::size_t k, Rng& rng) {
    if (k > n) k = n;
    std::vector<std::uint32_t> out;
    out.reserve(k);
    if (2 * k >= n) {
        // dense case: partial shuffle
        std::vector<std::uint32_t> all(n);
        for (std::size_t i = 0; i < n; ++i) all[i] = static_cast<std::uint32_t>(i);
        for (std::size_t i = 0; i < k; ++i) {
            auto j = i + static_cast<std::size_t>(rng.below(n - i));
            std::swap(all[i], all[j]);
        }
        out.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k));
    } else {
        std::unordered_set<std::uint32_t> chosen;
        chosen.reserve(2 * k);
        for (std::size_t j = n - k; j < n; ++j) {
            auto t = static_cast<std::uint32_t>(rng.below(j + 1));
            if (!chosen.insert(t).second) {
                chosen.insert(static_cast<std::uint32_t>(j));
                out.push_back(static_cast<std::uint32_t>(j));
            } else {
                out.push_back(t);
            }
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace adasense
