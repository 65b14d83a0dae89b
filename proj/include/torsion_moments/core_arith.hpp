#pragma once

/**
 * @file core_arith.hpp
 * @brief Integer primitives: modular arithmetic, primality, factorization,
 *        the classical multiplicative functions and a segmented prime sieve.
 *
 * Everything here works on machine words. Anything that can outgrow 64 bits
 * (powers in closed forms, moment sums) goes through BigInt instead.
 */

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "errors.hpp"

namespace torsion_moments {

using BigInt = boost::multiprecision::cpp_int;

// =============================================================================
// Checked word arithmetic
// =============================================================================

inline std::optional<std::uint64_t> checked_add(std::uint64_t a, std::uint64_t b) {
    std::uint64_t r;
    if (__builtin_add_overflow(a, b, &r)) return std::nullopt;
    return r;
}

inline std::optional<std::uint64_t> checked_mul(std::uint64_t a, std::uint64_t b) {
    std::uint64_t r;
    if (__builtin_mul_overflow(a, b, &r)) return std::nullopt;
    return r;
}

/// base^exp in 64 bits, or nullopt on overflow.
inline std::optional<std::uint64_t> checked_pow(std::uint64_t base, std::uint32_t exp) {
    std::uint64_t result = 1;
    for (std::uint32_t i = 0; i < exp; ++i) {
        auto next = checked_mul(result, base);
        if (!next) return std::nullopt;
        result = *next;
    }
    return result;
}

inline BigInt big_pow(const BigInt& base, std::uint32_t exp) {
    return boost::multiprecision::pow(base, exp);
}

// =============================================================================
// Modular arithmetic
// =============================================================================

inline std::uint64_t mul_mod(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
    return static_cast<std::uint64_t>(static_cast<unsigned __int128>(a) * b % m);
}

/// Reduce a signed value into [0, m).
inline std::uint64_t reduce_mod(std::int64_t a, std::uint64_t m) {
    const auto sm = static_cast<__int128>(m);
    __int128 r = static_cast<__int128>(a) % sm;
    if (r < 0) r += sm;
    return static_cast<std::uint64_t>(r);
}

/// b^e mod m by repeated squaring. m >= 2.
inline std::uint64_t pow_mod(std::int64_t b, std::uint64_t e, std::uint64_t m) {
    if (m < 2) throw UsageError("pow_mod: modulus must be >= 2");
    std::uint64_t base = reduce_mod(b, m);
    std::uint64_t result = 1;
    while (e > 0) {
        if (e & 1U) result = mul_mod(result, base, m);
        base = mul_mod(base, base, m);
        e >>= 1U;
    }
    return result;
}

/// Inverse of a modulo m; nullopt when gcd(a, m) != 1.
inline std::optional<std::uint64_t> inverse_mod(std::uint64_t a, std::uint64_t m) {
    std::int64_t old_r = static_cast<std::int64_t>(a % m), r = static_cast<std::int64_t>(m);
    std::int64_t old_s = 1, s = 0;
    while (r != 0) {
        const std::int64_t q = old_r / r;
        old_r = std::exchange(r, old_r - q * r);
        old_s = std::exchange(s, old_s - q * s);
    }
    if (old_r != 1) return std::nullopt;
    return reduce_mod(old_s, m);
}

// =============================================================================
// Primality
// =============================================================================

namespace detail {

inline bool miller_rabin_witness(std::uint64_t n, std::uint64_t a, std::uint64_t d, int r) {
    std::uint64_t x = pow_mod(static_cast<std::int64_t>(a % n), d, n);
    if (x == 1 || x == n - 1) return true;
    for (int i = 1; i < r; ++i) {
        x = mul_mod(x, x, n);
        if (x == n - 1) return true;
    }
    return false;
}

} // namespace detail

/// Deterministic Miller-Rabin, valid for every 64-bit n.
inline bool is_prime(std::uint64_t n) {
    if (n < 2) return false;
    static constexpr std::uint64_t small[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};
    for (auto p : small) {
        if (n == p) return true;
        if (n % p == 0) return false;
    }
    std::uint64_t d = n - 1;
    int r = 0;
    while ((d & 1U) == 0) {
        d >>= 1U;
        ++r;
    }
    for (auto a : small)
        if (!detail::miller_rabin_witness(n, a, d, r)) return false;
    return true;
}

// =============================================================================
// Factorization and multiplicative functions
// =============================================================================

struct PrimePower {
    std::uint64_t prime;
    std::uint32_t exponent;

    bool operator==(const PrimePower&) const = default;
};

/// Canonical factorization, ascending primes. Empty for n = 1.
struct Factorization {
    std::vector<PrimePower> factors;

    std::uint64_t value() const {
        std::uint64_t v = 1;
        for (auto [p, e] : factors) v *= *checked_pow(p, e);
        return v;
    }
    bool square_free() const {
        return std::all_of(factors.begin(), factors.end(),
                           [](const PrimePower& pp) { return pp.exponent == 1; });
    }
    bool operator==(const Factorization&) const = default;
};

inline Factorization factorize(std::uint64_t n) {
    if (n == 0) throw UsageError("factorize: n must be >= 1");
    Factorization f;
    auto take = [&](std::uint64_t p) {
        std::uint32_t e = 0;
        while (n % p == 0) {
            n /= p;
            ++e;
        }
        if (e > 0) f.factors.push_back({p, e});
    };
    take(2);
    take(3);
    for (std::uint64_t p = 5; p <= n / p; p += 6) {
        take(p);
        take(p + 2);
    }
    if (n > 1) f.factors.push_back({n, 1});
    return f;
}

/// Positive divisors in ascending order.
inline std::vector<std::uint64_t> divisors(std::uint64_t n) {
    std::vector<std::uint64_t> out{1};
    for (auto [p, e] : factorize(n).factors) {
        const std::size_t count = out.size();
        std::uint64_t pk = 1;
        for (std::uint32_t i = 1; i <= e; ++i) {
            pk *= p;
            for (std::size_t j = 0; j < count; ++j) out.push_back(out[j] * pk);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

inline std::uint64_t euler_phi(std::uint64_t n) {
    std::uint64_t phi = 1;
    for (auto [p, e] : factorize(n).factors) phi *= (p - 1) * *checked_pow(p, e - 1);
    return phi;
}

inline int mobius(std::uint64_t n) {
    const auto f = factorize(n);
    if (!f.square_free()) return 0;
    return (f.factors.size() % 2 == 0) ? 1 : -1;
}

inline std::uint64_t divisor_count(std::uint64_t n) {
    std::uint64_t d = 1;
    for (auto [p, e] : factorize(n).factors) d *= e + 1;
    return d;
}

/// Kronecker symbol (a/n) for n != 0.
inline int kronecker_symbol(std::int64_t a, std::int64_t n) {
    if (n == 0) throw UsageError("kronecker_symbol: n must be nonzero");
    int result = 1;
    if (n < 0) {
        n = -n;
        if (a < 0) result = -result;
    }
    // factor 2 out of n
    int twos = 0;
    while ((n & 1) == 0) {
        n >>= 1;
        ++twos;
    }
    if (twos > 0) {
        if ((a & 1) == 0) return 0;
        const std::int64_t a8 = ((a % 8) + 8) % 8;
        if ((twos & 1) && (a8 == 3 || a8 == 5)) result = -result;
    }
    // Jacobi symbol (a/n) for odd positive n
    std::int64_t x = a % n;
    if (x < 0) x += n;
    std::int64_t y = n;
    while (x != 0) {
        while ((x & 1) == 0) {
            x >>= 1;
            const std::int64_t y8 = y % 8;
            if (y8 == 3 || y8 == 5) result = -result;
        }
        std::swap(x, y);
        if (x % 4 == 3 && y % 4 == 3) result = -result;
        x %= y;
    }
    return y == 1 ? result : 0;
}

// =============================================================================
// Segmented sieve
// =============================================================================

/**
 * Ascending primes in [lo, hi]. Memory is O(sqrt(hi) + segment). A stream can
 * be split into disjoint consecutive shards whose outputs concatenate to the
 * original stream.
 */
class PrimeStream {
public:
    static constexpr std::uint64_t kSegment = 1U << 18;

    PrimeStream(std::uint64_t lo, std::uint64_t hi) : lo_(std::max<std::uint64_t>(lo, 2)), hi_(hi) {}

    std::uint64_t lo() const { return lo_; }
    std::uint64_t hi() const { return hi_; }
    bool empty_range() const { return lo_ > hi_; }

    /// Calls fn(p) for each prime in range, ascending.
    template <class Fn>
    void for_each(Fn&& fn) const {
        if (empty_range()) return;
        const auto root = static_cast<std::uint64_t>(std::sqrt(static_cast<long double>(hi_))) + 1;
        const auto base = small_primes(root);
        std::vector<std::uint8_t> composite;
        for (std::uint64_t seg_lo = lo_; seg_lo <= hi_; seg_lo += kSegment) {
            const std::uint64_t seg_hi = std::min(hi_, seg_lo + kSegment - 1);
            composite.assign(seg_hi - seg_lo + 1, 0);
            for (auto p : base) {
                if (p * p > seg_hi) break;
                std::uint64_t start = std::max(p * p, (seg_lo + p - 1) / p * p);
                for (std::uint64_t m = start; m <= seg_hi; m += p) composite[m - seg_lo] = 1;
            }
            for (std::uint64_t v = seg_lo; v <= seg_hi; ++v)
                if (!composite[v - seg_lo]) fn(v);
            if (seg_hi == hi_) break;
        }
    }

    std::vector<std::uint64_t> collect() const {
        std::vector<std::uint64_t> out;
        for_each([&](std::uint64_t p) { out.push_back(p); });
        return out;
    }

    std::uint64_t count() const {
        std::uint64_t c = 0;
        for_each([&](std::uint64_t) { ++c; });
        return c;
    }

    /// Split into `parts` disjoint consecutive subranges covering [lo, hi].
    std::vector<PrimeStream> split(std::size_t parts) const {
        std::vector<PrimeStream> out;
        if (empty_range() || parts <= 1) {
            out.push_back(*this);
            return out;
        }
        const std::uint64_t span = hi_ - lo_ + 1;
        const std::uint64_t step = (span + parts - 1) / parts;
        for (std::uint64_t a = lo_; a <= hi_; a += step) {
            out.emplace_back(a, std::min(hi_, a + step - 1));
            if (hi_ - a < step) break;
        }
        return out;
    }

    /// Plain Eratosthenes up to `limit`, used for base primes.
    static std::vector<std::uint64_t> small_primes(std::uint64_t limit) {
        std::vector<std::uint64_t> out;
        if (limit < 2) return out;
        std::vector<std::uint8_t> composite(limit + 1, 0);
        for (std::uint64_t i = 2; i <= limit; ++i) {
            if (composite[i]) continue;
            out.push_back(i);
            for (std::uint64_t j = i * i; j <= limit; j += i) composite[j] = 1;
        }
        return out;
    }

private:
    std::uint64_t lo_;
    std::uint64_t hi_;
};

/// All primes p <= x. Empty when x < 2.
inline PrimeStream sieve_primes(std::uint64_t x) { return PrimeStream(2, x); }

} // namespace torsion_moments
