#pragma once

/**
 * @file closed_forms.hpp
 * @brief Exact evaluation of the moment limits: M_k(n), d_K(n), the GL_2
 *        torsion moments, the CM torsion moments and their density splits.
 *
 * All values are exact rationals. Where two published forms of the same value
 * exist, both are computed and compared; a mismatch throws InternalFault.
 */

#include <array>
#include <cstdint>
#include <string>
#include <tuple>

#include <boost/multiprecision/cpp_int.hpp>

#include "core_arith.hpp"
#include "residue_algebra.hpp"

namespace torsion_moments {

using ExactRational = boost::multiprecision::cpp_rational;

inline BigInt numerator_of(const ExactRational& q) { return boost::multiprecision::numerator(q); }
inline BigInt denominator_of(const ExactRational& q) { return boost::multiprecision::denominator(q); }
inline bool is_integral(const ExactRational& q) { return denominator_of(q) == 1; }

/// "n" for integers, "n/d" otherwise.
inline std::string to_string(const ExactRational& q) {
    if (is_integral(q)) return numerator_of(q).str();
    return numerator_of(q).str() + "/" + denominator_of(q).str();
}

inline double to_double(const ExactRational& q) { return q.convert_to<double>(); }

/// P_k(a, b) = (a^k - b^k) / (a - b) = sum_{i<k} a^i b^(k-1-i).
inline BigInt p_poly(const BigInt& a, const BigInt& b, std::uint32_t k) {
    if (a == b) throw UsageError("p_poly: a and b must differ");
    BigInt sum = 0;
    for (std::uint32_t i = 0; i < k; ++i) sum += big_pow(a, i) * big_pow(b, k - 1 - i);
    return sum;
}

// =============================================================================
// M_k(n)
// =============================================================================

/// sum_{de | n} d^k mu(e) / phi(de), grouped by m = de.
inline ExactRational mk_divisor_sum(std::uint64_t n, std::uint32_t k) {
    if (n == 0) throw UsageError("mk: n must be >= 1");
    ExactRational total = 0;
    for (auto m : divisors(n)) {
        BigInt inner = 0;
        for (auto d : divisors(m)) {
            const int mu = mobius(m / d);
            if (mu != 0) inner += big_pow(BigInt(d), k) * mu;
        }
        total += ExactRational(inner, BigInt(euler_phi(m)));
    }
    return total;
}

/// prod_{l^s || n} (sum_{e=1}^{s} P_k(l^e, l^(e-1)) + 1).
inline ExactRational mk_euler_product(std::uint64_t n, std::uint32_t k) {
    if (n == 0) throw UsageError("mk: n must be >= 1");
    BigInt product = 1;
    for (auto [l, s] : factorize(n).factors) {
        BigInt local = 1;
        BigInt lower = 1;
        for (std::uint32_t e = 1; e <= s; ++e) {
            const BigInt upper = lower * l;
            local += p_poly(upper, lower, k);
            lower = upper;
        }
        product *= local;
    }
    return ExactRational(product);
}

inline ExactRational mk(std::uint64_t n, std::uint32_t k) {
    const auto by_sum = mk_divisor_sum(n, k);
    const auto by_product = mk_euler_product(n, k);
    if (by_sum != by_product)
        throw InternalFault("mk(" + std::to_string(n) + "," + std::to_string(k) + "): divisor sum " +
                            to_string(by_sum) + " != Euler product " + to_string(by_product));
    return by_sum;
}

// =============================================================================
// Ideal divisor counts
// =============================================================================

enum class SplittingType { Split, Inert, Ramified };

inline const char* to_string(SplittingType t) {
    switch (t) {
    case SplittingType::Split: return "split";
    case SplittingType::Inert: return "inert";
    case SplittingType::Ramified: return "ramified";
    }
    return "?";
}

/// Classify the rational prime p in K by the Kronecker symbol of disc(K).
inline SplittingType splitting_type(std::uint64_t p, const QuadOrderSpec& spec) {
    switch (kronecker_symbol(spec.discriminant(), static_cast<std::int64_t>(p))) {
    case 1: return SplittingType::Split;
    case -1: return SplittingType::Inert;
    default: return SplittingType::Ramified;
    }
}

/// Number of ideal divisors of n O_K: (a+1)^2, 2a+1, a+1 per l^a || n as l splits, ramifies, stays inert.
inline std::uint64_t dk(std::uint64_t n, const QuadOrderSpec& spec) {
    if (n == 0) throw UsageError("dk: n must be >= 1");
    std::uint64_t count = 1;
    for (auto [l, a] : factorize(n).factors) {
        switch (splitting_type(l, spec)) {
        case SplittingType::Split: count *= (a + 1) * (a + 1); break;
        case SplittingType::Ramified: count *= 2 * a + 1; break;
        case SplittingType::Inert: count *= a + 1; break;
        }
    }
    return count;
}

// =============================================================================
// GL_2 torsion moments (full mod-l image)
// =============================================================================

namespace detail {

inline void require_prime(std::uint64_t l, const char* who) {
    if (!is_prime(l)) throw UsageError(std::string(who) + ": l=" + std::to_string(l) + " is not prime");
}

inline void require_odd_prime(std::uint64_t l, const char* who) {
    require_prime(l, who);
    if (l == 2) throw UsageError(std::string(who) + ": l must be odd");
}

} // namespace detail

/// Densities of N_p(E[l]) = 1, l, l^2 among primes when Gal(Q(E[l])/Q) = GL_2(F_l).
inline std::array<ExactRational, 3> gl2_densities(std::uint64_t l) {
    detail::require_prime(l, "gl2_densities");
    const BigInt L = l;
    const BigInt order = (L * L - L) * (L * L - 1);
    return {ExactRational(L * L * L * L - 2 * L * L * L - L * L + 3 * L, order),
            ExactRational(L * L * L - 2 * L - 1, order), ExactRational(BigInt(1), order)};
}

inline ExactRational gl2_moment(std::uint64_t l, std::uint32_t k) {
    detail::require_prime(l, "gl2_moment");
    const BigInt L = l;
    const BigInt num = L * L * L * L - 2 * L * L * L - L * L + 3 * L + big_pow(L, k) * (L * L * L - 2 * L - 1) +
                       big_pow(L, 2 * k);
    return ExactRational(num, (L * L - L) * (L * L - 1));
}

/// Product over l | n of the per-prime non-CM factor. n must be square-free, k >= 1.
inline ExactRational noncm_moment(std::uint64_t n, std::uint32_t k) {
    if (n == 0) throw UsageError("noncm_moment: n must be >= 1");
    if (k == 0) throw UsageError("noncm_moment: k must be >= 1");
    const auto f = factorize(n);
    if (!f.square_free()) throw UsageError("noncm_moment: n=" + std::to_string(n) + " is not square-free");
    ExactRational result = 1;
    for (auto [l, e] : f.factors) {
        const BigInt L = l;
        const BigInt num = big_pow(L, 2 * k - 1) + big_pow(L, k - 1) * (L * L * L - 2 * L - 1) + L * L * L -
                           2 * L * L - L + 3;
        result *= ExactRational(num, (L - 1) * (L - 1) * (L + 1));
    }
    return result;
}

// =============================================================================
// CM torsion moments
// =============================================================================

namespace detail {

inline void require_dk_value(int dk_l, const char* who) {
    if (dk_l < 2 || dk_l > 4) throw UsageError(std::string(who) + ": d_K(l) must be 2, 3 or 4");
}

} // namespace detail

/// Limit of the inert-or-ramified part: M_k(l)/2 = (l-2)/(2(l-1)) + l^k/(2(l-1)).
inline ExactRational inert_partial_moment(std::uint64_t l, std::uint32_t k) {
    detail::require_odd_prime(l, "inert_partial_moment");
    const BigInt L = l;
    const ExactRational value = ExactRational(L - 2, 2 * (L - 1)) + ExactRational(big_pow(L, k), 2 * (L - 1));
    if (value * 2 != mk(l, k)) throw InternalFault("inert_partial_moment: value differs from M_k(l)/2");
    return value;
}

/// (delta_0^s, delta_1^s, delta_2^s) for the split class; they sum to 1/2.
inline std::array<ExactRational, 3> split_densities(std::uint64_t l, int dk_l) {
    detail::require_odd_prime(l, "split_densities");
    detail::require_dk_value(dk_l, "split_densities");
    const BigInt L = l;
    const BigInt D = dk_l;
    return {ExactRational(L * L - (D - 2) * L - D, 2 * (L * L - 1)), ExactRational(D - 2, 2 * (L - 1)),
            ExactRational(BigInt(1), 2 * (L * L - 1))};
}

/// sum_i delta_i^s l^(ik): the split-class contribution.
inline ExactRational split_partial_moment(std::uint64_t l, std::uint32_t k, int dk_l) {
    const auto delta = split_densities(l, dk_l);
    const BigInt L = l;
    return delta[0] + delta[1] * ExactRational(big_pow(L, k)) + delta[2] * ExactRational(big_pow(L, 2 * k));
}

/// The three-density form: constant + l^k (d-1)/(2(l-1)) + l^(2k)/(2(l^2-1)).
inline ExactRational cm_moment_density_form(std::uint64_t l, std::uint32_t k, int dk_l) {
    detail::require_odd_prime(l, "cm_moment");
    detail::require_dk_value(dk_l, "cm_moment");
    const BigInt L = l;
    const BigInt D = dk_l;
    return ExactRational(2 * L * L - (D - 1) * L - (D + 2), 2 * (L * L - 1)) +
           ExactRational(big_pow(L, k) * (D - 1), 2 * (L - 1)) + ExactRational(big_pow(L, 2 * k), 2 * (L * L - 1));
}

inline ExactRational cm_moment(std::uint64_t l, std::uint32_t k, int dk_l) {
    detail::require_odd_prime(l, "cm_moment");
    detail::require_dk_value(dk_l, "cm_moment");
    const BigInt L = l;
    const BigInt D = dk_l;
    const BigInt num = big_pow(L, 2 * k) + (D - 1) * (big_pow(L, k + 1) + big_pow(L, k)) + 2 * L * L -
                       (D - 1) * L - (D + 2);
    const ExactRational value(num, 2 * (L * L - 1));
    if (value != cm_moment_density_form(l, k, dk_l))
        throw InternalFault("cm_moment: single-fraction and three-density forms disagree");
    return value;
}

} // namespace torsion_moments
