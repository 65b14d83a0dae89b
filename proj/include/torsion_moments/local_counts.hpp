#pragma once

/**
 * @file local_counts.hpp
 * @brief N_p for the concrete algebraic sets: roots of x^n - a and the
 *        l-torsion of an elliptic curve reduced mod p.
 *
 * Convention: a prime where the set has bad reduction (p | n a for power
 * equations; p < 5 or p | l * disc for curves) is excluded and reported as 0.
 */

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "closed_forms.hpp"
#include "core_arith.hpp"
#include "residue_algebra.hpp"

namespace torsion_moments {

// =============================================================================
// x^n - a
// =============================================================================

struct PowerEquation {
    std::uint32_t n = 1;
    std::int64_t a = 1;

    bool operator==(const PowerEquation&) const = default;
};

inline bool is_square_free(std::uint64_t v) { return v >= 1 && factorize(v).square_free(); }

/// Discriminant of Q(sqrt a) for square-free a > 1.
inline std::int64_t quadratic_discriminant(std::int64_t a) { return (a % 4 == 1) ? a : 4 * a; }

/**
 * Side conditions under which the roots of x^n - a have the full
 * (Z/nZ) x| (Z/nZ)^x Galois action: a square-free positive, and for even n
 * sqrt(a) must not lie in Q(zeta_n), i.e. disc(Q(sqrt a)) must not divide n.
 */
inline void validate_power_conditions(const PowerEquation& eq) {
    if (eq.n == 0) throw UsageError("power equation: n must be >= 1");
    if (eq.a == 1) return;
    if (eq.a < 1 || !is_square_free(static_cast<std::uint64_t>(eq.a)))
        throw UsageError("power equation: a=" + std::to_string(eq.a) + " must be a square-free positive integer");
    if (eq.n % 2 == 0 && eq.n % quadratic_discriminant(eq.a) == 0)
        throw UsageError("power equation: sqrt(" + std::to_string(eq.a) + ") lies in Q(zeta_" +
                         std::to_string(eq.n) + "), so the Kummer extension degenerates");
}

/// #{x in F_p : x^n = a}, by scanning F_p.
inline std::uint64_t count_roots_brute(const PowerEquation& eq, std::uint64_t p) {
    const std::uint64_t target = reduce_mod(eq.a, p);
    std::uint64_t count = 0;
    for (std::uint64_t x = 0; x < p; ++x)
        if (pow_mod(static_cast<std::int64_t>(x), eq.n, p) == target) ++count;
    return count;
}

/// Cyclic-group count: gcd(p-1, n) roots when a is a gcd(p-1,n)-th power residue, else 0.
inline std::uint64_t count_roots_formula(const PowerEquation& eq, std::uint64_t p) {
    const std::uint64_t na = static_cast<std::uint64_t>(eq.n) * static_cast<std::uint64_t>(eq.a < 0 ? -eq.a : eq.a);
    if (std::gcd(p, na) != 1) return count_roots_brute(eq, p);
    const std::uint64_t d = std::gcd<std::uint64_t>(p - 1, eq.n);
    if (eq.a == 1) return d;
    return pow_mod(eq.a, (p - 1) / d, p) == 1 ? d : 0;
}

// =============================================================================
// Elliptic curves y^2 = x^3 + a x + b
// =============================================================================

struct WeierstrassCurve {
    std::int64_t a = 0;
    std::int64_t b = 0;
    std::optional<QuadOrderSpec> cm;
    std::string label;

    static WeierstrassCurve make(std::int64_t a, std::int64_t b, std::optional<QuadOrderSpec> cm = std::nullopt,
                                 std::string label = {}) {
        WeierstrassCurve e{a, b, cm, std::move(label)};
        if (e.discriminant() == 0) throw UsageError("curve: singular (discriminant 0)");
        if (e.label.empty()) e.label = std::to_string(a) + "," + std::to_string(b);
        return e;
    }

    /// Short model of y^2 + a1 xy + a3 y = x^3 + a2 x^2 + a4 x + a6: y^2 = x^3 - 27 c4 x - 54 c6.
    static WeierstrassCurve from_long_form(std::int64_t a1, std::int64_t a2, std::int64_t a3, std::int64_t a4,
                                           std::int64_t a6, std::string label = {}) {
        const BigInt b2 = BigInt(a1) * a1 + 4 * BigInt(a2);
        const BigInt b4 = 2 * BigInt(a4) + BigInt(a1) * a3;
        const BigInt b6 = BigInt(a3) * a3 + 4 * BigInt(a6);
        const BigInt c4 = b2 * b2 - 24 * b4;
        const BigInt c6 = -b2 * b2 * b2 + 36 * b2 * b4 - 216 * b6;
        const BigInt sa = -27 * c4;
        const BigInt sb = -54 * c6;
        const BigInt limit = BigInt(std::numeric_limits<std::int64_t>::max());
        if (abs(sa) > limit || abs(sb) > limit) throw UsageError("curve: short model coefficients exceed 64 bits");
        return make(sa.convert_to<std::int64_t>(), sb.convert_to<std::int64_t>(), std::nullopt, std::move(label));
    }

    /// -16 (4a^3 + 27b^2)
    BigInt discriminant() const {
        const BigInt A = a, B = b;
        return -16 * (4 * A * A * A + 27 * B * B);
    }

    /// Good reduction at p in the sense used here: p >= 5 and p does not divide the discriminant.
    bool has_good_reduction(std::uint64_t p) const {
        if (p < 5) return false;
        const std::uint64_t A = reduce_mod(a, p), B = reduce_mod(b, p);
        const std::uint64_t v = (4 * mul_mod(mul_mod(A, A, p), A, p) + 27 * mul_mod(B, B, p)) % p;
        return v != 0;
    }

    /// x^3 + a x + b mod p
    std::uint64_t rhs(std::uint64_t x, std::uint64_t p) const {
        const std::uint64_t A = reduce_mod(a, p), B = reduce_mod(b, p);
        return (mul_mod(mul_mod(x, x, p), x, p) + mul_mod(A, x, p) + B) % p;
    }
};

/**
 * Named curves:
 *   "17a3"  y^2 + xy + y = x^3 - x^2 - 6x - 4   (no CM; mod-3 image GL_2)
 *   "11a2"  y^2 + y = x^3 - x^2 - 7820x - 263580 (no CM; mod-2 image GL_2)
 *   "cm:-1" y^2 = x^3 - x                        (CM by Z[i])
 *   "cm:-3" y^2 = x^3 + 1                        (CM by Z[(1+sqrt-3)/2])
 * or "a,b" for y^2 = x^3 + a x + b.
 */
inline WeierstrassCurve parse_curve(const std::string& text) {
    if (text == "17a3") return WeierstrassCurve::from_long_form(1, -1, 1, -6, -4, "17a3");
    if (text == "11a2") return WeierstrassCurve::from_long_form(0, -1, 1, -7820, -263580, "11a2");
    if (text == "cm:-1") return WeierstrassCurve::make(-1, 0, QuadOrderSpec::make(-1), "cm:-1");
    if (text == "cm:-3") return WeierstrassCurve::make(0, 1, QuadOrderSpec::make(-3), "cm:-3");
    const auto comma = text.find(',');
    if (comma == std::string::npos) throw UsageError("curve: expected a preset name or \"a,b\", got \"" + text + "\"");
    try {
        std::size_t used_a = 0, used_b = 0;
        const std::string sa = text.substr(0, comma), sb = text.substr(comma + 1);
        const std::int64_t a = std::stoll(sa, &used_a);
        const std::int64_t b = std::stoll(sb, &used_b);
        if (used_a != sa.size() || used_b != sb.size()) throw std::invalid_argument("trailing characters");
        return WeierstrassCurve::make(a, b);
    } catch (const UsageError&) {
        throw;
    } catch (const std::exception&) {
        throw UsageError("curve: cannot parse \"" + text + "\" as \"a,b\"");
    }
}

namespace detail {

inline constexpr std::uint64_t kEulerCriterionLimit = 10'000;

/// Square roots mod an odd prime p: root[r] = y with y^2 = r, 0 when r is a nonresidue (or r = 0).
inline std::vector<std::uint32_t> sqrt_table(std::uint64_t p) {
    std::vector<std::uint32_t> root(p, 0);
    for (std::uint64_t y = 1; y <= (p - 1) / 2; ++y) root[y * y % p] = static_cast<std::uint32_t>(y);
    return root;
}

struct AffinePoint {
    std::uint64_t x = 0;
    std::uint64_t y = 0;
    bool infinity = true;
};

inline AffinePoint ec_add(const AffinePoint& P, const AffinePoint& Q, std::uint64_t A, std::uint64_t p) {
    if (P.infinity) return Q;
    if (Q.infinity) return P;
    std::uint64_t lambda;
    if (P.x == Q.x) {
        if ((P.y + Q.y) % p == 0) return {};
        const std::uint64_t num = (3 * mul_mod(P.x, P.x, p) + A) % p;
        lambda = mul_mod(num, *inverse_mod(2 * P.y % p, p), p);
    } else {
        const std::uint64_t num = (Q.y + p - P.y) % p;
        lambda = mul_mod(num, *inverse_mod((Q.x + p - P.x) % p, p), p);
    }
    const std::uint64_t x3 = (mul_mod(lambda, lambda, p) + 2 * p - P.x - Q.x) % p;
    const std::uint64_t y3 = (mul_mod(lambda, (P.x + p - x3) % p, p) + p - P.y) % p;
    return {x3, y3, false};
}

/// Double-and-add.
inline AffinePoint ec_scalar_mul(AffinePoint P, std::uint64_t k, std::uint64_t A, std::uint64_t p) {
    AffinePoint R;
    while (k > 0) {
        if (k & 1U) R = ec_add(R, P, A, p);
        P = ec_add(P, P, A, p);
        k >>= 1U;
    }
    return R;
}

} // namespace detail

/// Quadratic character of v mod an odd prime p (0 at v = 0), by Euler's criterion.
inline int legendre(std::uint64_t v, std::uint64_t p) {
    v %= p;
    if (v == 0) return 0;
    return pow_mod(static_cast<std::int64_t>(v), (p - 1) / 2, p) == 1 ? 1 : -1;
}

/// #E(F_p) including infinity: p + 1 + sum_x chi(x^3 + a x + b).
inline std::uint64_t ec_point_count(const WeierstrassCurve& E, std::uint64_t p) {
    if (!is_prime(p) || !E.has_good_reduction(p))
        throw UsageError("ec_point_count: p=" + std::to_string(p) + " is not a good prime >= 5");
    std::int64_t sum = 0;
    if (p < detail::kEulerCriterionLimit) {
        for (std::uint64_t x = 0; x < p; ++x) sum += legendre(E.rhs(x, p), p);
    } else {
        const auto root = detail::sqrt_table(p);
        const std::uint64_t A = reduce_mod(E.a, p), B = reduce_mod(E.b, p);
        // f(x+1) - f(x) = 3x^2 + 3x + 1 + A, advanced by finite differences
        std::uint64_t f = B, d1 = (1 + A) % p, d2 = 6 % p;
        for (std::uint64_t x = 0; x < p; ++x) {
            if (f != 0) sum += root[f] != 0 ? 1 : -1;
            f += d1;
            if (f >= p) f -= p;
            d1 += d2;
            if (d1 >= p) d1 -= p;
            d2 += 6;
            if (d2 >= p) d2 -= p;
        }
    }
    return static_cast<std::uint64_t>(static_cast<std::int64_t>(p) + 1 + sum);
}

/// True when N_p(E[l]) is excluded by convention (0) at p.
inline bool torsion_prime_excluded(const WeierstrassCurve& E, std::uint64_t p, std::uint64_t l) {
    return p < 5 || p % l == 0 || !E.has_good_reduction(p);
}

/**
 * |E(F_p)[l]| by enumerating every affine point and testing l P = infinity.
 * Returns 0 at excluded primes.
 */
inline std::uint64_t ec_torsion_count(const WeierstrassCurve& E, std::uint64_t p, std::uint64_t l) {
    if (!is_prime(l)) throw UsageError("ec_torsion_count: l must be prime");
    if (!is_prime(p)) throw UsageError("ec_torsion_count: p must be prime");
    if (torsion_prime_excluded(E, p, l)) return 0;
    const auto root = detail::sqrt_table(p);
    const std::uint64_t A = reduce_mod(E.a, p);
    std::uint64_t count = 1;  // infinity
    for (std::uint64_t x = 0; x < p; ++x) {
        const std::uint64_t r = E.rhs(x, p);
        if (r == 0) {
            if (detail::ec_scalar_mul({x, 0, false}, l, A, p).infinity) ++count;
        } else if (root[r] != 0) {
            // (x, y) and (x, -y) share their order
            if (detail::ec_scalar_mul({x, root[r], false}, l, A, p).infinity) count += 2;
        }
    }
    return count;
}

// =============================================================================
// Division polynomials
// =============================================================================

using IntPoly = std::vector<BigInt>;  ///< coefficients, lowest degree first

namespace detail {

inline void trim(IntPoly& f) {
    while (!f.empty() && f.back() == 0) f.pop_back();
}

inline IntPoly poly_mul(const IntPoly& f, const IntPoly& g) {
    if (f.empty() || g.empty()) return {};
    IntPoly h(f.size() + g.size() - 1, BigInt(0));
    for (std::size_t i = 0; i < f.size(); ++i)
        for (std::size_t j = 0; j < g.size(); ++j) h[i + j] += f[i] * g[j];
    trim(h);
    return h;
}

inline IntPoly poly_sub(IntPoly f, const IntPoly& g) {
    if (f.size() < g.size()) f.resize(g.size(), BigInt(0));
    for (std::size_t i = 0; i < g.size(); ++i) f[i] -= g[i];
    trim(f);
    return f;
}

inline IntPoly poly_half(IntPoly f) {
    for (auto& c : f) {
        if (c % 2 != 0) throw InternalFault("division polynomial: odd coefficient under exact halving");
        c /= 2;
    }
    return f;
}

} // namespace detail

/**
 * The l-th division polynomial in x alone: psi_l for odd l (degree (l^2-1)/2,
 * leading coefficient l), and x^3 + a x + b for l = 2 (whose roots are the
 * x-coordinates of the 2-torsion).
 */
inline IntPoly division_polynomial(const WeierstrassCurve& E, std::uint64_t l) {
    if (!is_prime(l)) throw UsageError("division_polynomial: l must be prime");
    const BigInt a = E.a, b = E.b;
    if (l == 2) return {b, a, BigInt(0), BigInt(1)};
    // f_n = psi_n for odd n and psi_n / y for even n, with y^2 = R(x)
    const IntPoly R = {b, a, BigInt(0), BigInt(1)};
    const IntPoly R2 = detail::poly_mul(R, R);
    std::vector<IntPoly> f(l + 3);
    f[0] = {};
    f[1] = {BigInt(1)};
    f[2] = {BigInt(2)};
    f[3] = {-a * a, 12 * b, 6 * a, BigInt(0), BigInt(3)};
    f[4] = {4 * (-8 * b * b - a * a * a), 4 * (-4 * a * b), 4 * (-5 * a * a), 4 * 20 * b, 4 * 5 * a, BigInt(0),
            BigInt(4)};
    using detail::poly_mul;
    using detail::poly_sub;
    for (std::size_t n = 5; n <= l; ++n) {
        const std::size_t m = n / 2;
        if (n % 2 == 1) {
            const IntPoly lhs = poly_mul(f[m + 2], poly_mul(f[m], poly_mul(f[m], f[m])));
            const IntPoly rhs = poly_mul(f[m - 1], poly_mul(f[m + 1], poly_mul(f[m + 1], f[m + 1])));
            f[n] = (m % 2 == 0) ? poly_sub(poly_mul(R2, lhs), rhs) : poly_sub(lhs, poly_mul(R2, rhs));
        } else {
            const IntPoly inner = poly_sub(poly_mul(f[m + 2], poly_mul(f[m - 1], f[m - 1])),
                                           poly_mul(f[m - 2], poly_mul(f[m + 1], f[m + 1])));
            f[n] = detail::poly_half(poly_mul(f[m], inner));
        }
    }
    return f[l];
}

namespace detail {

using ModPoly = std::vector<std::uint64_t>;

inline void trim(ModPoly& f) {
    while (!f.empty() && f.back() == 0) f.pop_back();
}

inline ModPoly reduce_poly(const IntPoly& f, std::uint64_t p) {
    ModPoly g(f.size());
    const BigInt P = p;
    for (std::size_t i = 0; i < f.size(); ++i) {
        BigInt r = f[i] % P;
        if (r < 0) r += P;
        g[i] = r.convert_to<std::uint64_t>();
    }
    trim(g);
    return g;
}

/// f mod g for monic g.
inline ModPoly poly_mod(ModPoly f, const ModPoly& g, std::uint64_t p) {
    const std::size_t dg = g.size() - 1;
    while (f.size() > dg && !f.empty()) {
        const std::uint64_t lead = f.back();
        const std::size_t shift = f.size() - 1 - dg;
        if (lead != 0)
            for (std::size_t i = 0; i <= dg; ++i) f[shift + i] = (f[shift + i] + p - mul_mod(lead, g[i], p)) % p;
        f.pop_back();
    }
    trim(f);
    return f;
}

inline ModPoly poly_mul_mod(const ModPoly& f, const ModPoly& h, const ModPoly& g, std::uint64_t p) {
    if (f.empty() || h.empty()) return {};
    ModPoly prod(f.size() + h.size() - 1, 0);
    for (std::size_t i = 0; i < f.size(); ++i) {
        if (f[i] == 0) continue;
        for (std::size_t j = 0; j < h.size(); ++j) prod[i + j] = (prod[i + j] + mul_mod(f[i], h[j], p)) % p;
    }
    return poly_mod(std::move(prod), g, p);
}

inline ModPoly poly_pow_mod(ModPoly base, std::uint64_t e, const ModPoly& g, std::uint64_t p) {
    ModPoly result = poly_mod({1}, g, p);
    base = poly_mod(std::move(base), g, p);
    while (e > 0) {
        if (e & 1U) result = poly_mul_mod(result, base, g, p);
        base = poly_mul_mod(base, base, g, p);
        e >>= 1U;
    }
    return result;
}

inline ModPoly make_monic(ModPoly f, std::uint64_t p) {
    if (f.empty()) return f;
    const std::uint64_t inv = *inverse_mod(f.back(), p);
    for (auto& c : f) c = mul_mod(c, inv, p);
    return f;
}

inline ModPoly poly_gcd(ModPoly f, ModPoly g, std::uint64_t p) {
    trim(f);
    trim(g);
    while (!g.empty()) {
        g = make_monic(std::move(g), p);
        f = poly_mod(std::move(f), g, p);
        std::swap(f, g);
    }
    return make_monic(std::move(f), p);
}

inline ModPoly poly_sub_x(ModPoly f, std::uint64_t c0, std::uint64_t c1, std::uint64_t p) {
    if (f.size() < 2) f.resize(2, 0);
    f[0] = (f[0] + p - c0 % p) % p;
    f[1] = (f[1] + p - c1 % p) % p;
    trim(f);
    return f;
}

} // namespace detail

/**
 * |E(F_p)[l]| from the l-th division polynomial, without enumerating points.
 * For odd l the rational l-torsion points are (x, +-y) with x a root of psi_l
 * in F_p and x^3 + a x + b a nonzero square; they are found as
 * gcd(psi_l, x^p - x) and then gcd(., f^((p-1)/2) - 1). `psi` must be
 * division_polynomial(E, l).
 */
inline std::uint64_t ec_torsion_count_divpoly(const WeierstrassCurve& E, std::uint64_t p, std::uint64_t l,
                                              const IntPoly& psi) {
    if (torsion_prime_excluded(E, p, l)) return 0;
    using namespace detail;
    const ModPoly g = make_monic(reduce_poly(psi, p), p);
    const ModPoly xp = poly_pow_mod({0, 1}, p, g, p);
    const ModPoly rational_x = poly_gcd(g, poly_sub_x(xp, 0, 1, p), p);
    const std::size_t roots = rational_x.size() - 1;
    if (l == 2) return 1 + roots;
    if (roots == 0) return 1;
    const ModPoly rhs = reduce_poly({BigInt(E.b), BigInt(E.a), BigInt(0), BigInt(1)}, p);
    const ModPoly chi = poly_pow_mod(rhs, (p - 1) / 2, rational_x, p);
    const ModPoly square_x = poly_gcd(rational_x, poly_sub_x(chi, 1, 0, p), p);
    return 1 + 2 * (square_x.size() - 1);
}

inline std::uint64_t ec_torsion_count_divpoly(const WeierstrassCurve& E, std::uint64_t p, std::uint64_t l) {
    return ec_torsion_count_divpoly(E, p, l, division_polynomial(E, l));
}

} // namespace torsion_moments
